#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nser/error.hpp"
#include "nser/eval.hpp"
#include "nser/synth.hpp"
#include "test_util.hpp"

using namespace nser;

namespace {

// Direct-formula oracle over an explicit ranked list, written independently
// of compute_metrics.
struct OracleMetrics {
  double ndcg, recall, hr, precision;
};

OracleMetrics metric_oracle(const std::vector<int>& ranked,
                            const std::set<int>& relevant, int n) {
  OracleMetrics o{0, 0, 0, 0};
  int hits = 0;
  double dcg = 0;
  for (int pos = 0; pos < n && pos < static_cast<int>(ranked.size()); ++pos) {
    if (relevant.count(ranked[static_cast<size_t>(pos)])) {
      ++hits;
      dcg += 1.0 / std::log2(pos + 2.0);
    }
  }
  double idcg = 0;
  int ideal = std::min<int>(n, static_cast<int>(relevant.size()));
  for (int pos = 0; pos < ideal; ++pos) idcg += 1.0 / std::log2(pos + 2.0);
  o.ndcg = idcg > 0 ? dcg / idcg : 0.0;
  o.recall = relevant.empty() ? 0.0 : static_cast<double>(hits) / relevant.size();
  o.hr = hits > 0 ? 1.0 : 0.0;
  o.precision = static_cast<double>(hits) / n;
  return o;
}

Split one_user_split(int user_global, std::vector<int> train,
                     std::vector<int> test) {
  Split s;
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  s.users[user_global] = {train, test};
  return s;
}

}  // namespace

TEST_CASE("make_split: 10 purchases at ratio 0.7 give 7 train / 3 test") {
  GraphBuilder b;
  int t_user = b.add_type("user");
  int t_item = b.add_type("item");
  auto u = b.add_entity(t_user, "u");
  std::vector<int> items;
  for (int i = 0; i < 10; ++i)
    items.push_back(b.add_entity(t_item, "i" + std::to_string(i)).global_id);
  int purchase = b.add_relation("purchase", t_user, t_item);
  for (int ig : items) b.add_triple(u.global_id, purchase, ig);
  Graph g = b.build();
  Split s = make_split(g, 0.7, 5);
  REQUIRE(s.users.count(u.global_id));
  CHECK(s.users[u.global_id].train.size() == 7);
  CHECK(s.users[u.global_id].test.size() == 3);
}

TEST_CASE("make_split: deterministic, disjoint, union preserved, droppers counted") {
  SynthSpec spec;
  spec.users = 25;
  spec.items = 40;
  spec.brands = 4;
  spec.categories = 4;
  spec.features = 10;
  spec.purchases_per_user = 7;
  Graph g = gen_synth(spec, 33);
  Split a = make_split(g, 0.7, 12);
  Split b = make_split(g, 0.7, 12);
  CHECK(a.users.size() == b.users.size());
  for (const auto& [ug, us] : a.users) {
    CHECK(b.users.at(ug).train == us.train);
    CHECK(b.users.at(ug).test == us.test);
    CHECK(!us.train.empty());
    CHECK(!us.test.empty());
    std::set<int> inter;
    std::set_intersection(us.train.begin(), us.train.end(), us.test.begin(),
                          us.test.end(), std::inserter(inter, inter.begin()));
    CHECK(inter.empty());
    // union equals original positives
    std::vector<int> all = us.train;
    all.insert(all.end(), us.test.begin(), us.test.end());
    std::sort(all.begin(), all.end());
    std::vector<int> orig =
        g.neighbors(g.entity_by_global(ug), g.interaction_relation());
    CHECK(all == orig);
  }

  // a user with a single interaction is dropped and counted
  GraphBuilder b2;
  int t_user = b2.add_type("user");
  int t_item = b2.add_type("item");
  auto u = b2.add_entity(t_user, "solo");
  auto i = b2.add_entity(t_item, "only");
  int purchase = b2.add_relation("purchase", t_user, t_item);
  b2.add_triple(u.global_id, purchase, i.global_id);
  Graph g2 = b2.build();
  Split s2 = make_split(g2, 0.7, 1);
  CHECK(s2.users.empty());
  CHECK(s2.dropped_users == 1);
}

TEST_CASE("apply_split removes test interactions and their mirrors") {
  Graph g = testutil::commerce_graph();
  Split s = make_split(g, 0.5, 9);
  Graph train_g = apply_split(g, s);
  int rel = g.interaction_relation();
  int purchase_by = g.find_relation("purchase_by");
  for (const auto& [ug, us] : s.users) {
    EntityRef u = train_g.entity_by_global(ug);
    CHECK(train_g.neighbors(u, rel) == us.train);
    for (int ig : us.test) {
      CHECK(!train_g.has_triple(ug, rel, ig));
      CHECK(!train_g.has_triple(ig, purchase_by, ug));  // no leak via mirror
    }
    for (int ig : us.train) CHECK(train_g.has_triple(ig, purchase_by, ug));
  }
  // non-interaction relations untouched
  CHECK(train_g.entities_of_type(train_g.find_type("feature")) ==
        g.entities_of_type(g.find_type("feature")));
  int described_by = g.find_relation("described_by");
  for (int ig : g.entities_of_type(g.item_type()))
    CHECK(train_g.neighbors(ig, described_by) == g.neighbors(ig, described_by));
}

TEST_CASE("metrics: worked example, one hit at rank 3 with N=10") {
  Split s = one_user_split(0, {101}, {42});
  std::map<int, std::vector<int>> recs;
  recs[0] = {7, 8, 42, 9, 10, 11, 12, 13, 14, 15};
  MetricReport r = compute_metrics(recs, s, 10);
  CHECK(r.ndcg == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.hit_rate == doctest::Approx(1.0));
  CHECK(r.precision == doctest::Approx(0.1));
}

TEST_CASE("metrics: perfect ranking gives NDCG=1, HR=1; empty recs give zeros") {
  Split s = one_user_split(0, {101}, {1, 2, 3});
  std::map<int, std::vector<int>> recs;
  recs[0] = {1, 2, 3, 50, 51};
  MetricReport r = compute_metrics(recs, s, 10);
  CHECK(r.ndcg == doctest::Approx(1.0));
  CHECK(r.hit_rate == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));

  std::map<int, std::vector<int>> empty_recs;
  MetricReport r2 = compute_metrics(empty_recs, s, 10);
  CHECK(r2.ndcg == 0.0);
  CHECK(r2.recall == 0.0);
  CHECK(r2.hit_rate == 0.0);
  CHECK(r2.precision == 0.0);
}

TEST_CASE("metrics: errors on unknown user and train leakage") {
  Split s = one_user_split(0, {101}, {42});
  std::map<int, std::vector<int>> recs;
  recs[99] = {1};
  CHECK_THROWS_WITH_AS(compute_metrics(recs, s, 10),
                       doctest::Contains("absent"), Error);
  std::map<int, std::vector<int>> leak;
  leak[0] = {101};
  CHECK_THROWS_WITH_AS(compute_metrics(leak, s, 10),
                       doctest::Contains("train positive"), Error);
}

TEST_CASE("metrics agree exactly with the direct-formula oracle on 200 random cases") {
  Rng rng(404);
  for (int c = 0; c < 200; ++c) {
    int n_items = 30;
    int n_test = 1 + static_cast<int>(rng.uniform_int(5));
    int top_n = 1 + static_cast<int>(rng.uniform_int(12));
    std::vector<int> items;
    for (int i = 0; i < n_items; ++i) items.push_back(i);
    rng.shuffle(items);
    std::vector<int> test(items.begin(), items.begin() + n_test);
    // ranked list over the remaining pool plus some relevant items
    std::vector<int> pool(items.begin() + n_test, items.end());
    std::vector<int> ranked;
    for (int i = 0; i < 15 && i < static_cast<int>(pool.size()); ++i)
      ranked.push_back(pool[static_cast<size_t>(i)]);
    for (int t : test)
      if (rng.uniform_real() < 0.6)
        ranked.insert(ranked.begin() + static_cast<long>(rng.uniform_int(
                                           ranked.size() + 1)),
                      t);
    Split s = one_user_split(7, {}, test);
    std::map<int, std::vector<int>> recs;
    recs[7] = ranked;
    MetricReport r = compute_metrics(recs, s, top_n);
    OracleMetrics o =
        metric_oracle(ranked, std::set<int>(test.begin(), test.end()), top_n);
    CHECK(r.ndcg == o.ndcg);
    CHECK(r.recall == o.recall);
    CHECK(r.hit_rate == o.hr);
    CHECK(r.precision == o.precision);
    // range and ordering invariants
    CHECK(r.ndcg >= 0.0);
    CHECK(r.ndcg <= 1.0);
    CHECK(r.precision <= r.hit_rate);
    CHECK(r.recall <= r.hit_rate);
  }
}

TEST_CASE("NDCG invariant under permutation of non-relevant tail items") {
  Split s = one_user_split(0, {}, {5});
  std::map<int, std::vector<int>> recs;
  recs[0] = {9, 5, 7, 8, 11};
  double base = compute_metrics(recs, s, 5).ndcg;
  recs[0] = {9, 5, 11, 8, 7};  // permute items below the hit
  CHECK(compute_metrics(recs, s, 5).ndcg == base);
}

TEST_CASE("gen_synth: planted preferences dominate purchases at boost 8") {
  SynthSpec spec;  // defaults: 200 users, 300 items, 10 brands, 12 cats, 8x
  SynthTruth truth;
  Graph g = gen_synth(spec, 8, &truth);
  CHECK(g.entity_count(g.user_type()) == 200);
  CHECK(g.entity_count(g.item_type()) == 300);
  double min_frac = 1.0;
  for (double f : truth.preferred_fraction) min_frac = std::min(min_frac, f);
  CHECK(min_frac >= 0.7);
  // and the graph actually contains those purchases
  int rel = g.interaction_relation();
  for (int ug : g.entities_of_type(g.user_type()))
    CHECK(static_cast<int>(g.neighbors(ug, rel).size()) ==
          spec.purchases_per_user);
}

TEST_CASE("gen_synth: boost 1 gives statistically uniform brand distribution") {
  SynthSpec spec;
  spec.boost = 1.0;
  SynthTruth truth;
  Graph g = gen_synth(spec, 42, &truth);
  int produced_by = g.find_relation("produced_by");
  int rel = g.interaction_relation();
  std::map<int, int> brand_purchases;  // brand global -> count
  std::map<int, int> brand_sizes;
  for (int ig : g.entities_of_type(g.item_type())) {
    const auto& bs = g.neighbors(ig, produced_by);
    REQUIRE(bs.size() == 1);
    ++brand_sizes[bs[0]];
  }
  long long total = 0;
  for (int ug : g.entities_of_type(g.user_type())) {
    for (int ig : g.neighbors(ug, rel)) {
      ++brand_purchases[g.neighbors(ig, produced_by)[0]];
      ++total;
    }
  }
  // chi-square against expectation proportional to brand sizes
  double chi2 = 0.0;
  int n_items = g.entity_count(g.item_type());
  for (const auto& [brand, size] : brand_sizes) {
    double expect = static_cast<double>(total) * size / n_items;
    double obs = brand_purchases.count(brand) ? brand_purchases[brand] : 0.0;
    chi2 += (obs - expect) * (obs - expect) / expect;
  }
  // 9 degrees of freedom, p=0.001 critical value
  CHECK(chi2 < 27.88);
}

TEST_CASE("gen_synth: deterministic under seed, infeasible params rejected") {
  SynthSpec spec;
  spec.users = 10;
  spec.items = 15;
  spec.brands = 3;
  spec.categories = 3;
  spec.features = 8;
  spec.purchases_per_user = 5;
  Graph a = gen_synth(spec, 77);
  Graph b = gen_synth(spec, 77);
  CHECK(a == b);
  SynthSpec bad = spec;
  bad.purchases_per_user = 16;
  CHECK_THROWS_WITH_AS(gen_synth(bad, 1), doctest::Contains("infeasible"),
                       Error);
  SynthSpec zero = spec;
  zero.brands = 0;
  CHECK_THROWS_AS(gen_synth(zero, 1), Error);
}

TEST_CASE("metric table and csv formatting") {
  MetricReport r;
  r.ndcg = 0.125;
  r.recall = 0.5;
  r.hit_rate = 1.0;
  r.precision = 0.05;
  r.top_n = 10;
  std::string table = format_metric_table({{"model", r}});
  CHECK(table.find("model") != std::string::npos);
  CHECK(table.find("12.500") != std::string::npos);  // percentages
  std::string csv = metric_csv({{"model", r}});
  CHECK(csv.find("variant,ndcg,recall,hit_rate,precision,top_n") == 0);
  CHECK(csv.find("model,12.5,50,100,5,10") != std::string::npos);
}
