#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "nser/error.hpp"
#include "nser/graph.hpp"
#include "nser/metapath.hpp"
#include "nser/synth.hpp"
#include "test_util.hpp"

using namespace nser;

namespace {

struct TempFiles {
  std::string entities = "kgtest.entities.tsv";
  std::string triples = "kgtest.triples.tsv";
  ~TempFiles() {
    std::filesystem::remove(entities);
    std::filesystem::remove(triples);
  }
  void write(const std::string& ent, const std::string& tri) const {
    std::ofstream(entities) << ent;
    std::ofstream(triples) << tri;
  }
};

}  // namespace

TEST_CASE("ingest: minimal well-formed input") {
  TempFiles files;
  files.write(
      "user\tu1\n"
      "item\ti1\n"
      "item\ti2\n",
      "@relation purchase user item\n"
      "user:u1\tpurchase\titem:i1\n"
      "user:u1\tpurchase\titem:i2\n");
  IngestStats stats;
  Graph g = ingest_triples(files.entities, files.triples, &stats);
  CHECK(g.entity_count() == 3);
  CHECK(g.relation_count() == 1);
  CHECK(g.triple_count() == 2);
  CHECK(stats.entities_per_type[0] == 1);
  CHECK(stats.entities_per_type[1] == 2);
  CHECK(stats.triples_per_relation[0] == 2);
  EntityRef u1 = g.entity(g.find_type("user"), "u1");
  auto tails = g.neighbors(u1, 0);
  CHECK(tails.size() == 2);
  // reverse mirror
  EntityRef i2 = g.entity(g.find_type("item"), "i2");
  auto heads = g.reverse_neighbors(i2.global_id, 0);
  REQUIRE(heads.size() == 1);
  CHECK(heads[0] == u1.global_id);
}

TEST_CASE("ingest: type violation names the line") {
  TempFiles files;
  files.write(
      "user\tu1\n"
      "item\ti1\n"
      "feature\tf1\n",
      "@relation purchase user item\n"
      "user:u1\tpurchase\titem:i1\n"
      "user:u1\tpurchase\tfeature:f1\n");
  CHECK_THROWS_WITH_AS(ingest_triples(files.entities, files.triples),
                       doctest::Contains(":3"), Error);
}

TEST_CASE("ingest: malformed line, unknown relation, unknown entity") {
  TempFiles files;
  files.write("user\tu1\nitem\ti1\n", "not a triple line\n");
  CHECK_THROWS_WITH_AS(ingest_triples(files.entities, files.triples),
                       doctest::Contains(":1"), Error);
  files.write("user\tu1\nitem\ti1\n", "user:u1\tbuys\titem:i1\n");
  CHECK_THROWS_WITH_AS(ingest_triples(files.entities, files.triples),
                       doctest::Contains("undeclared relation"), Error);
  files.write("user\tu1\nitem\ti1\n",
              "@relation purchase user item\n"
              "user:u9\tpurchase\titem:i1\n");
  CHECK_THROWS_WITH_AS(ingest_triples(files.entities, files.triples),
                       doctest::Contains("undeclared entity"), Error);
}

TEST_CASE("ingest: comments and duplicate triples") {
  TempFiles files;
  files.write(
      "# vocabulary\n"
      "user\tu1\n"
      "item\ti1\n",
      "# schema\n"
      "@relation purchase user item\n"
      "user:u1\tpurchase\titem:i1\n"
      "user:u1\tpurchase\titem:i1\n");
  IngestStats stats;
  Graph g = ingest_triples(files.entities, files.triples, &stats);
  CHECK(g.triple_count() == 1);
  CHECK(stats.duplicate_triples == 1);
}

TEST_CASE("emit/ingest round-trip is an identity on the graph value") {
  SynthSpec spec;
  spec.users = 20;
  spec.items = 30;
  spec.brands = 4;
  spec.categories = 5;
  spec.features = 12;
  spec.purchases_per_user = 6;
  Graph g = gen_synth(spec, 2024);
  TempFiles files;
  emit_graph(g, files.entities, files.triples);
  Graph g2 = ingest_triples(files.entities, files.triples);
  CHECK(g == g2);
  // idempotent canonical form
  TempFiles files2;
  files2.entities = "kgtest2.entities.tsv";
  files2.triples = "kgtest2.triples.tsv";
  emit_graph(g2, files2.entities, files2.triples);
  std::ifstream a(files.triples), b2(files2.triples);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b2)), {});
  CHECK(sa == sb);
}

TEST_CASE("neighbors basics") {
  GraphBuilder b;
  int t_user = b.add_type("user");
  int t_item = b.add_type("item");
  auto a = b.add_entity(t_user, "a");
  auto lonely = b.add_entity(t_user, "lonely");
  auto bb = b.add_entity(t_item, "b");
  auto cc = b.add_entity(t_item, "c");
  int r = b.add_relation("purchase", t_user, t_item);
  b.add_triple(a.global_id, r, cc.global_id);
  b.add_triple(a.global_id, r, bb.global_id);
  Graph g = b.build();
  CHECK(g.neighbors(lonely, r).empty());
  auto tails = g.neighbors(a, r);
  REQUIRE(tails.size() == 2);
  CHECK(tails[0] == bb.global_id);  // ascending id order
  CHECK(tails[1] == cc.global_id);
  CHECK_THROWS_AS(g.neighbors(bb, r), Error);  // item used as head
}

TEST_CASE("neighbors agrees with a linear scan over the raw triple list") {
  auto [g, triples] = testutil::random_graph(7);
  Rng rng(123);
  for (int q = 0; q < 1000; ++q) {
    int gid = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(g.entity_count())));
    EntityRef e = g.entity_by_global(gid);
    int rel = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(g.relation_count())));
    if (g.relation(rel).head_type != e.type_id) continue;
    std::set<int> expect;
    for (const testutil::Triple& t : triples)
      if (t.head == gid && t.relation == rel) expect.insert(t.tail);
    const std::vector<int>& got = g.neighbors(e, rel);
    CHECK(std::set<int>(got.begin(), got.end()) == expect);
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("enumerate_metapaths: single-relation schema") {
  GraphBuilder b;
  int t_user = b.add_type("user");
  int t_item = b.add_type("item");
  auto u = b.add_entity(t_user, "u");
  auto i = b.add_entity(t_item, "i");
  int r = b.add_relation("purchase", t_user, t_item);
  b.add_triple(u.global_id, r, i.global_id);
  Graph g = b.build();
  auto mps = enumerate_metapaths(g, 1);
  REQUIRE(mps.size() == 1);
  CHECK(mps[0].relations == std::vector<int>{r});
}

TEST_CASE("enumerate_metapaths: commerce schema at max_len 3") {
  Graph g = testutil::commerce_graph();
  auto mps = enumerate_metapaths(g, 3);
  int purchase = g.find_relation("purchase");
  int purchase_by = g.find_relation("purchase_by");
  int mention = g.find_relation("mention");
  int mentioned_by = g.find_relation("mentioned_by");
  auto contains = [&](const std::vector<int>& rels) {
    for (const Metapath& m : mps)
      if (m.relations == rels) return true;
    return false;
  };
  CHECK(contains({purchase}));
  CHECK(contains({purchase, purchase_by, purchase}));
  CHECK(contains({mention, mentioned_by, purchase}));
  // monotonicity in max_len
  auto mps2 = enumerate_metapaths(g, 2);
  for (const Metapath& m : mps2) {
    bool found = false;
    for (const Metapath& m3 : mps)
      if (m3 == m) found = true;
    CHECK(found);
  }
  for (const Metapath& m : mps)
    if (m.length() <= 2) {
      bool found = false;
      for (const Metapath& m2 : mps2)
        if (m2 == m) found = true;
      CHECK(found);
    }
}

namespace {

// Independent brute force: DFS over the type-level schema graph, then filter
// by exhaustive path enumeration from every user.
void schema_dfs(const Graph& g, int cur_type, int max_len,
                std::vector<int>& prefix, std::vector<Metapath>& out) {
  if (static_cast<int>(prefix.size()) >= max_len) return;
  for (const RelationDef& r : g.relations()) {
    if (r.head_type != cur_type) continue;
    prefix.push_back(r.relation_id);
    if (r.tail_type == g.item_type()) out.push_back(Metapath{prefix});
    schema_dfs(g, r.tail_type, max_len, prefix, out);
    prefix.pop_back();
  }
}

bool exhaustive_realized(const Graph& g, const Metapath& pi) {
  std::vector<int> frontier = g.entities_of_type(g.user_type());
  for (int rel : pi.relations) {
    std::set<int> next;
    for (int h : frontier) {
      EntityRef e = g.entity_by_global(h);
      if (e.type_id != g.relation(rel).head_type) continue;
      for (int t : g.neighbors(e, rel)) next.insert(t);
    }
    frontier.assign(next.begin(), next.end());
    if (frontier.empty()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("enumerate_metapaths equals brute-force schema DFS + realizability") {
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    auto [g, triples] = testutil::random_graph(seed, 4, 5, 3, 0.25);
    (void)triples;
    auto got = enumerate_metapaths(g, 3);
    std::vector<Metapath> expect;
    std::vector<int> prefix;
    schema_dfs(g, g.user_type(), 3, prefix, expect);
    std::sort(expect.begin(), expect.end());
    expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
    std::vector<Metapath> filtered;
    for (const Metapath& m : expect)
      if (exhaustive_realized(g, m)) filtered.push_back(m);
    CHECK(got == filtered);
  }
}

TEST_CASE("sample_positive_paths: user with no purchases") {
  Graph g = testutil::chain_graph();
  EntityRef u2 = g.entity(g.find_type("user"), "u2");
  // u2 purchased i2 but positives set empty -> no path
  Metapath pi{{g.find_relation("purchase")}};
  auto paths = sample_positive_paths(g, u2, pi, {}, 10, 1ull);
  CHECK(paths.empty());
}

TEST_CASE("sample_positive_paths: chain graph has exactly one 3-hop path") {
  Graph g = testutil::chain_graph();
  EntityRef u1 = g.entity(g.find_type("user"), "u1");
  EntityRef i2 = g.entity(g.find_type("item"), "i2");
  Metapath pi{{g.find_relation("purchase"), g.find_relation("purchase_by"),
               g.find_relation("purchase")}};
  auto paths = sample_positive_paths(g, u1, pi, {i2.global_id}, 10, 1ull);
  REQUIRE(paths.size() == 1);
  CHECK(path_valid(g, paths[0]));
  CHECK(path_conforms(paths[0], pi));
  CHECK(paths[0].end().global_id == i2.global_id);
}

TEST_CASE("sample_positive_paths: limit and seeded reproducibility") {
  auto [g, triples] = testutil::random_graph(9, 6, 8, 5, 0.5);
  (void)triples;
  EntityRef u = g.entity_by_global(g.entities_of_type(g.user_type())[0]);
  Metapath pi{{g.find_relation("purchase"), g.find_relation("purchase_by"),
               g.find_relation("purchase")}};
  std::set<int> positives(g.entities_of_type(g.item_type()).begin(),
                          g.entities_of_type(g.item_type()).end());
  auto all = sample_positive_paths(g, u, pi, positives, 100000, 1ull);
  REQUIRE(all.size() > 3);
  auto s1 = sample_positive_paths(g, u, pi, positives, 3, 55ull);
  auto s2 = sample_positive_paths(g, u, pi, positives, 3, 55ull);
  CHECK(s1.size() == 3);
  CHECK(s1 == s2);
  // distinct and valid
  for (size_t i = 0; i < s1.size(); ++i) {
    CHECK(path_valid(g, s1[i]));
    CHECK(path_conforms(s1[i], pi));
    for (size_t j = i + 1; j < s1.size(); ++j) CHECK(!(s1[i] == s1[j]));
  }
}

TEST_CASE("sample_positive_paths rejects non-user start") {
  Graph g = testutil::chain_graph();
  EntityRef i1 = g.entity(g.find_type("item"), "i1");
  Metapath pi{{g.find_relation("purchase")}};
  CHECK_THROWS_AS(sample_positive_paths(g, i1, pi, {}, 5, 0ull), Error);
}
