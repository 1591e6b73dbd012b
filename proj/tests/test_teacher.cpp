#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "nser/error.hpp"
#include "nser/synth.hpp"
#include "nser/teacher.hpp"
#include "test_util.hpp"

using namespace nser;

TEST_CASE("teacher: zero factors score exactly 0.5") {
  TeacherModel t(3, 4, 8);
  CHECK(t.score_local(0, 0) == 0.5f);
  CHECK(t.score_local(2, 3) == 0.5f);
}

TEST_CASE("teacher: unit factors score sigmoid(2)") {
  TeacherModel t(1, 1, 2);
  t.user_factors().data = {1.0f, 1.0f};
  t.item_factors().data = {1.0f, 1.0f};
  CHECK(t.score_local(0, 0) == doctest::Approx(0.880797f).epsilon(1e-5));
}

TEST_CASE("teacher: score symmetric under exchanging factor values") {
  TeacherModel t(1, 1, 3);
  t.user_factors().data = {0.5f, -1.0f, 2.0f};
  t.item_factors().data = {1.5f, 0.25f, -0.75f};
  float a = t.score_local(0, 0);
  std::swap(t.user_factors().data, t.item_factors().data);
  CHECK(t.score_local(0, 0) == a);
}

TEST_CASE("teacher: untrained model scores 0.5 everywhere") {
  Graph g = testutil::commerce_graph();
  TeacherConfig cfg;
  cfg.epochs = 0;
  TeacherModel t = train_teacher(g, cfg, 42);
  for (int ug : g.entities_of_type(g.user_type()))
    for (int ig : g.entities_of_type(g.item_type()))
      CHECK(std::abs(t.score(g, g.entity_by_global(ug),
                             g.entity_by_global(ig)) -
                     0.5f) < 1e-6f);
}

TEST_CASE("teacher: trained model separates observed from non-observed pairs") {
  SynthSpec spec;
  spec.users = 40;
  spec.items = 50;
  spec.brands = 5;
  spec.categories = 5;
  spec.features = 20;
  spec.purchases_per_user = 10;
  Graph g = gen_synth(spec, 7);
  std::vector<float> losses;
  TeacherConfig cfg;
  TeacherModel t = train_teacher(g, cfg, 7, &losses);
  REQUIRE(losses.size() == static_cast<size_t>(cfg.epochs));
  CHECK(losses.back() < losses.front());

  int rel = g.interaction_relation();
  double obs_sum = 0.0, non_sum = 0.0;
  int obs_n = 0, non_n = 0;
  Rng rng(8);
  for (int ug : g.entities_of_type(g.user_type())) {
    EntityRef u = g.entity_by_global(ug);
    std::set<int> seen;
    for (int ig : g.neighbors(u, rel)) {
      obs_sum += t.score(g, u, g.entity_by_global(ig));
      ++obs_n;
      seen.insert(ig);
    }
    const auto& items = g.entities_of_type(g.item_type());
    for (int k = 0; k < 10; ++k) {
      int ig = items[static_cast<size_t>(rng.uniform_int(items.size()))];
      if (seen.count(ig)) continue;
      non_sum += t.score(g, u, g.entity_by_global(ig));
      ++non_n;
    }
  }
  CHECK(obs_sum / obs_n > non_sum / non_n);
}

TEST_CASE("teacher: training is deterministic under the seed") {
  Graph g = testutil::commerce_graph();
  TeacherConfig cfg;
  cfg.epochs = 6;
  TeacherModel a = train_teacher(g, cfg, 99);
  TeacherModel b = train_teacher(g, cfg, 99);
  CHECK(a.user_factors().data == b.user_factors().data);
  CHECK(a.item_factors().data == b.item_factors().data);
}

TEST_CASE("negative_set: filters strictly below the positive, excludes i and ties") {
  Graph g = testutil::commerce_graph();
  TeacherModel t(g.entity_count(g.user_type()), g.entity_count(g.item_type()),
                 2);
  // scores: i0 ~ high, i1 ~ mid, i2 ~ low, i3 == i0 (tie)
  t.user_factors().data.assign(t.user_factors().size(), 0.0f);
  t.user_factors().data[0] = 1.0f;  // u0 factor = [1, 0]
  auto set_item = [&](int local, float v) {
    t.item_factors().data[static_cast<size_t>(local) * 2] = v;
  };
  set_item(0, 2.0f);
  set_item(1, -0.4f);
  set_item(2, -1.5f);
  set_item(3, 2.0f);
  EntityRef u = g.entity(g.user_type(), "u0");
  EntityRef i0 = g.entity(g.item_type(), "i0");
  std::vector<int> candidates = g.entities_of_type(g.item_type());
  Rng rng(1);
  std::vector<int> negs = t.negative_set(g, u, i0, candidates, 10, rng);
  EntityRef i1 = g.entity(g.item_type(), "i1");
  EntityRef i2 = g.entity(g.item_type(), "i2");
  CHECK(negs == std::vector<int>{i1.global_id, i2.global_id});
}

TEST_CASE("negative_set: lowest-scored positive yields empty set; cap honored") {
  Graph g = testutil::commerce_graph();
  TeacherModel t(g.entity_count(g.user_type()), g.entity_count(g.item_type()),
                 2);
  t.user_factors().data[0] = 1.0f;
  for (int local = 0; local < 4; ++local)
    t.item_factors().data[static_cast<size_t>(local) * 2] =
        static_cast<float>(local);  // i0 lowest
  EntityRef u = g.entity(g.user_type(), "u0");
  EntityRef i0 = g.entity(g.item_type(), "i0");
  EntityRef i3 = g.entity(g.item_type(), "i3");
  std::vector<int> candidates = g.entities_of_type(g.item_type());
  Rng rng(1);
  CHECK(t.negative_set(g, u, i0, candidates, 10, rng).empty());
  CHECK(t.negative_set(g, u, i3, candidates, 0, rng).empty());
  std::vector<int> capped = t.negative_set(g, u, i3, candidates, 2, rng);
  CHECK(capped.size() == 2);
}

TEST_CASE("negative_set: every member strictly teacher-dominated, i never returned") {
  SynthSpec spec;
  spec.users = 15;
  spec.items = 25;
  spec.brands = 3;
  spec.categories = 3;
  spec.features = 10;
  spec.purchases_per_user = 6;
  Graph g = gen_synth(spec, 11);
  TeacherConfig cfg;
  cfg.epochs = 8;
  TeacherModel t = train_teacher(g, cfg, 11);
  Rng rng(5);
  const auto& items = g.entities_of_type(g.item_type());
  for (int ug : g.entities_of_type(g.user_type())) {
    EntityRef u = g.entity_by_global(ug);
    for (int k = 0; k < 4; ++k) {
      EntityRef i = g.entity_by_global(
          items[static_cast<size_t>(rng.uniform_int(items.size()))]);
      std::vector<int> negs = t.negative_set(g, u, i, items, 6, rng);
      float pos = t.score(g, u, i);
      for (int neg : negs) {
        CHECK(neg != i.global_id);
        CHECK(t.score(g, u, g.entity_by_global(neg)) < pos);
      }
    }
  }
}

TEST_CASE("teacher checkpoint store round-trip") {
  TeacherModel t(3, 4, 2);
  t.user_factors().data[0] = 0.25f;
  t.item_factors().data[5] = -0.5f;
  TeacherModel t2 = TeacherModel::from_store(t.to_store());
  CHECK(t2.dim() == 2);
  CHECK(t2.user_factors().data == t.user_factors().data);
  CHECK(t2.item_factors().data == t.item_factors().data);
}
