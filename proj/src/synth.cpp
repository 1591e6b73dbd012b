#include "nser/synth.hpp"

#include <algorithm>
#include <string>

#include "nser/error.hpp"
#include "nser/rng.hpp"

namespace nser {

Graph gen_synth(const SynthSpec& spec, uint64_t seed, SynthTruth* truth) {
  if (spec.users <= 0 || spec.items <= 0 || spec.brands <= 0 ||
      spec.categories <= 0 || spec.features <= 0 ||
      spec.purchases_per_user <= 0 || spec.features_per_item <= 0 ||
      spec.boost <= 0.0)
    throw Error("gen_synth: all parameters must be positive");
  if (spec.purchases_per_user > spec.items)
    throw Error("gen_synth: infeasible params, " +
                std::to_string(spec.purchases_per_user) +
                " purchases per user requested but only " +
                std::to_string(spec.items) + " items exist");
  if (spec.features_per_item > spec.features)
    throw Error("gen_synth: more features per item than features exist");

  Rng rng = substream(seed, "synth");
  GraphBuilder b;
  int t_user = b.add_type("user");
  int t_item = b.add_type("item");
  int t_brand = b.add_type("brand");
  int t_category = b.add_type("category");
  int t_feature = b.add_type("feature");

  std::vector<int> users, items, brands, categories, features;
  for (int i = 0; i < spec.users; ++i)
    users.push_back(b.add_entity(t_user, "user_" + std::to_string(i)).global_id);
  for (int i = 0; i < spec.items; ++i)
    items.push_back(b.add_entity(t_item, "item_" + std::to_string(i)).global_id);
  for (int i = 0; i < spec.brands; ++i)
    brands.push_back(b.add_entity(t_brand, "brand_" + std::to_string(i)).global_id);
  for (int i = 0; i < spec.categories; ++i)
    categories.push_back(
        b.add_entity(t_category, "category_" + std::to_string(i)).global_id);
  for (int i = 0; i < spec.features; ++i)
    features.push_back(
        b.add_entity(t_feature, "feature_" + std::to_string(i)).global_id);

  int r_purchase = b.add_relation("purchase", t_user, t_item);
  int r_purchase_by = b.add_relation("purchase_by", t_item, t_user);
  int r_produced_by = b.add_relation("produced_by", t_item, t_brand);
  int r_produces = b.add_relation("produces", t_brand, t_item);
  int r_belongs_to = b.add_relation("belongs_to", t_item, t_category);
  int r_contains = b.add_relation("contains", t_category, t_item);
  int r_mention = b.add_relation("mention", t_user, t_feature);
  int r_mentioned_by = b.add_relation("mentioned_by", t_feature, t_user);
  int r_described_by = b.add_relation("described_by", t_item, t_feature);
  int r_describes = b.add_relation("describes", t_feature, t_item);

  // Item attributes.
  std::vector<int> item_brand(static_cast<size_t>(spec.items));
  std::vector<int> item_category(static_cast<size_t>(spec.items));
  std::vector<std::vector<int>> item_features(static_cast<size_t>(spec.items));
  std::vector<int> feature_ids(static_cast<size_t>(spec.features));
  for (int i = 0; i < spec.features; ++i) feature_ids[static_cast<size_t>(i)] = i;
  for (int i = 0; i < spec.items; ++i) {
    item_brand[static_cast<size_t>(i)] =
        static_cast<int>(rng.uniform_int(static_cast<uint64_t>(spec.brands)));
    item_category[static_cast<size_t>(i)] = static_cast<int>(
        rng.uniform_int(static_cast<uint64_t>(spec.categories)));
    item_features[static_cast<size_t>(i)] = rng.sample(
        feature_ids, static_cast<size_t>(spec.features_per_item));
    std::sort(item_features[static_cast<size_t>(i)].begin(),
              item_features[static_cast<size_t>(i)].end());
  }
  std::vector<std::vector<int>> brand_items(static_cast<size_t>(spec.brands));
  std::vector<std::vector<int>> category_items(
      static_cast<size_t>(spec.categories));
  for (int i = 0; i < spec.items; ++i) {
    brand_items[static_cast<size_t>(item_brand[static_cast<size_t>(i)])].push_back(i);
    category_items[static_cast<size_t>(item_category[static_cast<size_t>(i)])]
        .push_back(i);
  }
  std::vector<int> nonempty_brands, nonempty_categories;
  for (int v = 0; v < spec.brands; ++v)
    if (!brand_items[static_cast<size_t>(v)].empty()) nonempty_brands.push_back(v);
  for (int v = 0; v < spec.categories; ++v)
    if (!category_items[static_cast<size_t>(v)].empty())
      nonempty_categories.push_back(v);

  if (truth) {
    truth->preferred_brand.assign(static_cast<size_t>(spec.users), -1);
    truth->preferred_category.assign(static_cast<size_t>(spec.users), -1);
    truth->preferred_fraction.assign(static_cast<size_t>(spec.users), 0.0);
  }

  double pool_prob = std::max(0.0, 1.0 - 1.0 / spec.boost);
  std::vector<std::vector<int>> purchases(static_cast<size_t>(spec.users));
  for (int uv = 0; uv < spec.users; ++uv) {
    int pb = nonempty_brands[static_cast<size_t>(
        rng.uniform_int(nonempty_brands.size()))];
    int pc = nonempty_categories[static_cast<size_t>(
        rng.uniform_int(nonempty_categories.size()))];
    std::vector<char> preferred(static_cast<size_t>(spec.items), 0);
    for (int i : brand_items[static_cast<size_t>(pb)]) preferred[static_cast<size_t>(i)] = 1;
    for (int i : category_items[static_cast<size_t>(pc)]) preferred[static_cast<size_t>(i)] = 1;

    std::vector<char> bought(static_cast<size_t>(spec.items), 0);
    int preferred_hits = 0;
    for (int k = 0; k < spec.purchases_per_user; ++k) {
      bool from_pool = rng.uniform_real() < pool_prob;
      int chosen = -1;
      if (from_pool) {
        std::vector<int> avail;
        for (int i = 0; i < spec.items; ++i)
          if (preferred[static_cast<size_t>(i)] && !bought[static_cast<size_t>(i)])
            avail.push_back(i);
        if (!avail.empty())
          chosen = avail[static_cast<size_t>(rng.uniform_int(avail.size()))];
      }
      if (chosen < 0) {
        std::vector<int> avail;
        for (int i = 0; i < spec.items; ++i)
          if (!bought[static_cast<size_t>(i)]) avail.push_back(i);
        chosen = avail[static_cast<size_t>(rng.uniform_int(avail.size()))];
      }
      bought[static_cast<size_t>(chosen)] = 1;
      purchases[static_cast<size_t>(uv)].push_back(chosen);
      if (preferred[static_cast<size_t>(chosen)]) ++preferred_hits;
    }
    if (truth) {
      truth->preferred_brand[static_cast<size_t>(uv)] = pb;
      truth->preferred_category[static_cast<size_t>(uv)] = pc;
      truth->preferred_fraction[static_cast<size_t>(uv)] =
          static_cast<double>(preferred_hits) / spec.purchases_per_user;
    }
  }

  for (int uv = 0; uv < spec.users; ++uv) {
    for (int iv : purchases[static_cast<size_t>(uv)]) {
      b.add_triple(users[static_cast<size_t>(uv)], r_purchase,
                   items[static_cast<size_t>(iv)]);
      b.add_triple(items[static_cast<size_t>(iv)], r_purchase_by,
                   users[static_cast<size_t>(uv)]);
    }
  }
  for (int iv = 0; iv < spec.items; ++iv) {
    b.add_triple(items[static_cast<size_t>(iv)], r_produced_by,
                 brands[static_cast<size_t>(item_brand[static_cast<size_t>(iv)])]);
    b.add_triple(brands[static_cast<size_t>(item_brand[static_cast<size_t>(iv)])],
                 r_produces, items[static_cast<size_t>(iv)]);
    b.add_triple(
        items[static_cast<size_t>(iv)], r_belongs_to,
        categories[static_cast<size_t>(item_category[static_cast<size_t>(iv)])]);
    b.add_triple(
        categories[static_cast<size_t>(item_category[static_cast<size_t>(iv)])],
        r_contains, items[static_cast<size_t>(iv)]);
    for (int fv : item_features[static_cast<size_t>(iv)]) {
      b.add_triple(items[static_cast<size_t>(iv)], r_described_by,
                   features[static_cast<size_t>(fv)]);
      b.add_triple(features[static_cast<size_t>(fv)], r_describes,
                   items[static_cast<size_t>(iv)]);
    }
  }
  for (int uv = 0; uv < spec.users; ++uv) {
    for (int iv : purchases[static_cast<size_t>(uv)]) {
      for (int fv : item_features[static_cast<size_t>(iv)]) {
        if (rng.uniform_real() < spec.mention_prob) {
          b.add_triple(users[static_cast<size_t>(uv)], r_mention,
                       features[static_cast<size_t>(fv)]);
          b.add_triple(features[static_cast<size_t>(fv)], r_mentioned_by,
                       users[static_cast<size_t>(uv)]);
        }
      }
    }
  }
  return b.build();
}

}  // namespace nser
