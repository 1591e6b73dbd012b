#pragma once

#include <cstdint>
#include <vector>

#include "nser/graph.hpp"

namespace nser {

// Planted-preference synthetic graph: each user has a latent preferred brand
// and category; purchases are drawn from the preferred item pool with
// probability 1 - 1/boost per draw (boost = 1 is uniform over all items).
// Attribute and mention relations are emitted in both directions.
struct SynthSpec {
  int users = 200;
  int items = 300;
  int brands = 10;
  int categories = 12;
  int features = 100;
  int purchases_per_user = 25;
  int features_per_item = 3;
  double boost = 8.0;
  double mention_prob = 0.5;
};

// Ground truth returned for diagnostics and generator self-audits.
struct SynthTruth {
  std::vector<int> preferred_brand;        // per user local id
  std::vector<int> preferred_category;     // per user local id
  std::vector<double> preferred_fraction;  // share of purchases in the pool
};

Graph gen_synth(const SynthSpec& spec, uint64_t seed,
                SynthTruth* truth = nullptr);

}  // namespace nser
