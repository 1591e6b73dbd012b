#pragma once

#include <cstdint>
#include <vector>

#include "nser/graph.hpp"
#include "nser/param_store.hpp"
#include "nser/rng.hpp"
#include "nser/tensor.hpp"

namespace nser {

// Candidate pool the ranking-loss negatives are drawn from. The literal
// reading of the construction restricts the pool to the user's own positive
// items; all_items is the plausible-typo alternative, kept switchable so the
// ambiguity stays testable.
enum class NegativePool { kPositives, kAllItems };

struct TeacherConfig {
  int dim = 16;
  int epochs = 20;
  float lr = 0.05f;
  int negatives = 4;  // sampled non-interactions per observed pair
};

// Weak user-item scorer h:(u,i) -> (0,1), logistic matrix factorization over
// the train-split interactions. Used only to pick ranking-loss negatives.
// Immutable after training; score/negative_set are reentrant.
class TeacherModel {
 public:
  TeacherModel(int n_users, int n_items, int dim);

  int dim() const { return dim_; }
  Tensor& user_factors() { return user_factors_; }
  Tensor& item_factors() { return item_factors_; }

  // Sigmoid of the factor dot product, by local ids.
  float score_local(int user_local, int item_local) const;
  float score(const Graph& g, const EntityRef& u, const EntityRef& i) const;

  // Up to `cap` candidate items scored strictly below i by the teacher
  // (ties excluded, i itself excluded), seeded-uniform among qualifiers,
  // returned ascending by global id. `candidates` holds item global ids.
  std::vector<int> negative_set(const Graph& g, const EntityRef& u,
                                const EntityRef& i,
                                const std::vector<int>& candidates, size_t cap,
                                Rng& rng) const;

  ParamStore to_store() const;
  static TeacherModel from_store(const ParamStore& store);

 private:
  int dim_;
  Tensor user_factors_;  // [n_users, dim]
  Tensor item_factors_;  // [n_items, dim]
};

// Trains on the interaction relation of g (pass the train-split graph).
// Deterministic under seed; per-epoch mean logistic loss appended to
// epoch_losses when given. Throws on divergence.
TeacherModel train_teacher(const Graph& g, const TeacherConfig& cfg,
                           uint64_t seed,
                           std::vector<float>* epoch_losses = nullptr);

}  // namespace nser
