#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nser/graph.hpp"
#include "nser/metapath.hpp"
#include "nser/param_store.hpp"
#include "nser/tape.hpp"
#include "nser/teacher.hpp"
#include "nser/tensor.hpp"

namespace nser {

struct TrainConfig {
  int dim = 32;
  float lr = 0.01f;
  float momentum = 0.9f;
  int epochs = 50;
  int batch_size = 4;      // (user, metapath) tasks per optimizer step
  float lambda = 10.0f;    // ranking-loss weight
  int paths_per_user = 4;  // positive-path sample limit per (user, metapath)
  int negatives = 4;       // ranking-loss negatives per positive
  NegativePool negative_pool = NegativePool::kPositives;
  bool chain_predecessors = true;  // feed module outputs forward along paths
  int max_metapath_len = 3;
  uint64_t seed = 7;
};

// Entity embeddings plus one two-layer relation module per relation:
//   out = relu(concat(u, e) W1 + b1) W2 + b2, all maps d-dimensional.
class Model {
 public:
  Model(int entity_count, int relation_count, int dim);

  // Embeddings uniform(-1/sqrt(d), 1/sqrt(d)); module weights scaled by
  // fan-in; biases zero. Draw order is fixed for reproducibility.
  static Model init(const Graph& g, int dim, Rng& rng);

  int dim() const { return dim_; }
  int entity_count() const { return entity_count_; }
  int relation_count() const { return relation_count_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  static const char* embedding_param() { return "emb"; }
  static std::string relation_param(int relation_id, const char* field);

  Tensor embedding(int global_id) const;

  // Plain (untracked) forward of the relation module; inference path.
  Tensor relation_forward(int relation_id, const Tensor& u_vec,
                          const Tensor& e_vec) const;

  // Log-probabilities of P(. | u, prev, r) over the tail-type partition.
  // Returns the partition's global ids alongside. The denominator ranges
  // over the whole type partition, not only graph neighbors.
  std::vector<int> step_logprob_vector(const Graph& g, const EntityRef& u,
                                       const Tensor& prev_vec, int relation_id,
                                       Tensor* logprobs_out) const;
  float step_logprob(const Graph& g, const EntityRef& u,
                     const Tensor& prev_vec, int relation_id,
                     const EntityRef& target) const;

  ParamStore checkpoint_store() const { return store_; }
  static Model from_store(const Graph& g, const ParamStore& store);

 private:
  int entity_count_;
  int relation_count_;
  int dim_;
  ParamStore store_;
};

// --- Loss builders (gradients flow into m.params() through t) ---

struct PathLossBuild {
  Tape::NodeId loss = -1;               // scalar mean NLL over paths
  std::vector<Tape::NodeId> leaf_vecs;  // per-path final module output
};

// Mean over `paths` of the negative log likelihood of each step under the
// type-partition softmax. All paths must start at u and share one metapath.
// With chain=true the predecessor fed to step j is the module output of step
// j-1 (the chained prediction); otherwise the observed entity embedding.
PathLossBuild build_path_loss(Tape& t, Model& m, const Graph& g,
                              const EntityRef& u,
                              const std::vector<PathInstance>& paths,
                              bool chain);

// Mean over negatives of sigmoid(<leaf, neg> - <leaf, pos>); 0 when negs is
// empty. neg/pos are entity global ids.
Tape::NodeId build_ranking_loss(Tape& t, Model& m, Tape::NodeId leaf_vec,
                                int pos_global,
                                const std::vector<int>& neg_globals);

struct TotalLossBuild {
  Tape::NodeId total = -1;
  Tape::NodeId path = -1;
  Tape::NodeId rank = -1;  // -1 when lambda == 0
};

// path_loss + lambda * mean-over-paths ranking loss. negs_per_path[p] holds
// the negative items for paths[p]. When lambda == 0 the returned total IS
// the path-loss node, bit for bit.
TotalLossBuild build_total_loss(Tape& t, Model& m, const Graph& g,
                                const EntityRef& u,
                                const std::vector<PathInstance>& paths,
                                float lambda,
                                const std::vector<std::vector<int>>& negs_per_path,
                                bool chain);

// Value-only wrappers over the builders.
float path_loss(Model& m, const Graph& g, const EntityRef& u,
                const std::vector<PathInstance>& paths, bool chain = true);
float ranking_loss(Model& m, const EntityRef& u, const Tensor& leaf_vec,
                   const EntityRef& pos, const std::vector<int>& neg_globals);
float total_loss(Model& m, const Graph& g, const EntityRef& u,
                 const std::vector<PathInstance>& paths, float lambda,
                 const std::vector<std::vector<int>>& negs_per_path,
                 bool chain = true);

// --- Training ---

struct EpochLog {
  int epoch = 0;
  float mean_path_loss = 0.0f;
  float mean_rank_loss = 0.0f;
  int64_t wallclock_ms = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  int degenerate_users = 0;  // users with no positive path for any metapath
};

// Optimizes the combined objective over all (user, metapath) pairs of the
// train graph. Deterministic under cfg.seed. Throws naming the epoch if the
// loss turns non-finite.
TrainResult train(const Graph& g, const TeacherModel& teacher,
                  const TrainConfig& cfg);

void write_train_log(const std::string& path, const std::vector<EpochLog>& log);

}  // namespace nser
