#include "nser/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "nser/error.hpp"

namespace nser {

Model::Model(int entity_count, int relation_count, int dim)
    : entity_count_(entity_count), relation_count_(relation_count), dim_(dim) {
  if (dim < 2) throw Error("Model: dim must be >= 2");
  store_.add(embedding_param(), Tensor::zeros({entity_count, dim}));
  for (int r = 0; r < relation_count; ++r) {
    store_.add(relation_param(r, "W1"), Tensor::zeros({2 * dim, dim}));
    store_.add(relation_param(r, "b1"), Tensor::zeros({dim}));
    store_.add(relation_param(r, "W2"), Tensor::zeros({dim, dim}));
    store_.add(relation_param(r, "b2"), Tensor::zeros({dim}));
  }
}

std::string Model::relation_param(int relation_id, const char* field) {
  return "rel" + std::to_string(relation_id) + "." + field;
}

Model Model::init(const Graph& g, int dim, Rng& rng) {
  Model m(g.entity_count(), g.relation_count(), dim);
  float emb_bound = 1.0f / std::sqrt(static_cast<float>(dim));
  for (float& v : m.store_.value(embedding_param()).data)
    v = static_cast<float>(rng.uniform_real(-emb_bound, emb_bound));
  float w1_bound = 1.0f / std::sqrt(static_cast<float>(2 * dim));
  float w2_bound = emb_bound;
  for (int r = 0; r < g.relation_count(); ++r) {
    for (float& v : m.store_.value(relation_param(r, "W1")).data)
      v = static_cast<float>(rng.uniform_real(-w1_bound, w1_bound));
    for (float& v : m.store_.value(relation_param(r, "W2")).data)
      v = static_cast<float>(rng.uniform_real(-w2_bound, w2_bound));
  }
  return m;
}

Tensor Model::embedding(int global_id) const {
  if (global_id < 0 || global_id >= entity_count_)
    throw Error("embedding: entity id out of range");
  const Tensor& table = store_.value(embedding_param());
  Tensor out = Tensor::zeros({dim_});
  const float* src = &table.data[static_cast<size_t>(global_id) * dim_];
  std::copy(src, src + dim_, out.data.begin());
  return out;
}

Tensor Model::relation_forward(int relation_id, const Tensor& u_vec,
                               const Tensor& e_vec) const {
  if (relation_id < 0 || relation_id >= relation_count_)
    throw Error("relation_forward: unknown relation id " +
                std::to_string(relation_id));
  if (static_cast<int>(u_vec.size()) != dim_ ||
      static_cast<int>(e_vec.size()) != dim_)
    throw Error("relation_forward: input vectors must have dimension " +
                std::to_string(dim_));
  Tensor x = Tensor::zeros({1, 2 * dim_});
  std::copy(u_vec.data.begin(), u_vec.data.end(), x.data.begin());
  std::copy(e_vec.data.begin(), e_vec.data.end(), x.data.begin() + dim_);
  Tensor h = relu(affine_forward(x, store_.value(relation_param(relation_id, "W1")),
                                 store_.value(relation_param(relation_id, "b1"))));
  Tensor y = affine_forward(h, store_.value(relation_param(relation_id, "W2")),
                            store_.value(relation_param(relation_id, "b2")));
  return Tensor({dim_}, std::move(y.data));
}

std::vector<int> Model::step_logprob_vector(const Graph& g, const EntityRef& u,
                                            const Tensor& prev_vec,
                                            int relation_id,
                                            Tensor* logprobs_out) const {
  const RelationDef& rel = g.relation(relation_id);
  Tensor pred = relation_forward(relation_id, embedding(u.global_id), prev_vec);
  const std::vector<int>& partition = g.entities_of_type(rel.tail_type);
  const Tensor& table = store_.value(embedding_param());
  Tensor logits = Tensor::zeros({static_cast<int>(partition.size())});
  for (size_t i = 0; i < partition.size(); ++i) {
    const float* row = &table.data[static_cast<size_t>(partition[i]) * dim_];
    float s = 0.0f;
    for (int j = 0; j < dim_; ++j) s += row[j] * pred.data[static_cast<size_t>(j)];
    logits.data[i] = s;
  }
  *logprobs_out = softmax_logprobs(logits);
  return partition;
}

float Model::step_logprob(const Graph& g, const EntityRef& u,
                          const Tensor& prev_vec, int relation_id,
                          const EntityRef& target) const {
  const RelationDef& rel = g.relation(relation_id);
  if (target.type_id != rel.tail_type)
    throw Error("step_logprob: target type " + g.type_name(target.type_id) +
                " does not match tail type of relation " + rel.name);
  Tensor logprobs;
  std::vector<int> partition = step_logprob_vector(g, u, prev_vec, relation_id,
                                                   &logprobs);
  auto it = std::lower_bound(partition.begin(), partition.end(),
                             target.global_id);
  if (it == partition.end() || *it != target.global_id)
    throw Error("step_logprob: target not in type partition");
  return logprobs.data[static_cast<size_t>(it - partition.begin())];
}

Model Model::from_store(const Graph& g, const ParamStore& store) {
  const Tensor& emb = store.value(embedding_param());
  if (emb.rank() != 2 || emb.dim(0) != g.entity_count())
    throw Error("model checkpoint does not match graph: embedding table is " +
                emb.shape_str() + " but graph has " +
                std::to_string(g.entity_count()) + " entities");
  Model m(g.entity_count(), g.relation_count(), emb.dim(1));
  for (auto& e : m.store_.entries()) {
    const Tensor& src = store.value(e.name);
    if (!src.same_shape(e.value))
      throw Error("model checkpoint: parameter " + e.name + " has shape " +
                  src.shape_str() + ", expected " + e.value.shape_str());
    e.value = src;
  }
  return m;
}

namespace {

// Tape forward of the relation module; mirrors Model::relation_forward.
Tape::NodeId module_tape(Tape& t, int relation_id, Tape::NodeId u,
                         Tape::NodeId prev) {
  Tape::NodeId x = t.concat(u, prev);
  Tape::NodeId h =
      t.relu(t.affine_vec(x, t.param(Model::relation_param(relation_id, "W1")),
                          t.param(Model::relation_param(relation_id, "b1"))));
  return t.affine_vec(h, t.param(Model::relation_param(relation_id, "W2")),
                      t.param(Model::relation_param(relation_id, "b2")));
}

int partition_index(const std::vector<int>& partition, int global_id) {
  auto it = std::lower_bound(partition.begin(), partition.end(), global_id);
  if (it == partition.end() || *it != global_id)
    throw Error("path target not in its type partition");
  return static_cast<int>(it - partition.begin());
}

}  // namespace

PathLossBuild build_path_loss(Tape& t, Model& m, const Graph& g,
                              const EntityRef& u,
                              const std::vector<PathInstance>& paths,
                              bool chain) {
  if (paths.empty()) throw Error("path_loss: empty path list");
  if (paths.front().steps.empty()) throw Error("path_loss: zero-length path");
  if (m.entity_count() != g.entity_count())
    throw Error("path_loss: model and graph entity counts differ");
  std::vector<int> rels;
  for (const PathStep& s : paths.front().steps) rels.push_back(s.relation_id);
  for (const PathInstance& p : paths) {
    if (!(p.user == u)) throw Error("path_loss: path does not start at u");
    if (p.steps.size() != rels.size())
      throw Error("path_loss: paths do not share one metapath");
    for (size_t j = 0; j < rels.size(); ++j)
      if (p.steps[j].relation_id != rels[j])
        throw Error("path_loss: paths do not share one metapath");
  }

  PathLossBuild out;
  Tape::NodeId u_node = t.param_row(Model::embedding_param(), u.global_id);
  std::vector<Tape::NodeId> nlls;

  if (chain) {
    // Chained predecessors: the module outputs (and so the per-step softmax
    // distributions) are shared by every path of this (u, metapath) pair.
    std::vector<Tape::NodeId> logprob_nodes;
    std::vector<const std::vector<int>*> partitions;
    Tape::NodeId prev = u_node;
    for (size_t j = 0; j < rels.size(); ++j) {
      Tape::NodeId pred = module_tape(t, rels[j], u_node, prev);
      const RelationDef& rel = g.relation(rels[j]);
      const std::vector<int>& partition = g.entities_of_type(rel.tail_type);
      Tape::NodeId scores =
          t.rows_scores(Model::embedding_param(), partition, pred);
      logprob_nodes.push_back(t.softmax_logprobs(scores));
      partitions.push_back(&partition);
      prev = pred;
    }
    for (const PathInstance& p : paths) {
      std::vector<Tape::NodeId> picks;
      for (size_t j = 0; j < rels.size(); ++j)
        picks.push_back(t.pick(logprob_nodes[j],
                               partition_index(*partitions[j],
                                               p.steps[j].entity.global_id)));
      nlls.push_back(t.scale(t.sum(picks), -1.0f));
      out.leaf_vecs.push_back(prev);
    }
  } else {
    // Teacher forcing: each step conditions on the observed entity.
    for (const PathInstance& p : paths) {
      std::vector<Tape::NodeId> picks;
      Tape::NodeId prev = u_node;
      Tape::NodeId pred = -1;
      for (size_t j = 0; j < rels.size(); ++j) {
        pred = module_tape(t, rels[j], u_node, prev);
        const RelationDef& rel = g.relation(rels[j]);
        const std::vector<int>& partition = g.entities_of_type(rel.tail_type);
        Tape::NodeId scores =
            t.rows_scores(Model::embedding_param(), partition, pred);
        picks.push_back(t.pick(t.softmax_logprobs(scores),
                               partition_index(partition,
                                               p.steps[j].entity.global_id)));
        prev = t.param_row(Model::embedding_param(), p.steps[j].entity.global_id);
      }
      nlls.push_back(t.scale(t.sum(picks), -1.0f));
      out.leaf_vecs.push_back(pred);
    }
  }

  out.loss = t.scale(t.sum(nlls), 1.0f / static_cast<float>(nlls.size()));
  return out;
}

Tape::NodeId build_ranking_loss(Tape& t, Model& m, Tape::NodeId leaf_vec,
                                int pos_global,
                                const std::vector<int>& neg_globals) {
  (void)m;
  if (neg_globals.empty()) return t.constant(Tensor({1}, {0.0f}));
  Tape::NodeId pos_row = t.param_row(Model::embedding_param(), pos_global);
  Tape::NodeId pos_score = t.dot(leaf_vec, pos_row);
  std::vector<Tape::NodeId> terms;
  for (int neg : neg_globals) {
    Tape::NodeId neg_row = t.param_row(Model::embedding_param(), neg);
    terms.push_back(t.sigmoid(t.sub(t.dot(leaf_vec, neg_row), pos_score)));
  }
  return t.scale(t.sum(terms), 1.0f / static_cast<float>(terms.size()));
}

TotalLossBuild build_total_loss(Tape& t, Model& m, const Graph& g,
                                const EntityRef& u,
                                const std::vector<PathInstance>& paths,
                                float lambda,
                                const std::vector<std::vector<int>>& negs_per_path,
                                bool chain) {
  TotalLossBuild out;
  PathLossBuild pl = build_path_loss(t, m, g, u, paths, chain);
  out.path = pl.loss;
  if (lambda == 0.0f) {
    out.total = pl.loss;
    return out;
  }
  if (negs_per_path.size() != paths.size())
    throw Error("total_loss: negs_per_path size mismatch");
  std::vector<Tape::NodeId> per_path;
  for (size_t p = 0; p < paths.size(); ++p)
    per_path.push_back(build_ranking_loss(t, m, pl.leaf_vecs[p],
                                          paths[p].end().global_id,
                                          negs_per_path[p]));
  out.rank = t.scale(t.sum(per_path), 1.0f / static_cast<float>(per_path.size()));
  out.total = t.add(out.path, t.scale(out.rank, lambda));
  return out;
}

float path_loss(Model& m, const Graph& g, const EntityRef& u,
                const std::vector<PathInstance>& paths, bool chain) {
  Tape t(&m.params());
  return t.scalar(build_path_loss(t, m, g, u, paths, chain).loss);
}

float ranking_loss(Model& m, const EntityRef& u, const Tensor& leaf_vec,
                   const EntityRef& pos, const std::vector<int>& neg_globals) {
  (void)u;
  Tape t(&m.params());
  Tape::NodeId leaf = t.constant(leaf_vec);
  return t.scalar(build_ranking_loss(t, m, leaf, pos.global_id, neg_globals));
}

float total_loss(Model& m, const Graph& g, const EntityRef& u,
                 const std::vector<PathInstance>& paths, float lambda,
                 const std::vector<std::vector<int>>& negs_per_path,
                 bool chain) {
  Tape t(&m.params());
  return t.scalar(
      build_total_loss(t, m, g, u, paths, lambda, negs_per_path, chain).total);
}

TrainResult train(const Graph& g, const TeacherModel& teacher,
                  const TrainConfig& cfg) {
  Rng init_rng = substream(cfg.seed, "init");
  TrainResult result{Model::init(g, cfg.dim, init_rng), {}, 0};
  Model& m = result.model;
  if (cfg.epochs == 0) return result;

  Rng rng = substream(cfg.seed, "sample");
  std::vector<Metapath> metapaths = enumerate_metapaths(g, cfg.max_metapath_len);
  int rel_ui = g.interaction_relation();
  std::vector<int> users = g.entities_of_type(g.user_type());
  const std::vector<int>& all_items = g.entities_of_type(g.item_type());

  auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = users;
    rng.shuffle(order);
    double path_sum = 0.0, rank_sum = 0.0;
    size_t task_count = 0, rank_count = 0;
    int pending = 0;
    int degenerate = 0;
    for (int ug : order) {
      EntityRef u = g.entity_by_global(ug);
      const std::vector<int>& positives = g.neighbors(u, rel_ui);
      bool had_path = false;
      if (!positives.empty()) {
        std::set<int> pos_set(positives.begin(), positives.end());
        for (const Metapath& pi : metapaths) {
          std::vector<PathInstance> paths = sample_positive_paths(
              g, u, pi, pos_set, static_cast<size_t>(cfg.paths_per_user), rng);
          if (paths.empty()) continue;
          had_path = true;
          std::vector<std::vector<int>> negs;
          if (cfg.lambda != 0.0f) {
            const std::vector<int>& pool =
                cfg.negative_pool == NegativePool::kAllItems ? all_items
                                                             : positives;
            for (const PathInstance& p : paths)
              negs.push_back(teacher.negative_set(
                  g, u, p.end(), pool, static_cast<size_t>(cfg.negatives), rng));
          } else {
            negs.resize(paths.size());
          }
          Tape t(&m.params());
          TotalLossBuild build;
          try {
            build = build_total_loss(t, m, g, u, paths, cfg.lambda, negs,
                                     cfg.chain_predecessors);
          } catch (const Error& e) {
            throw Error("train: diverged at epoch " + std::to_string(epoch) +
                        " (" + e.what() + ")");
          }
          float total_val = t.scalar(build.total);
          if (!std::isfinite(total_val))
            throw Error("train: loss diverged at epoch " +
                        std::to_string(epoch));
          path_sum += t.scalar(build.path);
          ++task_count;
          if (build.rank >= 0) {
            rank_sum += t.scalar(build.rank);
            ++rank_count;
          }
          Tape::NodeId step_loss =
              t.scale(build.total, 1.0f / static_cast<float>(cfg.batch_size));
          t.backward(step_loss);
          if (++pending == cfg.batch_size) {
            m.params().sgd_step(cfg.lr, cfg.momentum);
            pending = 0;
          }
        }
      }
      if (!had_path) ++degenerate;
    }
    if (pending > 0) m.params().sgd_step(cfg.lr, cfg.momentum);
    if (epoch == 0) result.degenerate_users = degenerate;

    EpochLog log;
    log.epoch = epoch;
    log.mean_path_loss =
        task_count ? static_cast<float>(path_sum / task_count) : 0.0f;
    log.mean_rank_loss =
        rank_count ? static_cast<float>(rank_sum / rank_count) : 0.0f;
    log.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    if (!std::isfinite(log.mean_path_loss) ||
        !std::isfinite(log.mean_rank_loss))
      throw Error("train: loss diverged at epoch " + std::to_string(epoch));
    result.log.push_back(log);
  }
  return result;
}

void write_train_log(const std::string& path,
                     const std::vector<EpochLog>& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << "epoch,mean_path_loss,mean_rank_loss,wallclock_ms\n";
  for (const EpochLog& e : log)
    f << e.epoch << "," << e.mean_path_loss << "," << e.mean_rank_loss << ","
      << e.wallclock_ms << "\n";
}

}  // namespace nser
