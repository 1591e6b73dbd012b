#include "nser/teacher.hpp"

#include <algorithm>
#include <cmath>

#include "nser/error.hpp"

namespace nser {

namespace {

// Double-precision sigmoid clamped away from {0,1} so scores stay in the
// open interval even for extreme dots.
float unit_sigmoid(double x) {
  double s = 1.0 / (1.0 + std::exp(-x));
  s = std::min(1.0 - 1e-12, std::max(1e-12, s));
  return static_cast<float>(s);
}

}  // namespace

TeacherModel::TeacherModel(int n_users, int n_items, int dim)
    : dim_(dim),
      user_factors_(Tensor::zeros({n_users, dim})),
      item_factors_(Tensor::zeros({n_items, dim})) {}

float TeacherModel::score_local(int user_local, int item_local) const {
  if (user_local < 0 || user_local >= user_factors_.dim(0))
    throw Error("teacher score: unknown user id");
  if (item_local < 0 || item_local >= item_factors_.dim(0))
    throw Error("teacher score: unknown item id");
  const float* p = &user_factors_.data[static_cast<size_t>(user_local) * dim_];
  const float* q = &item_factors_.data[static_cast<size_t>(item_local) * dim_];
  double d = 0.0;
  for (int k = 0; k < dim_; ++k) d += static_cast<double>(p[k]) * q[k];
  return unit_sigmoid(d);
}

float TeacherModel::score(const Graph& g, const EntityRef& u,
                          const EntityRef& i) const {
  if (u.type_id != g.user_type()) throw Error("teacher score: not a user");
  if (i.type_id != g.item_type()) throw Error("teacher score: not an item");
  return score_local(u.local_id, i.local_id);
}

std::vector<int> TeacherModel::negative_set(const Graph& g, const EntityRef& u,
                                            const EntityRef& i,
                                            const std::vector<int>& candidates,
                                            size_t cap, Rng& rng) const {
  if (cap == 0) return {};
  float pos_score = score(g, u, i);
  std::vector<int> qualifiers;
  for (int cand : candidates) {
    if (cand == i.global_id) continue;
    EntityRef c = g.entity_by_global(cand);
    if (score(g, u, c) < pos_score) qualifiers.push_back(cand);
  }
  std::sort(qualifiers.begin(), qualifiers.end());
  qualifiers.erase(std::unique(qualifiers.begin(), qualifiers.end()),
                   qualifiers.end());
  if (qualifiers.size() > cap) qualifiers = rng.sample(qualifiers, cap);
  std::sort(qualifiers.begin(), qualifiers.end());
  return qualifiers;
}

ParamStore TeacherModel::to_store() const {
  ParamStore store;
  store.add("user_factors", user_factors_);
  store.add("item_factors", item_factors_);
  return store;
}

TeacherModel TeacherModel::from_store(const ParamStore& store) {
  const Tensor& uf = store.value("user_factors");
  const Tensor& itf = store.value("item_factors");
  if (uf.rank() != 2 || itf.rank() != 2 || uf.dim(1) != itf.dim(1))
    throw Error("teacher checkpoint: malformed factor shapes");
  TeacherModel t(uf.dim(0), itf.dim(0), uf.dim(1));
  t.user_factors_ = uf;
  t.item_factors_ = itf;
  return t;
}

TeacherModel train_teacher(const Graph& g, const TeacherConfig& cfg,
                           uint64_t seed, std::vector<float>* epoch_losses) {
  int rel = g.interaction_relation();
  int n_users = g.entity_count(g.user_type());
  int n_items = g.entity_count(g.item_type());
  TeacherModel t(n_users, n_items, cfg.dim);

  // User factors start at zero so the untrained score is exactly 0.5; item
  // factors get small seeded noise to break the symmetry that would
  // otherwise pin every gradient at zero.
  Rng init = substream(seed, "teacher-init");
  float scale = 0.1f / std::sqrt(static_cast<float>(cfg.dim));
  for (float& v : t.item_factors().data)
    v = static_cast<float>(init.uniform_real(-scale, scale));

  struct Pair {
    int u_local, i_local;
  };
  std::vector<Pair> pairs;
  std::vector<std::vector<char>> interacted(
      static_cast<size_t>(n_users), std::vector<char>(static_cast<size_t>(n_items), 0));
  for (int ug : g.entities_of_type(g.user_type())) {
    EntityRef u = g.entity_by_global(ug);
    for (int ig : g.neighbors(u, rel)) {
      EntityRef i = g.entity_by_global(ig);
      pairs.push_back({u.local_id, i.local_id});
      interacted[static_cast<size_t>(u.local_id)][static_cast<size_t>(i.local_id)] = 1;
    }
  }

  Rng rng = substream(seed, "teacher-sgd");
  Tensor& P = t.user_factors();
  Tensor& Q = t.item_factors();
  int d = cfg.dim;

  auto update = [&](int ul, int il, float label) -> double {
    float* p = &P.data[static_cast<size_t>(ul) * d];
    float* q = &Q.data[static_cast<size_t>(il) * d];
    double dotpq = 0.0;
    for (int k = 0; k < d; ++k) dotpq += static_cast<double>(p[k]) * q[k];
    double s = 1.0 / (1.0 + std::exp(-dotpq));
    double err = label - s;
    for (int k = 0; k < d; ++k) {
      float pk = p[k];
      p[k] += cfg.lr * static_cast<float>(err) * q[k];
      q[k] += cfg.lr * static_cast<float>(err) * pk;
    }
    double eps = 1e-12;
    return label > 0.5f ? -std::log(std::max(s, eps))
                        : -std::log(std::max(1.0 - s, eps));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(pairs.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t k : order) {
      const Pair& pr = pairs[k];
      loss_sum += update(pr.u_local, pr.i_local, 1.0f);
      ++loss_count;
      const auto& seen = interacted[static_cast<size_t>(pr.u_local)];
      for (int neg = 0; neg < cfg.negatives; ++neg) {
        int cand = -1;
        for (int attempt = 0; attempt < 16; ++attempt) {
          int c = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_items)));
          if (!seen[static_cast<size_t>(c)]) {
            cand = c;
            break;
          }
        }
        if (cand < 0) continue;  // user interacted with almost everything
        loss_sum += update(pr.u_local, cand, 0.0f);
        ++loss_count;
      }
    }
    float mean = loss_count ? static_cast<float>(loss_sum / loss_count) : 0.0f;
    if (!std::isfinite(mean))
      throw Error("train_teacher: diverged at epoch " + std::to_string(epoch));
    if (epoch_losses) epoch_losses->push_back(mean);
  }
  return t;
}

}  // namespace nser
