#include "nser/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nser/error.hpp"

namespace nser {

std::vector<int> MetaLayout::leaves() const {
  std::vector<int> out;
  for (size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].children.empty()) out.push_back(static_cast<int>(i));
  return out;
}

int64_t MetaLayout::leaf_count_product(int leaf_node) const {
  int64_t product = 1;
  for (int x = leaf_node; x > 0; x = nodes[static_cast<size_t>(x)].parent)
    product *= nodes[static_cast<size_t>(x)].count;
  return product;
}

float heuristic_value(const Model& m, const Graph& g, const EntityRef& u,
                      const Metapath& pi, size_t sample_limit, Rng& rng) {
  const std::vector<int>& pos = g.neighbors(u, g.interaction_relation());
  if (pos.empty()) return kNegInf;
  std::set<int> pos_set(pos.begin(), pos.end());
  std::vector<PathInstance> paths =
      sample_positive_paths(g, u, pi, pos_set, sample_limit, rng);
  if (paths.empty()) return kNegInf;

  // Chained module outputs are shared across paths: compute the per-step
  // log-prob vectors once and sum the picks per path.
  std::vector<Tensor> logprobs(pi.relations.size());
  std::vector<const std::vector<int>*> partitions(pi.relations.size());
  Tensor prev = m.embedding(u.global_id);
  std::vector<std::vector<int>> partition_copies(pi.relations.size());
  for (size_t j = 0; j < pi.relations.size(); ++j) {
    partition_copies[j] =
        m.step_logprob_vector(g, u, prev, pi.relations[j], &logprobs[j]);
    partitions[j] = &partition_copies[j];
    prev = m.relation_forward(pi.relations[j], m.embedding(u.global_id), prev);
  }
  double total = 0.0;
  for (const PathInstance& p : paths) {
    for (size_t j = 0; j < p.steps.size(); ++j) {
      const std::vector<int>& part = *partitions[j];
      auto it = std::lower_bound(part.begin(), part.end(),
                                 p.steps[j].entity.global_id);
      total += logprobs[j].data[static_cast<size_t>(it - part.begin())];
    }
  }
  return static_cast<float>(total / static_cast<double>(paths.size()));
}

std::vector<int> allocate_budget(const std::vector<float>& values,
                                 const std::vector<int>& caps, int budget) {
  if (values.size() != caps.size())
    throw Error("allocate_budget: values/caps size mismatch");
  if (budget < 0) throw Error("allocate_budget: negative budget");
  size_t m = values.size();
  std::vector<int> y(m, 0);
  std::vector<size_t> order;
  long long finite_cap_sum = 0;
  for (size_t j = 0; j < m; ++j) {
    if (caps[j] < 0) throw Error("allocate_budget: negative cap");
    if (std::isinf(values[j]) && values[j] < 0) continue;
    order.push_back(j);
    finite_cap_sum += caps[j];
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  long long remaining = std::min<long long>(budget, finite_cap_sum);
  for (size_t j : order) {
    if (remaining <= 0) break;
    int take = static_cast<int>(std::min<long long>(caps[j], remaining));
    y[j] = take;
    remaining -= take;
  }
  return y;
}

std::vector<int> allocate_uniform(size_t n_metapaths, int budget, Rng& rng) {
  std::vector<int> y(n_metapaths, 0);
  if (n_metapaths == 0) return y;
  for (int i = 0; i < budget; ++i)
    ++y[static_cast<size_t>(rng.uniform_int(n_metapaths))];
  return y;
}

std::vector<int> allocate_prior(const std::vector<int>& caps, int budget) {
  std::vector<int> y(caps.size(), 0);
  long long cap_sum = 0;
  for (int c : caps) cap_sum += c;
  if (cap_sum == 0) return y;
  for (size_t j = 0; j < caps.size(); ++j)
    y[j] = static_cast<int>(std::ceil(static_cast<double>(budget) * caps[j] /
                                      static_cast<double>(cap_sum)));
  return y;
}

namespace {

void recursive_update(MetaLayout& layout, int x) {
  MetaLayout::Node& node = layout.nodes[static_cast<size_t>(x)];
  for (int c : node.children) recursive_update(layout, c);
  if (x == 0) {
    node.count = 1;
    return;
  }
  if (node.children.empty()) return;  // leaves keep their y_j seed
  int min_positive = 0;
  for (int c : node.children) {
    int kc = layout.nodes[static_cast<size_t>(c)].count;
    if (kc > 0 && (min_positive == 0 || kc < min_positive)) min_positive = kc;
  }
  if (min_positive == 0) {
    node.count = 0;  // fully pruned subtree
    return;
  }
  node.count = min_positive;
  for (int c : node.children)
    layout.nodes[static_cast<size_t>(c)].count /= min_positive;
}

}  // namespace

MetaLayout build_layout(const std::vector<Metapath>& metapaths,
                        const std::vector<int>& allocation,
                        std::vector<std::string>* warnings) {
  if (metapaths.size() != allocation.size())
    throw Error("build_layout: metapaths/allocation size mismatch");
  std::vector<size_t> included;
  for (size_t j = 0; j < metapaths.size(); ++j) {
    if (allocation[j] > 0) {
      if (metapaths[j].relations.empty())
        throw Error("build_layout: empty metapath");
      included.push_back(j);
    }
  }
  for (size_t a = 0; a < included.size(); ++a)
    for (size_t b = a + 1; b < included.size(); ++b)
      if (metapaths[included[a]] == metapaths[included[b]])
        throw Error("build_layout: duplicate metapath in input");

  // A metapath that is a strict prefix of another would make one leaf an
  // internal node; drop the shorter of any such pair.
  std::vector<size_t> kept;
  for (size_t a : included) {
    bool is_prefix = false;
    const auto& ra = metapaths[a].relations;
    for (size_t b : included) {
      if (a == b) continue;
      const auto& rb = metapaths[b].relations;
      if (ra.size() < rb.size() &&
          std::equal(ra.begin(), ra.end(), rb.begin())) {
        is_prefix = true;
        break;
      }
    }
    if (is_prefix) {
      if (warnings) {
        std::ostringstream os;
        os << "dropping metapath " << a
           << ": it is a prefix of another included metapath";
        warnings->push_back(os.str());
      }
      continue;
    }
    kept.push_back(a);
  }

  MetaLayout layout;
  layout.nodes.push_back(MetaLayout::Node{});  // root
  for (size_t j : kept) {
    int cur = 0;
    for (size_t depth = 0; depth < metapaths[j].relations.size(); ++depth) {
      int rel = metapaths[j].relations[depth];
      int next = -1;
      for (int c : layout.nodes[static_cast<size_t>(cur)].children) {
        if (layout.nodes[static_cast<size_t>(c)].relation_id == rel) {
          next = c;
          break;
        }
      }
      if (next < 0) {
        MetaLayout::Node n;
        n.relation_id = rel;
        n.parent = cur;
        next = static_cast<int>(layout.nodes.size());
        layout.nodes.push_back(n);
        layout.nodes[static_cast<size_t>(cur)].children.push_back(next);
      }
      cur = next;
    }
    MetaLayout::Node& leaf = layout.nodes[static_cast<size_t>(cur)];
    leaf.count = allocation[j];
    leaf.metapath_index = static_cast<int>(layout.metapaths.size());
    layout.metapaths.push_back(metapaths[j]);
  }
  recursive_update(layout, 0);
  return layout;
}

namespace {

void serialize_node(const MetaLayout& layout, const Graph& g, int node,
                    int depth, std::ostringstream& os) {
  const MetaLayout::Node& n = layout.nodes[static_cast<size_t>(node)];
  os << depth << ","
     << (n.relation_id < 0 ? std::string("-") : g.relation(n.relation_id).name)
     << "," << n.count << "\n";
  for (int c : n.children) serialize_node(layout, g, c, depth + 1, os);
}

}  // namespace

std::string serialize_layout(const MetaLayout& layout, const Graph& g) {
  std::ostringstream os;
  serialize_node(layout, g, 0, 0, os);
  return os.str();
}

}  // namespace nser
