#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nser/metapath.hpp"
#include "nser/model.hpp"

namespace nser {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Per-user budgeted allocation over metapaths.
struct LayoutSpec {
  int budget = 15;              // K: total paths sampled across metapaths
  std::vector<int> caps;        // k_j per metapath
  std::vector<float> values;    // v_j per metapath (may be -inf)
  std::vector<int> allocation;  // y_j per metapath
};

// Rooted tree of (relation, count) nodes; the coarse-grained explanation.
// Root carries no relation and k=1 after propagation. Leaves map one-to-one
// onto the metapaths that received a positive allocation.
struct MetaLayout {
  struct Node {
    int relation_id = -1;  // -1 only at the root
    int count = 0;         // k_x
    int parent = -1;
    std::vector<int> children;
    int metapath_index = -1;  // leaves only: index into `metapaths`
  };
  std::vector<Node> nodes;  // nodes[0] is the root
  std::vector<Metapath> metapaths;  // metapaths included in the layout

  bool empty() const { return nodes.size() <= 1; }
  const Node& root() const { return nodes.front(); }
  // Leaf node ids in pre-order.
  std::vector<int> leaves() const;
  // Product of k_x along the root-to-leaf path (excluding the root).
  int64_t leaf_count_product(int leaf_node) const;
};

// Mean chained log-likelihood of sampled positive paths for (u, pi); -inf
// when no positive path exists. Positive items are u's interaction-relation
// neighbors in g.
float heuristic_value(const Model& m, const Graph& g, const EntityRef& u,
                      const Metapath& pi, size_t sample_limit, Rng& rng);

// Greedy fill in descending value order (ties: ascending metapath index),
// spending min(K, sum of caps over finite-valued metapaths). Metapaths with
// v = -inf always receive 0. Exchange-optimal for the equality-constrained
// linear program.
std::vector<int> allocate_budget(const std::vector<float>& values,
                                 const std::vector<int>& caps, int budget);

// Uniform strategy: y_j counts K draws from a uniform distribution over the
// M metapaths.
std::vector<int> allocate_uniform(size_t n_metapaths, int budget, Rng& rng);

// Prior strategy: y_j = ceil(K * k_j / sum(k_i)).
std::vector<int> allocate_prior(const std::vector<int>& caps, int budget);

// Prefix-merges the metapaths with y_j > 0 and propagates counts: leaves are
// seeded with y_j, then post-order, each internal node takes the minimum
// positive child count and divides it out of its children. Metapaths that
// are a strict prefix of another included metapath are dropped with a
// warning (their leaf would collide with an internal node).
// Throws on duplicate metapaths.
MetaLayout build_layout(const std::vector<Metapath>& metapaths,
                        const std::vector<int>& allocation,
                        std::vector<std::string>* warnings = nullptr);

// One node per line: "<depth>,<relation_name>,<k>", pre-order; root rendered
// with relation name "-".
std::string serialize_layout(const MetaLayout& layout, const Graph& g);

}  // namespace nser
