#pragma once

#include <set>
#include <string>
#include <vector>

#include "nser/layout.hpp"
#include "nser/metapath.hpp"
#include "nser/model.hpp"

namespace nser {

// A concrete reasoning path emitted by layout execution, tagged with the
// layout leaf it came from and its leaf score <e_hat_leaf, emb(end)>.
struct ExecutedPath {
  PathInstance path;
  int leaf_node = -1;       // node id in the MetaLayout
  int metapath_index = -1;  // index into layout.metapaths
  float score = 0.0f;
};

// Executes the layout tree breadth-first over the graph. Each node x gets
// one module output e_hat_x = phi_{r_x}(emb(u), e_hat_parent) (e_hat_root =
// emb(u)); every frontier path expands to its top-k_x graph neighbors by
// <e_hat_x, emb(e)>, ties broken by ascending global id. A hop that would
// repeat an identical (entity, relation, entity) hop already on the path is
// skipped. Paths are collected from leaf frontiers in pre-order.
std::vector<ExecutedPath> execute_layout(const Model& m, const Graph& g,
                                         const EntityRef& u,
                                         const MetaLayout& layout);

struct RecResult {
  struct Item {
    EntityRef item;
    float score = 0.0f;
    std::vector<ExecutedPath> paths;  // supporting paths, best first
  };
  std::vector<Item> items;  // scores non-increasing
};

// Deduplicates path end items; item score = max supporting-path score; top-N
// by score with ties by ascending item id. Items in `exclude` (global ids,
// e.g. the user's train-split interactions) are dropped.
RecResult recommend(const std::vector<ExecutedPath>& paths, const Model& m,
                    int top_n, const std::set<int>& exclude = {});

// One-line rendering: "u --purchase--> item_3 --purchase_by--> user_7".
std::string explain(const PathInstance& path, const Graph& g);

}  // namespace nser
