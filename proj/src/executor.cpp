#include "nser/executor.hpp"

#include <algorithm>
#include <deque>

#include "nser/error.hpp"

namespace nser {

std::vector<ExecutedPath> execute_layout(const Model& m, const Graph& g,
                                         const EntityRef& u,
                                         const MetaLayout& layout) {
  if (u.type_id != g.user_type())
    throw Error("execute_layout: start entity is not a user");
  for (size_t i = 1; i < layout.nodes.size(); ++i) {
    int rel = layout.nodes[i].relation_id;
    if (rel < 0 || rel >= g.relation_count())
      throw Error("execute_layout: layout relation not in graph schema");
  }
  std::vector<ExecutedPath> results;
  if (layout.empty()) return results;

  size_t n_nodes = layout.nodes.size();
  std::vector<Tensor> module_out(n_nodes);
  std::vector<std::vector<PathInstance>> frontier(n_nodes);
  module_out[0] = m.embedding(u.global_id);
  PathInstance start;
  start.user = u;
  frontier[0].push_back(start);

  Tensor u_emb = m.embedding(u.global_id);
  const Tensor& table = m.params().value(Model::embedding_param());
  int d = m.dim();

  // Children are stored in insertion order and node ids grow along each
  // metapath, so ascending id order is a breadth-compatible topological
  // order; a queue over it gives the breadth-first execution.
  std::deque<int> queue;
  for (int c : layout.root().children) queue.push_back(c);
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    const MetaLayout::Node& node = layout.nodes[static_cast<size_t>(x)];
    module_out[static_cast<size_t>(x)] = m.relation_forward(
        node.relation_id, u_emb, module_out[static_cast<size_t>(node.parent)]);
    const Tensor& e_hat = module_out[static_cast<size_t>(x)];
    const RelationDef& rel = g.relation(node.relation_id);

    for (const PathInstance& partial : frontier[static_cast<size_t>(node.parent)]) {
      int last = partial.steps.empty() ? partial.user.global_id
                                       : partial.steps.back().entity.global_id;
      if (g.entity_by_global(last).type_id != rel.head_type) continue;
      // Candidates: graph-adjacent entities, minus hops already on the path.
      struct Cand {
        float score;
        int global;
      };
      std::vector<Cand> cands;
      for (int tail : g.neighbors(last, node.relation_id)) {
        bool repeat = false;
        int prev = partial.user.global_id;
        for (const PathStep& s : partial.steps) {
          if (prev == last && s.relation_id == node.relation_id &&
              s.entity.global_id == tail) {
            repeat = true;
            break;
          }
          prev = s.entity.global_id;
        }
        if (repeat) continue;
        const float* row = &table.data[static_cast<size_t>(tail) * d];
        float s = 0.0f;
        for (int j = 0; j < d; ++j) s += row[j] * e_hat.data[static_cast<size_t>(j)];
        cands.push_back({s, tail});
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.global < b.global;
      });
      size_t take = std::min<size_t>(cands.size(),
                                     static_cast<size_t>(std::max(0, node.count)));
      for (size_t i = 0; i < take; ++i) {
        PathInstance next = partial;
        next.steps.push_back(
            {node.relation_id, g.entity_by_global(cands[i].global)});
        frontier[static_cast<size_t>(x)].push_back(std::move(next));
      }
    }
    if (node.children.empty()) {
      for (const PathInstance& p : frontier[static_cast<size_t>(x)]) {
        ExecutedPath ep;
        ep.path = p;
        ep.leaf_node = x;
        ep.metapath_index = node.metapath_index;
        const float* row = &table.data[static_cast<size_t>(p.end().global_id) * d];
        float s = 0.0f;
        for (int j = 0; j < d; ++j) s += row[j] * e_hat.data[static_cast<size_t>(j)];
        ep.score = s;
        results.push_back(std::move(ep));
      }
    } else {
      for (int c : node.children) queue.push_back(c);
    }
  }

  // Leaf frontiers in pre-order of the layout, stable within each leaf.
  std::vector<int> order = layout.leaves();
  std::vector<ExecutedPath> ordered;
  for (int leaf : order)
    for (ExecutedPath& ep : results)
      if (ep.leaf_node == leaf) ordered.push_back(std::move(ep));
  return ordered;
}

RecResult recommend(const std::vector<ExecutedPath>& paths, const Model& m,
                    int top_n, const std::set<int>& exclude) {
  (void)m;
  RecResult rec;
  if (top_n <= 0) return rec;
  std::vector<RecResult::Item> items;
  for (const ExecutedPath& ep : paths) {
    EntityRef end = ep.path.end();
    if (exclude.count(end.global_id)) continue;
    RecResult::Item* slot = nullptr;
    for (RecResult::Item& it : items)
      if (it.item.global_id == end.global_id) {
        slot = &it;
        break;
      }
    if (!slot) {
      items.push_back({end, ep.score, {}});
      slot = &items.back();
    }
    slot->score = std::max(slot->score, ep.score);
    slot->paths.push_back(ep);
  }
  for (RecResult::Item& it : items)
    std::stable_sort(it.paths.begin(), it.paths.end(),
                     [](const ExecutedPath& a, const ExecutedPath& b) {
                       return a.score > b.score;
                     });
  std::sort(items.begin(), items.end(),
            [](const RecResult::Item& a, const RecResult::Item& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item.global_id < b.item.global_id;
            });
  if (static_cast<int>(items.size()) > top_n) items.resize(static_cast<size_t>(top_n));
  rec.items = std::move(items);
  return rec;
}

std::string explain(const PathInstance& path, const Graph& g) {
  std::string out = g.entity_name(path.user);
  for (const PathStep& s : path.steps) {
    out += " --" + g.relation(s.relation_id).name + "--> ";
    out += g.entity_name(s.entity);
  }
  return out;
}

}  // namespace nser
