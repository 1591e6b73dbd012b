#include "nser/metapath.hpp"

#include <algorithm>

#include "nser/error.hpp"

namespace nser {

bool path_valid(const Graph& g, const PathInstance& p) {
  if (p.steps.empty()) return false;
  if (p.user.type_id != g.user_type()) return false;
  int cur = p.user.global_id;
  for (const PathStep& s : p.steps) {
    if (s.relation_id < 0 || s.relation_id >= g.relation_count()) return false;
    if (!g.has_triple(cur, s.relation_id, s.entity.global_id)) return false;
    cur = s.entity.global_id;
  }
  return true;
}

bool path_conforms(const PathInstance& p, const Metapath& pi) {
  if (p.steps.size() != pi.relations.size()) return false;
  for (size_t i = 0; i < p.steps.size(); ++i)
    if (p.steps[i].relation_id != pi.relations[i]) return false;
  return true;
}

namespace {

// True when at least one concrete instance of the relation sequence exists,
// starting from any user entity. Set propagation over entity globals.
bool realized(const Graph& g, const std::vector<int>& relations) {
  std::vector<char> cur(static_cast<size_t>(g.entity_count()), 0);
  for (int gid : g.entities_of_type(g.user_type())) cur[static_cast<size_t>(gid)] = 1;
  for (int rel : relations) {
    std::vector<char> next(static_cast<size_t>(g.entity_count()), 0);
    const RelationDef& def = g.relation(rel);
    bool any = false;
    for (int head : g.entities_of_type(def.head_type)) {
      if (!cur[static_cast<size_t>(head)]) continue;
      for (int tail : g.neighbors(head, rel)) {
        next[static_cast<size_t>(tail)] = 1;
        any = true;
      }
    }
    if (!any) return false;
    cur = std::move(next);
  }
  return true;
}

void enumerate_rec(const Graph& g, int cur_type, int max_len,
                   std::vector<int>& prefix, std::vector<Metapath>& out) {
  if (static_cast<int>(prefix.size()) >= max_len) return;
  for (const RelationDef& r : g.relations()) {
    if (r.head_type != cur_type) continue;
    prefix.push_back(r.relation_id);
    if (r.tail_type == g.item_type()) out.push_back(Metapath{prefix});
    enumerate_rec(g, r.tail_type, max_len, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Metapath> enumerate_metapaths(const Graph& g, int max_len) {
  if (max_len < 1) throw Error("enumerate_metapaths: max_len must be >= 1");
  std::vector<Metapath> all;
  std::vector<int> prefix;
  enumerate_rec(g, g.user_type(), max_len, prefix, all);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<Metapath> out;
  for (Metapath& m : all)
    if (realized(g, m.relations)) out.push_back(std::move(m));
  return out;
}

namespace {

void collect_paths(const Graph& g, const Metapath& pi,
                   const std::set<int>& positives, size_t depth,
                   PathInstance& partial, std::vector<PathInstance>& out) {
  int cur = depth == 0 ? partial.user.global_id
                       : partial.steps.back().entity.global_id;
  int rel = pi.relations[depth];
  bool last = depth + 1 == pi.relations.size();
  for (int tail : g.neighbors(cur, rel)) {
    if (last && !positives.count(tail)) continue;
    partial.steps.push_back({rel, g.entity_by_global(tail)});
    if (last)
      out.push_back(partial);
    else
      collect_paths(g, pi, positives, depth + 1, partial, out);
    partial.steps.pop_back();
  }
}

}  // namespace

std::vector<PathInstance> sample_positive_paths(const Graph& g,
                                                const EntityRef& u,
                                                const Metapath& pi,
                                                const std::set<int>& positives,
                                                size_t limit, Rng& rng) {
  if (u.type_id != g.user_type())
    throw Error("sample_positive_paths: start entity is not a user");
  for (int p : positives) {
    if (g.entity_by_global(p).type_id != g.item_type())
      throw Error("sample_positive_paths: positive set contains a non-item");
  }
  if (pi.relations.empty()) return {};
  if (g.relation(pi.relations.front()).head_type != g.user_type()) return {};

  std::vector<PathInstance> all;
  PathInstance partial;
  partial.user = u;
  collect_paths(g, pi, positives, 0, partial, all);
  if (limit == 0) return {};
  if (all.size() <= limit) return all;

  std::vector<size_t> idx(all.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<size_t> chosen = rng.sample(idx, limit);
  std::sort(chosen.begin(), chosen.end());
  std::vector<PathInstance> out;
  out.reserve(limit);
  for (size_t i : chosen) out.push_back(std::move(all[i]));
  return out;
}

std::vector<PathInstance> sample_positive_paths(const Graph& g,
                                                const EntityRef& u,
                                                const Metapath& pi,
                                                const std::set<int>& positives,
                                                size_t limit, uint64_t seed) {
  Rng rng(seed);
  return sample_positive_paths(g, u, pi, positives, limit, rng);
}

}  // namespace nser
