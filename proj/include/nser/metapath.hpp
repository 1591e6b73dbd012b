#pragma once

#include <set>
#include <vector>

#include "nser/graph.hpp"
#include "nser/rng.hpp"

namespace nser {

// Schema-level relation sequence from the user type to the item type.
struct Metapath {
  std::vector<int> relations;

  size_t length() const { return relations.size(); }
  bool operator==(const Metapath& o) const = default;
  bool operator<(const Metapath& o) const {
    if (relations.size() != o.relations.size())
      return relations.size() < o.relations.size();
    return relations < o.relations;
  }
};

struct PathStep {
  int relation_id = -1;
  EntityRef entity;

  bool operator==(const PathStep& o) const = default;
};

// Concrete alternating entity/relation walk conforming to some metapath.
struct PathInstance {
  EntityRef user;
  std::vector<PathStep> steps;

  EntityRef end() const { return steps.back().entity; }
  bool operator==(const PathInstance& o) const = default;
};

// Every hop is a graph triple and the walk starts at a user entity.
bool path_valid(const Graph& g, const PathInstance& p);

// Relation sequence of p equals pi.
bool path_conforms(const PathInstance& p, const Metapath& pi);

// All chainable relation sequences from the user type to the item type with
// length <= max_len that are realized by at least one concrete path in g.
// Deterministic order: by (length, relation ids lexicographically).
std::vector<Metapath> enumerate_metapaths(const Graph& g, int max_len);

// Paths from u to any member of `positives` conforming to pi. When the full
// enumeration exceeds `limit`, a seeded uniform sample of `limit` paths is
// returned (in enumeration order). Empty result means no positive path
// exists.
std::vector<PathInstance> sample_positive_paths(const Graph& g,
                                                const EntityRef& u,
                                                const Metapath& pi,
                                                const std::set<int>& positives,
                                                size_t limit, Rng& rng);
std::vector<PathInstance> sample_positive_paths(const Graph& g,
                                                const EntityRef& u,
                                                const Metapath& pi,
                                                const std::set<int>& positives,
                                                size_t limit, uint64_t seed);

}  // namespace nser
