#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nser {

// Entity identity inside a typed vocabulary. global_id is a dense index over
// all entities and is a bijection with (type_id, local_id).
struct EntityRef {
  int type_id = -1;
  int local_id = -1;
  int global_id = -1;

  bool operator==(const EntityRef& o) const = default;
};

struct RelationDef {
  int relation_id = -1;
  std::string name;
  int head_type = -1;
  int tail_type = -1;

  bool operator==(const RelationDef& o) const = default;
};

struct IngestStats {
  std::vector<int64_t> entities_per_type;     // indexed by type_id
  std::vector<int64_t> triples_per_relation;  // indexed by relation_id
  int64_t duplicate_triples = 0;
};

// Immutable typed knowledge graph. Safe to share across concurrent readers;
// every query below is const and reentrant.
class Graph {
 public:
  int type_count() const { return static_cast<int>(type_names_.size()); }
  int relation_count() const { return static_cast<int>(relations_.size()); }
  int entity_count() const { return static_cast<int>(global_index_.size()); }
  int entity_count(int type_id) const {
    return static_cast<int>(entity_names_[static_cast<size_t>(type_id)].size());
  }

  const std::string& type_name(int type_id) const;
  const std::vector<RelationDef>& relations() const { return relations_; }
  const RelationDef& relation(int relation_id) const;

  int find_type(const std::string& name) const;      // -1 when absent
  int find_relation(const std::string& name) const;  // -1 when absent
  // (type_id, entity name) -> EntityRef; throws when unknown.
  EntityRef entity(int type_id, const std::string& name) const;
  EntityRef entity_by_global(int global_id) const;
  const std::string& entity_name(const EntityRef& e) const;
  // "type:name" rendering used by the triple file format.
  std::string qualified_name(int global_id) const;

  // Global ids of all entities of a type, ascending.
  const std::vector<int>& entities_of_type(int type_id) const;

  // Sorted duplicate-free tail global ids for (head, relation). Throws when
  // e's type does not match the relation's head type.
  const std::vector<int>& neighbors(const EntityRef& e, int relation_id) const;
  const std::vector<int>& neighbors(int head_global, int relation_id) const;
  // Head global ids for (relation, tail): the reverse adjacency mirror.
  const std::vector<int>& reverse_neighbors(int tail_global,
                                            int relation_id) const;
  bool has_triple(int head_global, int relation_id, int tail_global) const;
  int64_t triple_count() const;

  // Recommendation roles. Resolved at build time from the type names "user"
  // and "item" and the relation named "purchase" (falling back to the first
  // user->item relation). Throw when the graph declares no such role.
  int user_type() const;
  int item_type() const;
  int interaction_relation() const;

  bool operator==(const Graph& o) const;

 private:
  friend class GraphBuilder;

  std::vector<std::string> type_names_;
  std::vector<std::vector<std::string>> entity_names_;  // [type][local]
  std::vector<EntityRef> global_index_;                 // [global]
  std::vector<std::vector<int>> globals_by_type_;       // [type] ascending
  std::map<std::string, int> type_by_name_;
  std::vector<std::map<std::string, int>> local_by_name_;  // [type] name->local
  std::vector<RelationDef> relations_;
  std::map<std::string, int> relation_by_name_;
  // [relation][head_global] -> sorted tails; reverse mirror likewise.
  std::vector<std::vector<std::vector<int>>> adj_;
  std::vector<std::vector<std::vector<int>>> radj_;
  int user_type_ = -1;
  int item_type_ = -1;
  int interaction_rel_ = -1;
};

// Accumulates a graph, then validates and freezes it. build() sorts and
// deduplicates adjacency and constructs the reverse mirror.
class GraphBuilder {
 public:
  int add_type(const std::string& name);  // idempotent per name
  EntityRef add_entity(int type_id, const std::string& name);
  int add_relation(const std::string& name, int head_type, int tail_type);
  // Validates the type signature; duplicate triples are dropped and counted.
  void add_triple(int head_global, int relation_id, int tail_global);

  int find_type(const std::string& name) const;
  int find_relation(const std::string& name) const;
  // -1 when the entity is not declared.
  int find_entity_global(int type_id, const std::string& name) const;
  int64_t duplicate_count() const { return duplicates_; }

  Graph build();

 private:
  Graph g_;
  int64_t duplicates_ = 0;
  std::vector<std::vector<std::vector<int>>> pending_;  // unsorted adjacency
};

// Loads and validates a typed graph from the two text formats:
//   entity file: "<type_name>\t<entity_name>" per line, '#' comments
//   triple file: header lines "@relation <name> <head_type> <tail_type>",
//                then "<head_type>:<head_name>\t<rel>\t<tail_type>:<tail_name>"
// Errors carry the offending file and line number.
Graph ingest_triples(const std::string& entity_file,
                     const std::string& triple_file,
                     IngestStats* stats = nullptr);

// Canonically sorted emit; ingest(emit(g)) == g.
void emit_graph(const Graph& g, const std::string& entity_file,
                const std::string& triple_file);

IngestStats graph_stats(const Graph& g);

}  // namespace nser
