#include "nser/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nser/error.hpp"

namespace nser {

const std::string& Graph::type_name(int type_id) const {
  if (type_id < 0 || type_id >= type_count())
    throw Error("unknown type id " + std::to_string(type_id));
  return type_names_[static_cast<size_t>(type_id)];
}

const RelationDef& Graph::relation(int relation_id) const {
  if (relation_id < 0 || relation_id >= relation_count())
    throw Error("unknown relation id " + std::to_string(relation_id));
  return relations_[static_cast<size_t>(relation_id)];
}

int Graph::find_type(const std::string& name) const {
  auto it = type_by_name_.find(name);
  return it == type_by_name_.end() ? -1 : it->second;
}

int Graph::find_relation(const std::string& name) const {
  auto it = relation_by_name_.find(name);
  return it == relation_by_name_.end() ? -1 : it->second;
}

EntityRef Graph::entity(int type_id, const std::string& name) const {
  if (type_id < 0 || type_id >= type_count())
    throw Error("unknown type id " + std::to_string(type_id));
  const auto& names = local_by_name_[static_cast<size_t>(type_id)];
  auto it = names.find(name);
  if (it == names.end())
    throw Error("unknown entity " + type_name(type_id) + ":" + name);
  int global = globals_by_type_[static_cast<size_t>(type_id)]
                               [static_cast<size_t>(it->second)];
  return global_index_[static_cast<size_t>(global)];
}

EntityRef Graph::entity_by_global(int global_id) const {
  if (global_id < 0 || global_id >= entity_count())
    throw Error("unknown entity global id " + std::to_string(global_id));
  return global_index_[static_cast<size_t>(global_id)];
}

const std::string& Graph::entity_name(const EntityRef& e) const {
  if (e.type_id < 0 || e.type_id >= type_count() || e.local_id < 0 ||
      e.local_id >= entity_count(e.type_id))
    throw Error("dangling entity reference");
  return entity_names_[static_cast<size_t>(e.type_id)]
                      [static_cast<size_t>(e.local_id)];
}

std::string Graph::qualified_name(int global_id) const {
  EntityRef e = entity_by_global(global_id);
  return type_name(e.type_id) + ":" + entity_name(e);
}

const std::vector<int>& Graph::entities_of_type(int type_id) const {
  if (type_id < 0 || type_id >= type_count())
    throw Error("unknown type id " + std::to_string(type_id));
  return globals_by_type_[static_cast<size_t>(type_id)];
}

const std::vector<int>& Graph::neighbors(const EntityRef& e,
                                         int relation_id) const {
  const RelationDef& r = relation(relation_id);
  if (e.type_id != r.head_type)
    throw Error("neighbors: entity type " + type_name(e.type_id) +
                " does not match head type of relation " + r.name);
  return adj_[static_cast<size_t>(relation_id)][static_cast<size_t>(e.global_id)];
}

const std::vector<int>& Graph::neighbors(int head_global,
                                         int relation_id) const {
  return neighbors(entity_by_global(head_global), relation_id);
}

const std::vector<int>& Graph::reverse_neighbors(int tail_global,
                                                 int relation_id) const {
  const RelationDef& r = relation(relation_id);
  EntityRef e = entity_by_global(tail_global);
  if (e.type_id != r.tail_type)
    throw Error("reverse_neighbors: entity type " + type_name(e.type_id) +
                " does not match tail type of relation " + r.name);
  return radj_[static_cast<size_t>(relation_id)][static_cast<size_t>(tail_global)];
}

bool Graph::has_triple(int head_global, int relation_id,
                       int tail_global) const {
  const RelationDef& r = relation(relation_id);
  EntityRef h = entity_by_global(head_global);
  if (h.type_id != r.head_type) return false;
  const auto& tails =
      adj_[static_cast<size_t>(relation_id)][static_cast<size_t>(head_global)];
  return std::binary_search(tails.begin(), tails.end(), tail_global);
}

int64_t Graph::triple_count() const {
  int64_t n = 0;
  for (const auto& per_rel : adj_)
    for (const auto& tails : per_rel) n += static_cast<int64_t>(tails.size());
  return n;
}

int Graph::user_type() const {
  if (user_type_ < 0) throw Error("graph declares no 'user' entity type");
  return user_type_;
}

int Graph::item_type() const {
  if (item_type_ < 0) throw Error("graph declares no 'item' entity type");
  return item_type_;
}

int Graph::interaction_relation() const {
  if (interaction_rel_ < 0)
    throw Error("graph declares no user->item interaction relation");
  return interaction_rel_;
}

bool Graph::operator==(const Graph& o) const {
  return type_names_ == o.type_names_ && entity_names_ == o.entity_names_ &&
         relations_ == o.relations_ && adj_ == o.adj_;
}

int GraphBuilder::add_type(const std::string& name) {
  auto it = g_.type_by_name_.find(name);
  if (it != g_.type_by_name_.end()) return it->second;
  int id = g_.type_count();
  g_.type_by_name_[name] = id;
  g_.type_names_.push_back(name);
  g_.entity_names_.emplace_back();
  g_.globals_by_type_.emplace_back();
  g_.local_by_name_.emplace_back();
  return id;
}

EntityRef GraphBuilder::add_entity(int type_id, const std::string& name) {
  if (type_id < 0 || type_id >= g_.type_count())
    throw Error("add_entity: unknown type id");
  auto& names = g_.local_by_name_[static_cast<size_t>(type_id)];
  if (names.count(name))
    throw Error("duplicate entity " +
                g_.type_names_[static_cast<size_t>(type_id)] + ":" + name);
  EntityRef e;
  e.type_id = type_id;
  e.local_id =
      static_cast<int>(g_.entity_names_[static_cast<size_t>(type_id)].size());
  e.global_id = g_.entity_count();
  names[name] = e.local_id;
  g_.entity_names_[static_cast<size_t>(type_id)].push_back(name);
  g_.globals_by_type_[static_cast<size_t>(type_id)].push_back(e.global_id);
  g_.global_index_.push_back(e);
  return e;
}

int GraphBuilder::add_relation(const std::string& name, int head_type,
                               int tail_type) {
  if (g_.relation_by_name_.count(name))
    throw Error("duplicate relation " + name);
  if (head_type < 0 || head_type >= g_.type_count() || tail_type < 0 ||
      tail_type >= g_.type_count())
    throw Error("add_relation: unknown entity type in signature of " + name);
  RelationDef def;
  def.relation_id = g_.relation_count();
  def.name = name;
  def.head_type = head_type;
  def.tail_type = tail_type;
  g_.relation_by_name_[name] = def.relation_id;
  g_.relations_.push_back(def);
  pending_.emplace_back();
  return def.relation_id;
}

void GraphBuilder::add_triple(int head_global, int relation_id,
                              int tail_global) {
  if (relation_id < 0 || relation_id >= g_.relation_count())
    throw Error("add_triple: unknown relation id");
  const RelationDef& r = g_.relations_[static_cast<size_t>(relation_id)];
  EntityRef h = g_.entity_by_global(head_global);
  EntityRef t = g_.entity_by_global(tail_global);
  if (h.type_id != r.head_type || t.type_id != r.tail_type)
    throw Error("type violation: (" + g_.qualified_name(head_global) + ", " +
                r.name + ", " + g_.qualified_name(tail_global) +
                ") does not match signature " +
                g_.type_names_[static_cast<size_t>(r.head_type)] + "->" +
                g_.type_names_[static_cast<size_t>(r.tail_type)]);
  auto& lists = pending_[static_cast<size_t>(relation_id)];
  if (lists.size() < static_cast<size_t>(g_.entity_count()))
    lists.resize(static_cast<size_t>(g_.entity_count()));
  lists[static_cast<size_t>(head_global)].push_back(tail_global);
}

int GraphBuilder::find_type(const std::string& name) const {
  return g_.find_type(name);
}

int GraphBuilder::find_relation(const std::string& name) const {
  return g_.find_relation(name);
}

int GraphBuilder::find_entity_global(int type_id,
                                     const std::string& name) const {
  if (type_id < 0 || type_id >= g_.type_count()) return -1;
  const auto& names = g_.local_by_name_[static_cast<size_t>(type_id)];
  auto it = names.find(name);
  if (it == names.end()) return -1;
  return g_.globals_by_type_[static_cast<size_t>(type_id)]
                            [static_cast<size_t>(it->second)];
}

Graph GraphBuilder::build() {
  size_t ne = static_cast<size_t>(g_.entity_count());
  g_.adj_.assign(g_.relations_.size(), std::vector<std::vector<int>>(ne));
  g_.radj_.assign(g_.relations_.size(), std::vector<std::vector<int>>(ne));
  for (size_t r = 0; r < pending_.size(); ++r) {
    auto& lists = pending_[r];
    lists.resize(ne);
    for (size_t h = 0; h < ne; ++h) {
      auto& tails = lists[h];
      std::sort(tails.begin(), tails.end());
      size_t before = tails.size();
      tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
      duplicates_ += static_cast<int64_t>(before - tails.size());
      for (int t : tails)
        g_.radj_[r][static_cast<size_t>(t)].push_back(static_cast<int>(h));
      g_.adj_[r][h] = std::move(tails);
    }
    for (size_t t = 0; t < ne; ++t)
      std::sort(g_.radj_[r][t].begin(), g_.radj_[r][t].end());
  }
  pending_.clear();

  g_.user_type_ = g_.find_type("user");
  g_.item_type_ = g_.find_type("item");
  g_.interaction_rel_ = -1;
  if (g_.user_type_ >= 0 && g_.item_type_ >= 0) {
    int named = g_.find_relation("purchase");
    if (named >= 0 &&
        g_.relations_[static_cast<size_t>(named)].head_type == g_.user_type_ &&
        g_.relations_[static_cast<size_t>(named)].tail_type == g_.item_type_) {
      g_.interaction_rel_ = named;
    } else {
      for (const RelationDef& r : g_.relations_) {
        if (r.head_type == g_.user_type_ && r.tail_type == g_.item_type_) {
          g_.interaction_rel_ = r.relation_id;
          break;
        }
      }
    }
  }
  return std::move(g_);
}

namespace {

std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& file, int lineno,
                             const std::string& msg) {
  throw Error(file + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

Graph ingest_triples(const std::string& entity_file,
                     const std::string& triple_file, IngestStats* stats) {
  GraphBuilder builder;

  std::ifstream ef(entity_file);
  if (!ef) throw Error("cannot open entity file " + entity_file);
  std::string line;
  int lineno = 0;
  while (std::getline(ef, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      parse_fail(entity_file, lineno,
                 "malformed entity line (want <type>\\t<name>): " + line);
    int type_id = builder.add_type(fields[0]);
    try {
      builder.add_entity(type_id, fields[1]);
    } catch (const Error& e) {
      parse_fail(entity_file, lineno, e.what());
    }
  }

  std::ifstream tf(triple_file);
  if (!tf) throw Error("cannot open triple file " + triple_file);
  struct RawTriple {
    int lineno;
    std::string head, rel, tail;
  };
  std::vector<RawTriple> raw;
  lineno = 0;
  while (std::getline(tf, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("@relation", 0) == 0) {
      std::istringstream is(line);
      std::string tag, name, head, tail, extra;
      is >> tag >> name >> head >> tail;
      if (name.empty() || head.empty() || tail.empty() || (is >> extra))
        parse_fail(triple_file, lineno,
                   "malformed relation declaration: " + line);
      int ht = builder.find_type(head);
      int tt = builder.find_type(tail);
      if (ht < 0)
        parse_fail(triple_file, lineno,
                   "relation " + name + " names undeclared head type '" +
                       head + "'");
      if (tt < 0)
        parse_fail(triple_file, lineno,
                   "relation " + name + " names undeclared tail type '" +
                       tail + "'");
      try {
        builder.add_relation(name, ht, tt);
      } catch (const Error& e) {
        parse_fail(triple_file, lineno, e.what());
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      parse_fail(triple_file, lineno,
                 "malformed triple line (want head\\trel\\ttail): " + line);
    raw.push_back({lineno, fields[0], fields[1], fields[2]});
  }

  auto resolve = [&](const std::string& qualified, int at) {
    size_t colon = qualified.find(':');
    if (colon == std::string::npos || colon == 0 ||
        colon + 1 == qualified.size())
      parse_fail(triple_file, at,
                 "malformed entity reference '" + qualified +
                     "' (want type:name)");
    std::string tname = qualified.substr(0, colon);
    std::string ename = qualified.substr(colon + 1);
    int type_id = builder.find_type(tname);
    if (type_id < 0)
      parse_fail(triple_file, at, "undeclared entity type '" + tname + "'");
    int global = builder.find_entity_global(type_id, ename);
    if (global < 0)
      parse_fail(triple_file, at,
                 "undeclared entity " + tname + ":" + ename);
    return global;
  };

  for (const RawTriple& t : raw) {
    int rel = builder.find_relation(t.rel);
    if (rel < 0)
      parse_fail(triple_file, t.lineno, "undeclared relation '" + t.rel + "'");
    int hg = resolve(t.head, t.lineno);
    int tg = resolve(t.tail, t.lineno);
    try {
      builder.add_triple(hg, rel, tg);
    } catch (const Error& e) {
      parse_fail(triple_file, t.lineno, e.what());
    }
  }

  Graph g = builder.build();  // counts duplicates while deduplicating
  if (stats) {
    *stats = graph_stats(g);
    stats->duplicate_triples = builder.duplicate_count();
  }
  return g;
}

void emit_graph(const Graph& g, const std::string& entity_file,
                const std::string& triple_file) {
  std::ofstream ef(entity_file, std::ios::trunc);
  if (!ef) throw Error("cannot open " + entity_file + " for writing");
  // Global-id order reproduces the graph's own id assignment on re-ingest.
  for (int gid = 0; gid < g.entity_count(); ++gid) {
    EntityRef e = g.entity_by_global(gid);
    ef << g.type_name(e.type_id) << "\t" << g.entity_name(e) << "\n";
  }
  if (!ef) throw Error("write failed for " + entity_file);

  std::ofstream tf(triple_file, std::ios::trunc);
  if (!tf) throw Error("cannot open " + triple_file + " for writing");
  for (const RelationDef& r : g.relations())
    tf << "@relation " << r.name << " " << g.type_name(r.head_type) << " "
       << g.type_name(r.tail_type) << "\n";
  for (const RelationDef& r : g.relations()) {
    for (int h : g.entities_of_type(r.head_type)) {
      for (int t : g.neighbors(h, r.relation_id))
        tf << g.qualified_name(h) << "\t" << r.name << "\t"
           << g.qualified_name(t) << "\n";
    }
  }
  if (!tf) throw Error("write failed for " + triple_file);
}

IngestStats graph_stats(const Graph& g) {
  IngestStats s;
  s.entities_per_type.resize(static_cast<size_t>(g.type_count()), 0);
  for (int t = 0; t < g.type_count(); ++t)
    s.entities_per_type[static_cast<size_t>(t)] = g.entity_count(t);
  s.triples_per_relation.resize(static_cast<size_t>(g.relation_count()), 0);
  for (const RelationDef& r : g.relations()) {
    int64_t n = 0;
    for (int h : g.entities_of_type(r.head_type))
      n += static_cast<int64_t>(g.neighbors(h, r.relation_id).size());
    s.triples_per_relation[static_cast<size_t>(r.relation_id)] = n;
  }
  return s;
}

}  // namespace nser
