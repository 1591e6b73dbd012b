#include "nser/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nser/error.hpp"

namespace nser {

Split make_split(const Graph& g, double train_ratio, uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw Error("make_split: ratio must be in (0, 1)");
  int rel = g.interaction_relation();
  Rng rng = substream(seed, "split");
  Split split;
  for (int ug : g.entities_of_type(g.user_type())) {
    EntityRef u = g.entity_by_global(ug);
    std::vector<int> items = g.neighbors(u, rel);
    if (items.size() < 2) {
      if (!items.empty()) ++split.dropped_users;
      continue;
    }
    rng.shuffle(items);
    long long n_train = std::llround(static_cast<double>(items.size()) * train_ratio);
    n_train = std::max<long long>(1, std::min<long long>(
                                         static_cast<long long>(items.size()) - 1,
                                         n_train));
    Split::UserSplit us;
    us.train.assign(items.begin(), items.begin() + n_train);
    us.test.assign(items.begin() + n_train, items.end());
    std::sort(us.train.begin(), us.train.end());
    std::sort(us.test.begin(), us.test.end());
    split.users[ug] = std::move(us);
  }
  return split;
}

Graph apply_split(const Graph& g, const Split& split) {
  int rel_ui = g.interaction_relation();
  // Item->user relations that could mirror a held-out interaction.
  std::vector<int> mirror_rels;
  for (const RelationDef& r : g.relations())
    if (r.head_type == g.item_type() && r.tail_type == g.user_type())
      mirror_rels.push_back(r.relation_id);

  std::set<std::pair<int, int>> removed;  // (user_global, item_global)
  for (const auto& [ug, us] : split.users)
    for (int ig : us.test) removed.insert({ug, ig});

  GraphBuilder b;
  for (int t = 0; t < g.type_count(); ++t) b.add_type(g.type_name(t));
  for (int gid = 0; gid < g.entity_count(); ++gid) {
    EntityRef e = g.entity_by_global(gid);
    b.add_entity(e.type_id, g.entity_name(e));
  }
  for (const RelationDef& r : g.relations())
    b.add_relation(r.name, r.head_type, r.tail_type);
  for (const RelationDef& r : g.relations()) {
    bool is_mirror = std::find(mirror_rels.begin(), mirror_rels.end(),
                               r.relation_id) != mirror_rels.end();
    for (int h : g.entities_of_type(r.head_type)) {
      for (int t : g.neighbors(h, r.relation_id)) {
        if (r.relation_id == rel_ui && removed.count({h, t})) continue;
        if (is_mirror && removed.count({t, h})) continue;
        b.add_triple(h, r.relation_id, t);
      }
    }
  }
  return b.build();
}

MetricReport compute_metrics(const std::map<int, std::vector<int>>& recs,
                             const Split& split, int top_n) {
  if (top_n <= 0) throw Error("compute_metrics: top_n must be positive");
  for (const auto& [ug, ranked] : recs) {
    auto it = split.users.find(ug);
    if (it == split.users.end())
      throw Error("compute_metrics: user " + std::to_string(ug) +
                  " absent from split");
    for (int item : ranked)
      if (std::binary_search(it->second.train.begin(), it->second.train.end(),
                             item))
        throw Error("compute_metrics: recommendation for user " +
                    std::to_string(ug) + " contains train positive " +
                    std::to_string(item));
  }

  MetricReport report;
  report.top_n = top_n;
  double ndcg_sum = 0, recall_sum = 0, hit_sum = 0, prec_sum = 0;
  for (const auto& [ug, us] : split.users) {
    MetricReport::PerUser pu;
    pu.user_global = ug;
    pu.n_test = static_cast<int>(us.test.size());
    std::vector<int> ranked;
    auto it = recs.find(ug);
    if (it != recs.end()) ranked = it->second;
    if (static_cast<int>(ranked.size()) > top_n)
      ranked.resize(static_cast<size_t>(top_n));

    double dcg = 0.0;
    int hits = 0;
    for (size_t pos = 0; pos < ranked.size(); ++pos) {
      if (std::binary_search(us.test.begin(), us.test.end(), ranked[pos])) {
        ++hits;
        dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
      }
    }
    int ideal = std::min<int>(top_n, static_cast<int>(us.test.size()));
    double idcg = 0.0;
    for (int pos = 0; pos < ideal; ++pos)
      idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    pu.hits = hits;
    pu.ndcg = idcg > 0 ? dcg / idcg : 0.0;
    pu.recall = us.test.empty() ? 0.0
                                : static_cast<double>(hits) /
                                      static_cast<double>(us.test.size());
    pu.hit = hits > 0 ? 1.0 : 0.0;
    pu.precision = static_cast<double>(hits) / static_cast<double>(top_n);
    ndcg_sum += pu.ndcg;
    recall_sum += pu.recall;
    hit_sum += pu.hit;
    prec_sum += pu.precision;
    report.per_user.push_back(pu);
  }
  size_t n = split.users.size();
  if (n > 0) {
    report.ndcg = ndcg_sum / static_cast<double>(n);
    report.recall = recall_sum / static_cast<double>(n);
    report.hit_rate = hit_sum / static_cast<double>(n);
    report.precision = prec_sum / static_cast<double>(n);
  }
  return report;
}

std::string format_metric_table(
    const std::vector<std::pair<std::string, MetricReport>>& rows) {
  size_t label_w = 7;
  for (const auto& [label, _] : rows) label_w = std::max(label_w, label.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_w) + 2) << "variant"
     << std::right << std::setw(9) << "NDCG" << std::setw(9) << "Recall"
     << std::setw(9) << "HR" << std::setw(9) << "Prec." << "\n";
  os << std::fixed << std::setprecision(3);
  for (const auto& [label, r] : rows) {
    os << std::left << std::setw(static_cast<int>(label_w) + 2) << label
       << std::right << std::setw(9) << r.ndcg * 100.0 << std::setw(9)
       << r.recall * 100.0 << std::setw(9) << r.hit_rate * 100.0
       << std::setw(9) << r.precision * 100.0 << "\n";
  }
  return os.str();
}

std::string metric_csv(
    const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::ostringstream os;
  os << "variant,ndcg,recall,hit_rate,precision,top_n\n";
  os << std::setprecision(10);
  for (const auto& [label, r] : rows)
    os << label << "," << r.ndcg * 100.0 << "," << r.recall * 100.0 << ","
       << r.hit_rate * 100.0 << "," << r.precision * 100.0 << "," << r.top_n
       << "\n";
  return os.str();
}

}  // namespace nser
