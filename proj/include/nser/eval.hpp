#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nser/graph.hpp"
#include "nser/rng.hpp"

namespace nser {

// Per-user partition of interaction positives. Users that cannot keep at
// least one item on each side are dropped (counted in dropped_users).
struct Split {
  struct UserSplit {
    std::vector<int> train;  // item global ids, ascending
    std::vector<int> test;
  };
  std::map<int, UserSplit> users;  // keyed by user global id
  int dropped_users = 0;
};

Split make_split(const Graph& g, double train_ratio, uint64_t seed);

// Copy of g with each split user's test interactions removed, along with any
// mirror triples (item->user edges between the same pair), so held-out
// interactions cannot leak through inverse relations. Users not in the split
// keep all interactions.
Graph apply_split(const Graph& g, const Split& split);

struct MetricReport {
  struct PerUser {
    int user_global = -1;
    double ndcg = 0, recall = 0, hit = 0, precision = 0;
    int hits = 0;
    int n_test = 0;
  };
  double ndcg = 0, recall = 0, hit_rate = 0, precision = 0;  // macro means
  int top_n = 0;
  std::vector<PerUser> per_user;
};

// Binary-relevance metrics at cutoff N, macro-averaged over the split's test
// users. `recs` maps user global id -> ranked item global ids (descending).
// NDCG uses log2 discounts with IDCG over min(N, |test positives|). Throws
// when recs contains a user absent from the split or a train positive.
MetricReport compute_metrics(const std::map<int, std::vector<int>>& recs,
                             const Split& split, int top_n);

// Aligned-text table; one row per labelled report.
std::string format_metric_table(
    const std::vector<std::pair<std::string, MetricReport>>& rows);
// CSV with a header row; values as percentages.
std::string metric_csv(
    const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace nser
