#pragma once

#include <map>
#include <string>
#include <vector>

#include "nser/eval.hpp"
#include "nser/executor.hpp"
#include "nser/layout.hpp"
#include "nser/model.hpp"
#include "nser/synth.hpp"
#include "nser/teacher.hpp"

namespace nser {

enum class LayoutStrategy { kUniform, kPrior, kHeuristic };

LayoutStrategy parse_strategy(const std::string& name);
const char* strategy_name(LayoutStrategy s);

struct PipelineOptions {
  LayoutStrategy strategy = LayoutStrategy::kHeuristic;
  int budget = 15;  // K
  // Per-metapath cap k_j (<= 0 means uncapped, i.e. k_j = K). The heuristic
  // value favors short metapaths, so an uncapped allocation collapses onto
  // the 1-hop interaction metapath, whose paths are all excluded from
  // recommendations as train positives; a bounded cap keeps the budget
  // spread across several metapaths.
  int cap = 5;
  int top_n = 10;
  size_t heuristic_samples = 5;  // positive-path samples behind v(u, pi)
  int max_metapath_len = 3;
  uint64_t seed = 7;
};

// Per-user layout for one strategy. Heuristic values are filled for every
// strategy (the layout command reports them); only kHeuristic allocates by
// them.
struct UserLayout {
  LayoutSpec spec;
  MetaLayout layout;
  std::vector<Metapath> metapaths;
};

UserLayout make_user_layout(const Model& m, const Graph& train_g,
                            const EntityRef& u,
                            const std::vector<Metapath>& metapaths,
                            const PipelineOptions& opt);

// Ranked item global ids for every split user: layout -> execute ->
// recommend, excluding the user's train positives.
std::map<int, std::vector<int>> recommend_all_users(const Model& m,
                                                    const Graph& train_g,
                                                    const Split& split,
                                                    const PipelineOptions& opt);

// Baselines for end-to-end comparisons.
std::map<int, std::vector<int>> teacher_topn(const TeacherModel& t,
                                             const Graph& g,
                                             const Split& split, int top_n);
std::map<int, std::vector<int>> random_topn(const Graph& g, const Split& split,
                                            int top_n, uint64_t seed);

struct ExperimentConfig {
  double split_ratio = 0.7;
  TrainConfig train;
  TeacherConfig teacher;
  PipelineOptions pipeline;
  std::vector<float> lambdas;           // empty -> {train.lambda}
  std::vector<LayoutStrategy> strategies;  // empty -> {pipeline.strategy}
  uint64_t seed = 7;
};

struct ExperimentRow {
  std::string label;
  float lambda = 0.0f;
  LayoutStrategy strategy = LayoutStrategy::kHeuristic;
  MetricReport report;
};

// One row per (lambda, strategy) variant: split, teacher, per-lambda model
// training, per-strategy recommendation, metrics.
std::vector<ExperimentRow> run_experiment(const Graph& g,
                                          const ExperimentConfig& cfg);

}  // namespace nser
