#include "nser/experiment.hpp"

#include <algorithm>
#include <sstream>

#include "nser/error.hpp"

namespace nser {

LayoutStrategy parse_strategy(const std::string& name) {
  if (name == "uniform") return LayoutStrategy::kUniform;
  if (name == "prior") return LayoutStrategy::kPrior;
  if (name == "heuristic") return LayoutStrategy::kHeuristic;
  throw Error("unknown layout strategy '" + name +
              "' (want uniform|prior|heuristic)");
}

const char* strategy_name(LayoutStrategy s) {
  switch (s) {
    case LayoutStrategy::kUniform: return "uniform";
    case LayoutStrategy::kPrior: return "prior";
    case LayoutStrategy::kHeuristic: return "heuristic";
  }
  return "?";
}

UserLayout make_user_layout(const Model& m, const Graph& train_g,
                            const EntityRef& u,
                            const std::vector<Metapath>& metapaths,
                            const PipelineOptions& opt) {
  UserLayout out;
  out.metapaths = metapaths;
  size_t M = metapaths.size();
  out.spec.budget = opt.budget;
  out.spec.caps.assign(M, opt.cap > 0 ? std::min(opt.cap, opt.budget)
                                      : opt.budget);
  out.spec.values.assign(M, kNegInf);

  Rng rng = substream(opt.seed, "layout." + std::to_string(u.global_id));
  for (size_t j = 0; j < M; ++j)
    out.spec.values[j] =
        heuristic_value(m, train_g, u, metapaths[j], opt.heuristic_samples, rng);

  switch (opt.strategy) {
    case LayoutStrategy::kUniform:
      out.spec.allocation = allocate_uniform(M, opt.budget, rng);
      break;
    case LayoutStrategy::kPrior:
      out.spec.allocation = allocate_prior(out.spec.caps, opt.budget);
      break;
    case LayoutStrategy::kHeuristic:
      out.spec.allocation =
          allocate_budget(out.spec.values, out.spec.caps, opt.budget);
      break;
  }
  out.layout = build_layout(metapaths, out.spec.allocation);
  return out;
}

std::map<int, std::vector<int>> recommend_all_users(
    const Model& m, const Graph& train_g, const Split& split,
    const PipelineOptions& opt) {
  std::vector<Metapath> metapaths =
      enumerate_metapaths(train_g, opt.max_metapath_len);
  std::map<int, std::vector<int>> recs;
  for (const auto& [ug, us] : split.users) {
    EntityRef u = train_g.entity_by_global(ug);
    UserLayout ul = make_user_layout(m, train_g, u, metapaths, opt);
    std::vector<ExecutedPath> paths = execute_layout(m, train_g, u, ul.layout);
    std::set<int> exclude(us.train.begin(), us.train.end());
    RecResult rec = recommend(paths, m, opt.top_n, exclude);
    std::vector<int> ranked;
    for (const RecResult::Item& it : rec.items)
      ranked.push_back(it.item.global_id);
    recs[ug] = std::move(ranked);
  }
  return recs;
}

std::map<int, std::vector<int>> teacher_topn(const TeacherModel& t,
                                             const Graph& g,
                                             const Split& split, int top_n) {
  std::map<int, std::vector<int>> recs;
  const std::vector<int>& items = g.entities_of_type(g.item_type());
  for (const auto& [ug, us] : split.users) {
    EntityRef u = g.entity_by_global(ug);
    std::vector<std::pair<float, int>> scored;
    for (int ig : items) {
      if (std::binary_search(us.train.begin(), us.train.end(), ig)) continue;
      scored.push_back({t.score(g, u, g.entity_by_global(ig)), ig});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<int> ranked;
    for (size_t i = 0; i < scored.size() && i < static_cast<size_t>(top_n); ++i)
      ranked.push_back(scored[i].second);
    recs[ug] = std::move(ranked);
  }
  return recs;
}

std::map<int, std::vector<int>> random_topn(const Graph& g, const Split& split,
                                            int top_n, uint64_t seed) {
  std::map<int, std::vector<int>> recs;
  const std::vector<int>& items = g.entities_of_type(g.item_type());
  for (const auto& [ug, us] : split.users) {
    Rng rng = substream(seed, "random-baseline." + std::to_string(ug));
    std::vector<int> pool;
    for (int ig : items)
      if (!std::binary_search(us.train.begin(), us.train.end(), ig))
        pool.push_back(ig);
    std::vector<int> picked = rng.sample(pool, static_cast<size_t>(top_n));
    recs[ug] = std::move(picked);
  }
  return recs;
}

std::vector<ExperimentRow> run_experiment(const Graph& g,
                                          const ExperimentConfig& cfg) {
  std::vector<float> lambdas =
      cfg.lambdas.empty() ? std::vector<float>{cfg.train.lambda} : cfg.lambdas;
  std::vector<LayoutStrategy> strategies =
      cfg.strategies.empty() ? std::vector<LayoutStrategy>{cfg.pipeline.strategy}
                             : cfg.strategies;

  Split split = make_split(g, cfg.split_ratio, cfg.seed);
  Graph train_g = apply_split(g, split);
  TeacherConfig tcfg = cfg.teacher;
  TeacherModel teacher = train_teacher(train_g, tcfg, cfg.seed);

  std::vector<ExperimentRow> rows;
  for (float lambda : lambdas) {
    TrainConfig mcfg = cfg.train;
    mcfg.lambda = lambda;
    mcfg.seed = cfg.seed;
    TrainResult tr = train(train_g, teacher, mcfg);
    for (LayoutStrategy strategy : strategies) {
      PipelineOptions opt = cfg.pipeline;
      opt.strategy = strategy;
      opt.seed = cfg.seed;
      opt.max_metapath_len = mcfg.max_metapath_len;
      auto recs = recommend_all_users(tr.model, train_g, split, opt);
      ExperimentRow row;
      row.lambda = lambda;
      row.strategy = strategy;
      std::ostringstream label;
      label << "lambda=" << lambda << " layout=" << strategy_name(strategy);
      row.label = label.str();
      row.report = compute_metrics(recs, split, opt.top_n);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace nser
