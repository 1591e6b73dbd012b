#include "nser/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nser/checkpoint.hpp"
#include "nser/error.hpp"
#include "nser/eval.hpp"
#include "nser/executor.hpp"
#include "nser/experiment.hpp"
#include "nser/layout.hpp"
#include "nser/log.hpp"
#include "nser/model.hpp"
#include "nser/synth.hpp"
#include "nser/teacher.hpp"

namespace nser {

namespace {

namespace fs = std::filesystem;

uint64_t root_seed(const KvConfig& cfg) {
  return static_cast<uint64_t>(cfg.get_int("seed", 7));
}

TrainConfig train_config(const KvConfig& cfg) {
  TrainConfig t;
  t.dim = static_cast<int>(cfg.get_int("train.dim", t.dim));
  t.lr = static_cast<float>(cfg.get_double("train.lr", t.lr));
  t.momentum = static_cast<float>(cfg.get_double("train.momentum", t.momentum));
  t.epochs = static_cast<int>(cfg.get_int("train.epochs", t.epochs));
  t.batch_size = static_cast<int>(cfg.get_int("train.batch", t.batch_size));
  t.lambda = static_cast<float>(cfg.get_double("train.lambda", t.lambda));
  t.paths_per_user =
      static_cast<int>(cfg.get_int("train.paths_per_user", t.paths_per_user));
  t.negatives = static_cast<int>(cfg.get_int("train.negatives", t.negatives));
  std::string pool = cfg.get_str("train.negative_pool", "positives");
  if (pool == "positives")
    t.negative_pool = NegativePool::kPositives;
  else if (pool == "all_items")
    t.negative_pool = NegativePool::kAllItems;
  else
    throw Error("train.negative_pool must be positives|all_items");
  t.chain_predecessors = cfg.get_bool("train.chain", t.chain_predecessors);
  t.max_metapath_len =
      static_cast<int>(cfg.get_int("kg.max_metapath_len", t.max_metapath_len));
  t.seed = root_seed(cfg);
  return t;
}

TeacherConfig teacher_config(const KvConfig& cfg) {
  TeacherConfig t;
  t.dim = static_cast<int>(cfg.get_int("teacher.dim", t.dim));
  t.epochs = static_cast<int>(cfg.get_int("teacher.epochs", t.epochs));
  t.lr = static_cast<float>(cfg.get_double("teacher.lr", t.lr));
  t.negatives = static_cast<int>(cfg.get_int("teacher.negatives", t.negatives));
  return t;
}

PipelineOptions pipeline_options(const KvConfig& cfg) {
  PipelineOptions p;
  p.budget = static_cast<int>(cfg.get_int("layout.budget", p.budget));
  p.cap = static_cast<int>(cfg.get_int("layout.cap", p.cap));
  p.top_n = static_cast<int>(cfg.get_int("eval.topn", p.top_n));
  p.heuristic_samples = static_cast<size_t>(
      cfg.get_int("layout.samples", static_cast<long long>(p.heuristic_samples)));
  p.max_metapath_len =
      static_cast<int>(cfg.get_int("kg.max_metapath_len", p.max_metapath_len));
  p.strategy = parse_strategy(cfg.get_str("layout.strategy", "heuristic"));
  p.seed = root_seed(cfg);
  return p;
}

SynthSpec synth_spec(const KvConfig& cfg) {
  SynthSpec s;
  s.users = static_cast<int>(cfg.get_int("synth.users", s.users));
  s.items = static_cast<int>(cfg.get_int("synth.items", s.items));
  s.brands = static_cast<int>(cfg.get_int("synth.brands", s.brands));
  s.categories = static_cast<int>(cfg.get_int("synth.categories", s.categories));
  s.features = static_cast<int>(cfg.get_int("synth.features", s.features));
  s.purchases_per_user = static_cast<int>(
      cfg.get_int("synth.purchases_per_user", s.purchases_per_user));
  s.features_per_item = static_cast<int>(
      cfg.get_int("synth.features_per_item", s.features_per_item));
  s.boost = cfg.get_double("synth.boost", s.boost);
  s.mention_prob = cfg.get_double("synth.mention_prob", s.mention_prob);
  return s;
}

double split_ratio(const KvConfig& cfg) {
  return cfg.get_double("eval.split_ratio", 0.7);
}

void ensure_out(const std::string& dir) { fs::create_directories(dir); }

Graph load_graph(const std::string& stem) {
  if (stem.empty()) throw Error("graph required (--graph <stem>)");
  return ingest_triples(stem + ".entities.tsv", stem + ".triples.tsv");
}

void write_graph(const Graph& g, const std::string& stem) {
  emit_graph(g, stem + ".entities.tsv", stem + ".triples.tsv");
}

Model load_model(const std::string& path, const Graph& g) {
  if (path.empty()) throw Error("model checkpoint required (--model <file>)");
  if (!fs::exists(path))
    throw Error("model checkpoint required: " + path + " does not exist");
  return Model::from_store(g, load_checkpoint(path, "model"));
}

TeacherModel load_teacher(const std::string& path) {
  if (path.empty())
    throw Error("teacher checkpoint required (--teacher <file>)");
  if (!fs::exists(path))
    throw Error("teacher checkpoint required: " + path + " does not exist");
  return TeacherModel::from_store(load_checkpoint(path, "teacher"));
}

void print_stats(const Graph& g) {
  IngestStats s = graph_stats(g);
  std::ostringstream os;
  os << "entities:";
  for (int t = 0; t < g.type_count(); ++t)
    os << " " << g.type_name(t) << "=" << s.entities_per_type[static_cast<size_t>(t)];
  log_info(os.str());
  std::ostringstream os2;
  os2 << "triples:";
  for (const RelationDef& r : g.relations())
    os2 << " " << r.name << "="
        << s.triples_per_relation[static_cast<size_t>(r.relation_id)];
  log_info(os2.str());
}

std::string metapath_names(const Graph& g, const Metapath& pi) {
  std::string out;
  for (size_t i = 0; i < pi.relations.size(); ++i) {
    if (i) out += " ";
    out += g.relation(pi.relations[i]).name;
  }
  return out;
}

// Train-split positives of u; falls back to all interactions for users the
// split dropped.
std::set<int> train_exclusions(const Graph& g, const Split& split,
                               const EntityRef& u) {
  auto it = split.users.find(u.global_id);
  if (it != split.users.end())
    return std::set<int>(it->second.train.begin(), it->second.train.end());
  const std::vector<int>& all = g.neighbors(u, g.interaction_relation());
  return std::set<int>(all.begin(), all.end());
}

}  // namespace

int cmd_ingest(const CliInvocation& inv) {
  if (inv.entities_path.empty() || inv.triples_path.empty())
    throw Error("ingest needs --entities and --triples");
  IngestStats stats;
  Graph g = ingest_triples(inv.entities_path, inv.triples_path, &stats);
  print_stats(g);
  if (stats.duplicate_triples)
    log_warn(std::to_string(stats.duplicate_triples) +
             " duplicate triples dropped");
  ensure_out(inv.out_dir);
  write_graph(g, inv.out_dir + "/graph");
  log_info("wrote " + inv.out_dir + "/graph.{entities,triples}.tsv");
  return 0;
}

int cmd_gen_synth(const CliInvocation& inv) {
  SynthSpec spec = synth_spec(inv.cfg);
  SynthTruth truth;
  Graph g = gen_synth(spec, root_seed(inv.cfg), &truth);
  print_stats(g);
  ensure_out(inv.out_dir);
  write_graph(g, inv.out_dir + "/graph");
  std::ofstream tf(inv.out_dir + "/truth.tsv", std::ios::trunc);
  tf << "user\tpreferred_brand\tpreferred_category\tpreferred_fraction\n";
  for (int uv = 0; uv < spec.users; ++uv)
    tf << "user_" << uv << "\tbrand_" << truth.preferred_brand[static_cast<size_t>(uv)]
       << "\tcategory_" << truth.preferred_category[static_cast<size_t>(uv)]
       << "\t" << truth.preferred_fraction[static_cast<size_t>(uv)] << "\n";
  log_info("wrote " + inv.out_dir + "/graph.{entities,triples}.tsv and truth.tsv");
  return 0;
}

int cmd_train_teacher(const CliInvocation& inv) {
  Graph g = load_graph(inv.graph_stem);
  Split split = make_split(g, split_ratio(inv.cfg), root_seed(inv.cfg));
  Graph train_g = apply_split(g, split);
  std::vector<float> losses;
  TeacherModel t =
      train_teacher(train_g, teacher_config(inv.cfg), root_seed(inv.cfg), &losses);
  ensure_out(inv.out_dir);
  save_checkpoint(inv.out_dir + "/teacher.ckpt", t.to_store(), "teacher");
  std::ofstream lf(inv.out_dir + "/teacher_train_log.csv", std::ios::trunc);
  lf << "epoch,mean_logistic_loss\n";
  for (size_t e = 0; e < losses.size(); ++e)
    lf << e << "," << losses[e] << "\n";
  log_info("wrote " + inv.out_dir + "/teacher.ckpt");
  return 0;
}

int cmd_train(const CliInvocation& inv) {
  Graph g = load_graph(inv.graph_stem);
  Split split = make_split(g, split_ratio(inv.cfg), root_seed(inv.cfg));
  Graph train_g = apply_split(g, split);
  TeacherModel teacher = load_teacher(inv.teacher_path);
  TrainConfig cfg = train_config(inv.cfg);
  TrainResult result = train(train_g, teacher, cfg);
  for (const EpochLog& e : result.log)
    log_info("epoch " + std::to_string(e.epoch) + " path_loss " +
             std::to_string(e.mean_path_loss) + " rank_loss " +
             std::to_string(e.mean_rank_loss));
  if (result.degenerate_users)
    log_warn(std::to_string(result.degenerate_users) +
             " users had no positive path for any metapath and were skipped");
  ensure_out(inv.out_dir);
  save_checkpoint(inv.out_dir + "/model.ckpt",
                  result.model.checkpoint_store(), "model");
  write_train_log(inv.out_dir + "/train_log.csv", result.log);
  log_info("wrote " + inv.out_dir + "/model.ckpt");
  return 0;
}

int cmd_layout(const CliInvocation& inv) {
  if (inv.user.empty()) throw Error("layout needs --user");
  Graph g = load_graph(inv.graph_stem);
  Model m = load_model(inv.model_path, g);
  Split split = make_split(g, split_ratio(inv.cfg), root_seed(inv.cfg));
  Graph train_g = apply_split(g, split);
  EntityRef u = train_g.entity(train_g.user_type(), inv.user);
  PipelineOptions opt = pipeline_options(inv.cfg);
  std::vector<Metapath> metapaths =
      enumerate_metapaths(train_g, opt.max_metapath_len);
  UserLayout ul = make_user_layout(m, train_g, u, metapaths, opt);

  std::cout << "metapath allocation for " << inv.user << " (strategy "
            << strategy_name(opt.strategy) << ", budget " << opt.budget
            << "):\n";
  for (size_t j = 0; j < metapaths.size(); ++j) {
    std::cout << "  [" << j << "] " << std::left << std::setw(44)
              << metapath_names(train_g, metapaths[j]) << " v=" << std::setw(12);
    if (ul.spec.values[j] == kNegInf)
      std::cout << "-inf";
    else
      std::cout << ul.spec.values[j];
    std::cout << " y=" << ul.spec.allocation[j] << "\n";
  }
  if (ul.layout.empty()) {
    std::cout << "empty layout: no metapath received a positive allocation "
                 "(user has no positive training paths)\n";
    return 0;
  }
  std::cout << "layout (depth,relation,k):\n"
            << serialize_layout(ul.layout, train_g);
  return 0;
}

namespace {

struct RecRun {
  Graph train_g;
  Split split;
  EntityRef u;
  UserLayout ul;
  std::vector<ExecutedPath> paths;
  RecResult rec;
};

RecRun run_recommendation(const CliInvocation& inv) {
  RecRun run;
  Graph g = load_graph(inv.graph_stem);
  Model m = load_model(inv.model_path, g);
  run.split = make_split(g, split_ratio(inv.cfg), root_seed(inv.cfg));
  run.train_g = apply_split(g, run.split);
  run.u = run.train_g.entity(run.train_g.user_type(), inv.user);
  PipelineOptions opt = pipeline_options(inv.cfg);
  std::vector<Metapath> metapaths =
      enumerate_metapaths(run.train_g, opt.max_metapath_len);
  run.ul = make_user_layout(m, run.train_g, run.u, metapaths, opt);
  run.paths = execute_layout(m, run.train_g, run.u, run.ul.layout);
  run.rec = recommend(run.paths, m, opt.top_n,
                      train_exclusions(run.train_g, run.split, run.u));
  return run;
}

}  // namespace

int cmd_recommend(const CliInvocation& inv) {
  if (inv.user.empty()) throw Error("recommend needs --user");
  RecRun run = run_recommendation(inv);
  ensure_out(inv.out_dir);
  std::ofstream rf(inv.out_dir + "/recommendations.csv", std::ios::trunc);
  rf << "user,rank,item,score,layout_leaf_id,rendered_path\n";
  int rank = 1;
  for (const RecResult::Item& it : run.rec.items) {
    std::cout << rank << ". " << run.train_g.entity_name(it.item)
              << "  score=" << it.score << "\n";
    for (const ExecutedPath& ep : it.paths)
      std::cout << "     via " << explain(ep.path, run.train_g) << "\n";
    const ExecutedPath& best = it.paths.front();
    rf << inv.user << "," << rank << "," << run.train_g.entity_name(it.item)
       << "," << it.score << "," << best.leaf_node << ","
       << explain(best.path, run.train_g) << "\n";
    ++rank;
  }
  if (run.rec.items.empty())
    std::cout << "no recommendations: layout execution produced no paths\n";
  log_info("wrote " + inv.out_dir + "/recommendations.csv");
  return 0;
}

int cmd_explain(const CliInvocation& inv) {
  if (inv.user.empty() || inv.item.empty())
    throw Error("explain needs --user and --item");
  RecRun run = run_recommendation(inv);
  EntityRef item = run.train_g.entity(run.train_g.item_type(), inv.item);
  bool found = false;
  for (const ExecutedPath& ep : run.paths) {
    if (ep.path.end().global_id != item.global_id) continue;
    std::cout << explain(ep.path, run.train_g) << "  (score " << ep.score
              << ")\n";
    found = true;
  }
  if (!found)
    std::cout << "no supporting path exists for (" << inv.user << ", "
              << inv.item << ") under the current layout\n";
  return 0;
}

int cmd_evaluate(const CliInvocation& inv) {
  Graph g = load_graph(inv.graph_stem);
  Model m = load_model(inv.model_path, g);
  TeacherModel teacher = load_teacher(inv.teacher_path);
  Split split = make_split(g, split_ratio(inv.cfg), root_seed(inv.cfg));
  Graph train_g = apply_split(g, split);
  PipelineOptions opt = pipeline_options(inv.cfg);

  auto recs = recommend_all_users(m, train_g, split, opt);
  MetricReport model_report = compute_metrics(recs, split, opt.top_n);
  MetricReport teacher_report =
      compute_metrics(teacher_topn(teacher, train_g, split, opt.top_n), split,
                      opt.top_n);
  MetricReport random_report = compute_metrics(
      random_topn(train_g, split, opt.top_n, root_seed(inv.cfg)), split,
      opt.top_n);

  std::vector<std::pair<std::string, MetricReport>> rows = {
      {"model", model_report},
      {"teacher-only", teacher_report},
      {"random", random_report},
  };
  std::string table = format_metric_table(rows);
  std::cout << table;
  ensure_out(inv.out_dir);
  std::ofstream tf(inv.out_dir + "/metrics.txt", std::ios::trunc);
  tf << table;
  std::ofstream cf(inv.out_dir + "/metrics.csv", std::ios::trunc);
  cf << metric_csv(rows);
  std::ofstream pf(inv.out_dir + "/metrics_per_user.csv", std::ios::trunc);
  pf << "user,ndcg,recall,hit,precision,hits,n_test\n";
  for (const auto& pu : model_report.per_user)
    pf << g.entity_name(g.entity_by_global(pu.user_global)) << "," << pu.ndcg
       << "," << pu.recall << "," << pu.hit << "," << pu.precision << ","
       << pu.hits << "," << pu.n_test << "\n";
  log_info("wrote " + inv.out_dir + "/metrics.{txt,csv} and metrics_per_user.csv");
  return 0;
}

int cmd_experiment(const CliInvocation& inv) {
  Graph g = load_graph(inv.graph_stem);
  ExperimentConfig cfg;
  cfg.split_ratio = split_ratio(inv.cfg);
  cfg.train = train_config(inv.cfg);
  cfg.teacher = teacher_config(inv.cfg);
  cfg.pipeline = pipeline_options(inv.cfg);
  cfg.seed = root_seed(inv.cfg);
  for (double l : inv.cfg.get_list("experiment.lambdas"))
    cfg.lambdas.push_back(static_cast<float>(l));
  for (const std::string& s : inv.cfg.get_str_list("experiment.strategies"))
    cfg.strategies.push_back(parse_strategy(s));

  std::vector<ExperimentRow> rows = run_experiment(g, cfg);
  std::vector<std::pair<std::string, MetricReport>> table_rows;
  for (const ExperimentRow& r : rows) table_rows.push_back({r.label, r.report});
  std::string table = format_metric_table(table_rows);
  std::cout << table;
  ensure_out(inv.out_dir);
  std::ofstream tf(inv.out_dir + "/experiment.txt", std::ios::trunc);
  tf << table;
  std::ofstream cf(inv.out_dir + "/experiment.csv", std::ios::trunc);
  cf << metric_csv(table_rows);
  log_info("wrote " + inv.out_dir + "/experiment.{txt,csv}");
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"neural-symbolic explainable recommendation over knowledge graphs"};
  app.require_subcommand(1);

  CliInvocation inv;
  std::string config_path;
  std::string seed_flag, lambda_flag, budget_flag, topn_flag, strategy_flag;

  app.add_option("--config", config_path, "key-value config file");
  app.add_option("--seed", seed_flag, "root seed (overrides config)");
  app.add_option("--out", inv.out_dir, "output directory");
  app.add_option("--graph", inv.graph_stem,
                 "graph stem (<stem>.entities.tsv / <stem>.triples.tsv)");
  app.add_option("--model", inv.model_path, "model checkpoint");
  app.add_option("--teacher", inv.teacher_path, "teacher checkpoint");
  app.add_option("--user", inv.user, "user entity name");
  app.add_option("--item", inv.item, "item entity name");
  app.add_option("--topn", topn_flag, "recommendation cutoff");
  app.add_option("--lambda", lambda_flag, "ranking-loss weight");
  app.add_option("--budget", budget_flag, "layout path budget K");
  app.add_option("--layout-strategy", strategy_flag,
                 "uniform|prior|heuristic");
  app.add_option("--entities", inv.entities_path, "entity file (ingest)");
  app.add_option("--triples", inv.triples_path, "triple file (ingest)");

  const std::pair<const char*, const char*> subs[] = {
      {"ingest", "validate and canonicalize a graph from entity/triple files"},
      {"gen-synth", "generate a planted-preference synthetic graph"},
      {"train-teacher", "train the matrix-factorization teacher"},
      {"train", "train entity embeddings and neural relation modules"},
      {"layout", "print a user's metapath values, allocation, and layout tree"},
      {"recommend", "execute the layout and rank items with their paths"},
      {"explain", "show every supporting path for a (user, item) pair"},
      {"evaluate", "ranking metrics vs teacher-only and random baselines"},
      {"experiment", "sweep lambda / layout-strategy variants"},
  };
  for (const auto& [name, desc] : subs)
    app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!config_path.empty()) inv.cfg = KvConfig::load(config_path);
    if (!seed_flag.empty()) inv.cfg.set("seed", seed_flag);
    if (!lambda_flag.empty()) inv.cfg.set("train.lambda", lambda_flag);
    if (!budget_flag.empty()) inv.cfg.set("layout.budget", budget_flag);
    if (!topn_flag.empty()) inv.cfg.set("eval.topn", topn_flag);
    if (!strategy_flag.empty()) inv.cfg.set("layout.strategy", strategy_flag);

    std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "ingest") return cmd_ingest(inv);
    if (sub == "gen-synth") return cmd_gen_synth(inv);
    if (sub == "train-teacher") return cmd_train_teacher(inv);
    if (sub == "train") return cmd_train(inv);
    if (sub == "layout") return cmd_layout(inv);
    if (sub == "recommend") return cmd_recommend(inv);
    if (sub == "explain") return cmd_explain(inv);
    if (sub == "evaluate") return cmd_evaluate(inv);
    if (sub == "experiment") return cmd_experiment(inv);
    throw Error("unknown subcommand " + sub);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace nser
