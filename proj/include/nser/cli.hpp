#pragma once

#include <string>

#include "nser/config.hpp"

namespace nser {

// Resolved invocation: merged config (flags win over the config file) plus
// positional paths. Graph artifacts are a file pair addressed by a stem:
// "<stem>.entities.tsv" and "<stem>.triples.tsv".
struct CliInvocation {
  KvConfig cfg;
  std::string out_dir = "out";
  std::string graph_stem;
  std::string model_path;
  std::string teacher_path;
  std::string entities_path;
  std::string triples_path;
  std::string user;
  std::string item;
};

int cmd_ingest(const CliInvocation& inv);
int cmd_gen_synth(const CliInvocation& inv);
int cmd_train_teacher(const CliInvocation& inv);
int cmd_train(const CliInvocation& inv);
int cmd_layout(const CliInvocation& inv);
int cmd_recommend(const CliInvocation& inv);
int cmd_explain(const CliInvocation& inv);
int cmd_evaluate(const CliInvocation& inv);
int cmd_experiment(const CliInvocation& inv);

// Full argv entry point (exposed so tests can drive commands in-process).
int run_cli(int argc, const char* const* argv);

}  // namespace nser
