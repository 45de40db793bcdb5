// tailq: prepare data, train quantile models, evaluate them and run
// car-following rollouts. Exit codes: 0 ok, 2 config, 3 data, 4 training,
// 5 missing artifact.

#include <CLI11.hpp>
#include <iostream>

#include "tailq/cli/commands.h"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON run config");
    cmd->add_option("--set", overrides, "override a config key, e.g. --set qr.epochs=5")->take_all();
  }
  tailq::cli::RunConfig load() const {
    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    return tailq::cli::load_run_config(path, overrides);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail-quantile models of driver acceleration"};
  app.require_subcommand(1);

  Common common;
  auto* prepare = app.add_subcommand("prepare", "extract, split and normalize the data set");
  auto* train_qr = app.add_subcommand("train-qr", "train one quantile regressor per level");
  auto* train_flow = app.add_subcommand("train-flow", "train the configured conditional flows");
  auto* eval = app.add_subcommand("eval", "quantile-loss table on the test split");
  auto* rollout = app.add_subcommand("rollout", "closed-loop car-following rollouts");
  auto* synth = app.add_subcommand("synth", "write synthetic samples and a leader scenario");
  for (auto* cmd : {prepare, train_qr, train_flow, eval, rollout, synth}) common.attach(cmd);

  std::string scenario;
  std::vector<double> alphas;
  rollout->add_option("--scenario", scenario, "scenario JSON (overrides rollout.scenario)");
  rollout->add_option("--alpha", alphas, "quantile levels (overrides rollout.levels)");

  std::string samples_out, scenario_out;
  std::size_t steps = 1500;
  synth->add_option("--samples-out", samples_out, "sample CSV path");
  synth->add_option("--scenario-out", scenario_out, "scenario JSON path");
  synth->add_option("--steps", steps, "scenario length in steps")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = common.load();
    if (prepare->parsed()) {
      tailq::cli::cmd_prepare(config, std::cout);
    } else if (train_qr->parsed()) {
      tailq::cli::cmd_train_qr(config, std::cout);
    } else if (train_flow->parsed()) {
      tailq::cli::cmd_train_flow(config, std::cout);
    } else if (eval->parsed()) {
      tailq::cli::cmd_eval(config, std::cout);
    } else if (rollout->parsed()) {
      tailq::cli::RolloutRequest request;
      if (!scenario.empty()) request.scenario = scenario;
      if (!alphas.empty()) request.levels = alphas;
      tailq::cli::cmd_rollout(config, request, std::cout);
    } else if (synth->parsed()) {
      tailq::cli::SynthRequest request;
      if (!samples_out.empty()) request.samples_out = samples_out;
      if (!scenario_out.empty()) request.scenario_out = scenario_out;
      request.scenario_steps = steps;
      tailq::cli::cmd_synth(config, request, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tailq::cli::exit_code_for(e);
  }
  return tailq::cli::kExitOk;
}
