#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "tailq/cli/run_config.h"

namespace tailq::cli {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitTraining = 4;
inline constexpr int kExitMissingArtifact = 5;

/// Maps a thrown error onto the exit-code contract (1 for anything unexpected).
int exit_code_for(const std::exception& e);

/// Output layout under config.output_dir.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path split(const std::string& name) const { return data_dir() / (name + ".csv"); }
  std::filesystem::path manifest() const { return data_dir() / "manifest.json"; }
  std::filesystem::path models_dir() const { return root / "models"; }
  std::filesystem::path qr_checkpoint(double level) const;
  std::filesystem::path flow_checkpoint(models::FlowKind kind) const;
  std::filesystem::path logs_dir() const { return root / "logs"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path rollout_dir() const { return root / "rollout"; }
};

void cmd_prepare(const RunConfig& config, std::ostream& log);
void cmd_train_qr(const RunConfig& config, std::ostream& log);
void cmd_train_flow(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);

struct RolloutRequest {
  std::optional<std::filesystem::path> scenario;  // overrides rollout.scenario
  std::optional<std::vector<double>> levels;      // overrides rollout.levels
};
void cmd_rollout(const RunConfig& config, const RolloutRequest& request, std::ostream& log);

struct SynthRequest {
  std::optional<std::filesystem::path> samples_out;   // default <out>/synth/samples.csv
  std::optional<std::filesystem::path> scenario_out;  // default <out>/synth/scenario.json
  std::size_t scenario_steps = 1500;
};
void cmd_synth(const RunConfig& config, const SynthRequest& request, std::ostream& log);

/// Keeps the first occurrence of each level, in order. Reports duplicates.
std::vector<double> dedupe_levels(const std::vector<double>& levels, std::vector<double>* duplicates = nullptr);

}  // namespace tailq::cli
