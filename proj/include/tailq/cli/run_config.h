#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailq/data/split.h"
#include "tailq/data/synthetic.h"
#include "tailq/models/flow.h"
#include "tailq/models/train_config.h"

namespace tailq::cli {

struct RecordingPaths {
  std::filesystem::path tracks;
  std::filesystem::path meta;
};

/// Everything a pipeline run needs. The JSON document mirrors this struct;
/// see default_config_json() for the full key set.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "tailq_out";
  std::size_t workers = 1;

  // data
  std::string source = "synthetic";  // "synthetic" | "highd"
  int dims = 1;
  std::vector<RecordingPaths> recordings;
  std::size_t synthetic_samples = 250000;
  data::SyntheticSpec synthetic;
  data::SplitRatios split;
  int frame_stride = 1;
  double feature_cap = data::kDefaultFeatureCap;
  bool oversample = false;
  double bin_width = 0.2;

  // models
  std::vector<double> qr_levels;
  models::TrainConfig qr;
  std::vector<models::FlowKind> flow_kinds;
  models::TrainConfig flow = models::default_flow_config();

  // eval
  std::vector<std::string> eval_methods;
  std::vector<double> eval_levels;

  // rollout
  std::string rollout_model = "qr";
  std::filesystem::path scenario;
  std::vector<double> rollout_levels = {0.5, 0.75, 0.95, 0.99};
  std::size_t horizon = 0;  // 0: whole scenario
};

nlohmann::json default_config_json();
nlohmann::json to_json(const RunConfig& config);

/// Validates every field. Unknown keys and type mismatches raise ConfigError
/// naming the dotted key path.
RunConfig parse_run_config(const nlohmann::json& doc);

/// Applies "a.b.c=value" to a config document. The value is parsed as JSON
/// when possible and taken as a string otherwise. The key must exist.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads an optional config file, then environment overrides
/// (TAILQ_OUT_DIR, TAILQ_WORKERS), then --set assignments.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides);

}  // namespace tailq::cli
