#include "tailq/cli/commands.h"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "tailq/data/highd.h"
#include "tailq/data/normalizer.h"
#include "tailq/data/sample_store.h"
#include "tailq/error.h"
#include "tailq/eval/eval.h"
#include "tailq/io/csv.h"
#include "tailq/models/flow_train.h"
#include "tailq/models/quantile_regressor.h"
#include "tailq/sim/rollout.h"

namespace tailq::cli {
namespace {

using nlohmann::json;

// Runs tasks 0..n-1 on up to `workers` threads; rethrows the first failure
// (lowest task index) after all threads have joined.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Independent, stable stream per task: splitmix64 over seed and an FNV-1a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifactError("missing artifact: " + path.string());
  const json j = json::parse(io::read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("not valid JSON: " + path.string());
  return j;
}

std::vector<data::Sample> read_split(const Layout& layout, const std::string& name, int dims) {
  const auto path = layout.split(name);
  if (!std::filesystem::exists(path)) {
    throw MissingArtifactError("missing prepared split " + path.string() + " (run prepare first)");
  }
  auto file = data::read_samples_csv(path);
  if (file.dims != dims) {
    throw DataError(path.string() + " holds " + std::to_string(file.dims) + "D samples, config asks for " +
                    std::to_string(dims) + "D");
  }
  return std::move(file.samples);
}

data::Normalizer read_normalizer(const Layout& layout) {
  const json manifest = read_json(layout.manifest());
  try {
    return data::Normalizer::from_json(manifest.at("normalizer"));
  } catch (const json::exception& e) {
    throw DataError(layout.manifest().string() + ": " + e.what());
  }
}

json histogram_json(const data::ActionHistogram& h) {
  json bins = json::array();
  for (const auto& [bin, count] : h.counts) bins.push_back({{"bin", bin}, {"count", count}});
  return {{"bin_width", h.bin_width}, {"bins", std::move(bins)}};
}

std::string log_csv(const models::TrainingLog& log) {
  std::string out = "epoch,train_loss,validation_loss,constraint_violations\n";
  for (const auto& e : log.epochs) {
    out += std::to_string(e.epoch) + "," + io::format_double(e.train_loss) + "," +
           io::format_double(e.validation_loss) + "," + std::to_string(e.constraint_violations) + "\n";
  }
  return out;
}

json log_summary(const models::TrainingLog& log) {
  return {{"initial_train_loss", log.initial_train_loss},
          {"final_train_loss", log.final_train_loss},
          {"epochs", log.epochs.size()},
          {"units", "standardized"}};
}

models::QuantileRegressorSet load_qr(const Layout& layout, const std::vector<double>& levels) {
  models::QuantileRegressorSet set;
  for (double level : levels) {
    set.add(models::QuantileRegressor::from_json(read_json(layout.qr_checkpoint(level))));
  }
  return set;
}

std::unique_ptr<models::QuantileModel> load_model(const RunConfig& config, const Layout& layout,
                                                  const std::string& method, const std::vector<double>& levels) {
  if (method == "qr") return std::make_unique<models::QuantileRegressorSet>(load_qr(layout, levels));
  if (method == "oracle") return std::make_unique<sim::SyntheticOracleModel>(config.synthetic);
  const auto kind = models::parse_flow_kind(method);
  return std::make_unique<models::ConditionalFlow>(
      models::ConditionalFlow::from_json(read_json(layout.flow_checkpoint(kind))));
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const MissingArtifactError*>(&e)) return kExitMissingArtifact;
  if (dynamic_cast<const TrainingError*>(&e)) return kExitTraining;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e)) {
    return kExitData;
  }
  return 1;
}

std::filesystem::path Layout::qr_checkpoint(double level) const {
  return models_dir() / ("qr_" + io::format_double(level) + ".json");
}

std::filesystem::path Layout::flow_checkpoint(models::FlowKind kind) const {
  return models_dir() / (std::string(models::to_string(kind)) + ".json");
}

std::vector<double> dedupe_levels(const std::vector<double>& levels, std::vector<double>* duplicates) {
  std::vector<double> out;
  for (double a : levels) {
    if (std::find(out.begin(), out.end(), a) == out.end()) {
      out.push_back(a);
    } else if (duplicates != nullptr) {
      duplicates->push_back(a);
    }
  }
  return out;
}

void cmd_prepare(const RunConfig& config, std::ostream& log) {
  const Layout layout{config.output_dir};
  std::vector<data::Sample> samples;
  json skipped = nullptr;
  if (config.source == "synthetic") {
    samples = data::synth_generate(config.synthetic, config.synthetic_samples, derive_seed(config.seed, "synthetic"));
  } else {
    data::SkipReport total;
    for (const auto& rec : config.recordings) {
      for (const auto& p : {rec.tracks, rec.meta}) {
        if (!std::filesystem::exists(p)) throw DataError("highD input not found: " + p.string());
      }
      const data::HighdRecording recording = data::parse_highd(rec.tracks, rec.meta);
      auto extraction = data::extract_pairs(recording, {config.dims, config.feature_cap, config.frame_stride});
      samples.insert(samples.end(), extraction.samples.begin(), extraction.samples.end());
      total.no_leader += extraction.skipped.no_leader;
      total.dangling_leader += extraction.skipped.dangling_leader;
      total.invalid_gap += extraction.skipped.invalid_gap;
      total.stride += extraction.skipped.stride;
    }
    skipped = {{"no_leader", total.no_leader},
               {"dangling_leader", total.dangling_leader},
               {"invalid_gap", total.invalid_gap},
               {"stride", total.stride}};
  }

  data::DatasetSplit split = data::split_dataset(samples, config.split, derive_seed(config.seed, "split"));
  json oversampling = {{"enabled", config.oversample}};
  if (config.oversample) {
    auto result = data::oversample(split.train, config.bin_width, derive_seed(config.seed, "oversample"));
    oversampling["before"] = histogram_json(result.before);
    oversampling["after"] = histogram_json(result.after);
    split.train = std::move(result.samples);
  }
  const data::Normalizer normalizer = data::Normalizer::fit(split.train, config.dims);

  const json manifest = {{"format_version", 1},
                         {"source", config.source},
                         {"dims", config.dims},
                         {"seed", config.seed},
                         {"feature_cap", config.feature_cap},
                         {"frame_stride", config.frame_stride},
                         {"counts",
                          {{"extracted", samples.size()},
                           {"train", split.train.size()},
                           {"validation", split.validation.size()},
                           {"test", split.test.size()}}},
                         {"skipped", skipped},
                         {"oversampling", oversampling},
                         {"normalizer", normalizer.to_json()}};
  const std::string train_csv = data::samples_to_csv(split.train, config.dims);
  const std::string val_csv = data::samples_to_csv(split.validation, config.dims);
  const std::string test_csv = data::samples_to_csv(split.test, config.dims);
  io::write_text_file(layout.split("train"), train_csv);
  io::write_text_file(layout.split("val"), val_csv);
  io::write_text_file(layout.split("test"), test_csv);
  io::write_text_file(layout.manifest(), dump(manifest));
  log << "prepared " << samples.size() << " samples: train " << split.train.size() << ", val "
      << split.validation.size() << ", test " << split.test.size() << " -> " << layout.data_dir().string() << "\n";
}

void cmd_train_qr(const RunConfig& config, std::ostream& log) {
  const Layout layout{config.output_dir};
  const auto train = read_split(layout, "train", config.dims);
  const auto val = read_split(layout, "val", config.dims);
  const auto normalizer = read_normalizer(layout);
  const auto levels = dedupe_levels(config.qr_levels);
  std::mutex log_mutex;
  parallel_for(levels.size(), config.workers, [&](std::size_t i) {
    const double level = levels[i];
    const std::string tag = "qr_" + io::format_double(level);
    auto result = models::qr_train(train, val, QuantileLevel(level), normalizer, config.qr,
                                   derive_seed(config.seed, tag));
    io::write_text_file(layout.qr_checkpoint(level), dump(result.model.to_json()));
    io::write_text_file(layout.logs_dir() / (tag + ".csv"), log_csv(result.log));
    io::write_text_file(layout.logs_dir() / (tag + ".json"), dump(log_summary(result.log)));
    const std::lock_guard lock(log_mutex);
    log << "trained " << tag << ": train loss " << result.log.initial_train_loss << " -> "
        << result.log.final_train_loss << "\n";
  });
}

void cmd_train_flow(const RunConfig& config, std::ostream& log) {
  const Layout layout{config.output_dir};
  const auto train = read_split(layout, "train", config.dims);
  const auto val = read_split(layout, "val", config.dims);
  const auto normalizer = read_normalizer(layout);
  std::mutex log_mutex;
  parallel_for(config.flow_kinds.size(), config.workers, [&](std::size_t i) {
    const auto kind = config.flow_kinds[i];
    const std::string tag(models::to_string(kind));
    auto result = models::flow_train(train, val, kind, normalizer, config.flow, derive_seed(config.seed, tag));
    std::size_t violations = 0;
    for (const auto& e : result.log.epochs) violations += e.constraint_violations;
    io::write_text_file(layout.flow_checkpoint(kind), dump(result.model.to_json()));
    io::write_text_file(layout.logs_dir() / (tag + ".csv"), log_csv(result.log));
    io::write_text_file(layout.logs_dir() / (tag + ".json"), dump(log_summary(result.log)));
    const std::lock_guard lock(log_mutex);
    log << "trained " << tag << ": train loss " << result.log.initial_train_loss << " -> "
        << result.log.final_train_loss << ", constraint violations " << violations << "\n";
  });
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  const Layout layout{config.output_dir};
  const auto train = read_split(layout, "train", config.dims);
  const auto test = read_split(layout, "test", config.dims);
  // Load every model before computing anything so a missing checkpoint
  // fails the command without partial output.
  std::vector<std::unique_ptr<models::QuantileModel>> loaded;
  for (const auto& method : config.eval_methods) {
    loaded.push_back(load_model(config, layout, method, config.eval_levels));
  }
  eval::EvalTable table{config.eval_levels, std::vector<eval::EvalRow>(loaded.size())};
  parallel_for(loaded.size(), config.workers, [&](std::size_t i) {
    table.rows[i] = eval::eval_method(*loaded[i], test, config.eval_levels, config.eval_methods[i]);
  });
  table.rows.push_back(eval::baseline_unconditional(train, test, config.eval_levels, config.dims));
  eval::export_table(table, layout.eval_dir() / "table.csv", eval::ExportFormat::kCsv);
  eval::export_table(table, layout.eval_dir() / "table.json", eval::ExportFormat::kJson);
  log << eval::table_to_csv(table);
}

void cmd_rollout(const RunConfig& config, const RolloutRequest& request, std::ostream& log) {
  const Layout layout{config.output_dir};
  std::vector<double> duplicates;
  const auto levels = dedupe_levels(request.levels.value_or(config.rollout_levels), &duplicates);
  for (double d : duplicates) log << "warning: duplicate rollout level " << io::format_double(d) << " ignored\n";
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("rollout levels must lie in (0, 1)");
  }
  const auto scenario_path = request.scenario.value_or(config.scenario);
  if (scenario_path.empty()) throw ConfigError("no scenario given (rollout.scenario or --scenario)");
  const sim::Scenario scenario = sim::Scenario::from_json(read_json(scenario_path));
  const std::size_t horizon = config.horizon == 0 ? scenario.length() : config.horizon;
  scenario.validate(horizon);
  const auto model = load_model(config, layout, config.rollout_model, levels);

  std::vector<sim::RolloutTrace> traces(levels.size());
  parallel_for(levels.size(), config.workers,
               [&](std::size_t i) { traces[i] = sim::rollout(*model, levels[i], scenario, horizon); });
  json entries = json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string file = config.rollout_model + "_alpha_" + io::format_double(levels[i]) + ".csv";
    eval::export_trace(traces[i], layout.rollout_dir() / file, eval::ExportFormat::kCsv);
    json entry = eval::trace_manifest(traces[i], config.rollout_model, levels[i]);
    entry["file"] = file;
    entries.push_back(std::move(entry));
    log << file << ": " << traces[i].records.size() << " steps, " << sim::to_string(traces[i].terminal) << "\n";
  }
  io::write_text_file(layout.rollout_dir() / "manifest.json",
                      dump({{"scenario", scenario_path.string()}, {"horizon", horizon}, {"traces", entries}}));
}

void cmd_synth(const RunConfig& config, const SynthRequest& request, std::ostream& log) {
  const Layout layout{config.output_dir};
  const auto samples_path = request.samples_out.value_or(layout.root / "synth" / "samples.csv");
  const auto scenario_path = request.scenario_out.value_or(layout.root / "synth" / "scenario.json");
  const auto samples =
      data::synth_generate(config.synthetic, config.synthetic_samples, derive_seed(config.seed, "synthetic"));
  const auto scenario = sim::synthetic_scenario(request.scenario_steps, derive_seed(config.seed, "scenario"));
  data::write_samples_csv(samples_path, samples, config.dims);
  io::write_text_file(scenario_path, dump(scenario.to_json()));
  log << "wrote " << samples.size() << " samples to " << samples_path.string() << " and a "
      << request.scenario_steps << "-step scenario to " << scenario_path.string() << "\n";
}

}  // namespace tailq::cli
