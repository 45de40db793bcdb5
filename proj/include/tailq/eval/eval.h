#pragma once

// Quantile-loss tables: one row per method, one column per level, each cell
// the mean pinball loss on a test split in raw action units.

#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "tailq/data/sample.h"
#include "tailq/models/quantile_model.h"
#include "tailq/sim/rollout.h"

namespace tailq::eval {

struct EvalRow {
  std::string method;
  std::vector<double> losses;       // one per table level
  std::vector<std::size_t> counts;  // test pairs behind each cell (per dimension)

  bool operator==(const EvalRow&) const = default;
};

struct EvalTable {
  std::vector<double> levels;
  std::vector<EvalRow> rows;

  bool operator==(const EvalTable&) const = default;
};

/// Mean pinball loss of one action dimension at one level. Dimension j > 0
/// is conditioned on the ground-truth earlier actions.
double eval_dimension(const models::QuantileModel& model, std::span<const data::Sample> test, double alpha,
                      std::size_t dim);

/// Row for one model. With two action dimensions the cell is the unweighted
/// mean of the two per-dimension means. Throws DataError on an empty split;
/// model errors (such as a missing regressor level) propagate.
EvalRow eval_method(const models::QuantileModel& model, std::span<const data::Sample> test,
                    std::span<const double> levels, std::string method);

/// Row for the state-independent empirical-quantile baseline fitted on train.
EvalRow baseline_unconditional(std::span<const data::Sample> train, std::span<const data::Sample> test,
                               std::span<const double> levels, int dims);

// Table CSV: header "method,<level>,...,n", levels written in their shortest
// round-trip decimal form, n the per-dimension test count of the row.
std::string table_to_csv(const EvalTable& table);
EvalTable table_from_csv(const std::filesystem::path& path);
nlohmann::json table_to_json(const EvalTable& table);
EvalTable table_from_json(const nlohmann::json& j);

enum class ExportFormat { kCsv, kJson };
void export_table(const EvalTable& table, const std::filesystem::path& path, ExportFormat format);

// Trace CSV: header "time,accel,velocity,dhw,thw,ttc".
std::string trace_to_csv(const sim::RolloutTrace& trace);
nlohmann::json trace_to_json(const sim::RolloutTrace& trace);
/// Sidecar manifest entry: model id, level and terminal flag.
nlohmann::json trace_manifest(const sim::RolloutTrace& trace, const std::string& model, double alpha);
void export_trace(const sim::RolloutTrace& trace, const std::filesystem::path& path, ExportFormat format);

}  // namespace tailq::eval
