#include "tailq/eval/eval.h"

#include "tailq/error.h"
#include "tailq/io/csv.h"
#include "tailq/models/unconditional.h"
#include "tailq/quantile/quantile.h"

namespace tailq::eval {
namespace {

int feature_dims(const models::QuantileModel& model) {
  return model.feature_count() == data::feature_count(2) ? 2 : 1;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

double eval_dimension(const models::QuantileModel& model, std::span<const data::Sample> test, double alpha,
                      std::size_t dim) {
  if (test.empty()) throw DataError("evaluation needs a nonempty test split");
  const QuantileLevel level(alpha);
  const int fdims = feature_dims(model);
  double sum = 0.0;
  for (const auto& s : test) {
    const auto features = s.state.to_vector(fdims);
    const std::span<const double> prefix(s.action.data(), dim);
    sum += tal(s.action[dim], model.quantile(features, alpha, dim, prefix), level);
  }
  return sum / static_cast<double>(test.size());
}

EvalRow eval_method(const models::QuantileModel& model, std::span<const data::Sample> test,
                    std::span<const double> levels, std::string method) {
  if (test.empty()) throw DataError("evaluation needs a nonempty test split");
  EvalRow row{std::move(method), {}, {}};
  const auto dims = static_cast<std::size_t>(model.dims());
  for (double alpha : levels) {
    double cell = 0.0;
    for (std::size_t j = 0; j < dims; ++j) cell += eval_dimension(model, test, alpha, j);
    row.losses.push_back(cell / static_cast<double>(dims));
    row.counts.push_back(test.size());
  }
  return row;
}

EvalRow baseline_unconditional(std::span<const data::Sample> train, std::span<const data::Sample> test,
                               std::span<const double> levels, int dims) {
  const models::UnconditionalQuantiles baseline(train, dims);
  return eval_method(baseline, test, levels, baseline.name());
}

std::string table_to_csv(const EvalTable& table) {
  std::string out = "method";
  for (double level : table.levels) out += "," + io::format_double(level);
  out += ",n\n";
  for (const auto& row : table.rows) {
    if (row.losses.size() != table.levels.size()) throw ShapeError("eval row " + row.method + " has wrong width");
    out += row.method;
    for (double v : row.losses) out += "," + io::format_double(v);
    out += "," + std::to_string(row.counts.empty() ? 0 : row.counts.front()) + "\n";
  }
  return out;
}

EvalTable table_from_csv(const std::filesystem::path& path) {
  const io::CsvTable csv = io::read_csv(path);
  if (csv.header.size() < 2 || csv.header.front() != "method" || csv.header.back() != "n") {
    throw DataError(path.string() + ": not an evaluation table");
  }
  EvalTable table;
  for (std::size_t c = 1; c + 1 < csv.header.size(); ++c) {
    table.levels.push_back(io::parse_double(csv.header[c], 1, "header"));
  }
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& cells = csv.rows[r];
    const std::size_t line = csv.line_numbers[r];
    EvalRow row{cells.front(), {}, {}};
    const auto n = static_cast<std::size_t>(io::parse_integer(cells.back(), line, "n"));
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
      row.losses.push_back(io::parse_double(cells[c], line, csv.header[c]));
      row.counts.push_back(n);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json table_to_json(const EvalTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"method", row.method}, {"losses", row.losses}, {"counts", row.counts}});
  }
  return {{"levels", table.levels}, {"rows", std::move(rows)}};
}

EvalTable table_from_json(const nlohmann::json& j) {
  try {
    EvalTable table;
    table.levels = j.at("levels").get<std::vector<double>>();
    for (const auto& r : j.at("rows")) {
      table.rows.push_back({r.at("method").get<std::string>(), r.at("losses").get<std::vector<double>>(),
                            r.at("counts").get<std::vector<std::size_t>>()});
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed evaluation table: ") + e.what());
  }
}

void export_table(const EvalTable& table, const std::filesystem::path& path, ExportFormat format) {
  io::write_text_file(path, format == ExportFormat::kCsv ? table_to_csv(table) : dump(table_to_json(table)));
}

std::string trace_to_csv(const sim::RolloutTrace& trace) {
  std::string out = "time,accel,velocity,dhw,thw,ttc\n";
  for (const auto& r : trace.records) {
    for (double v : {r.time, r.accel, r.velocity, r.dhw, r.thw}) out += io::format_double(v) + ",";
    out += io::format_double(r.ttc) + "\n";
  }
  return out;
}

nlohmann::json trace_to_json(const sim::RolloutTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"time", r.time}, {"accel", r.accel}, {"velocity", r.velocity}, {"dhw", r.dhw},
                       {"thw", r.thw}, {"ttc", r.ttc}});
  }
  return {{"terminal", std::string(sim::to_string(trace.terminal))}, {"records", std::move(records)}};
}

nlohmann::json trace_manifest(const sim::RolloutTrace& trace, const std::string& model, double alpha) {
  return {{"model", model},
          {"alpha", alpha},
          {"terminal", std::string(sim::to_string(trace.terminal))},
          {"records", trace.records.size()}};
}

void export_trace(const sim::RolloutTrace& trace, const std::filesystem::path& path, ExportFormat format) {
  io::write_text_file(path, format == ExportFormat::kCsv ? trace_to_csv(trace) : dump(trace_to_json(trace)));
}

}  // namespace tailq::eval
