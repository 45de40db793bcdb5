#include "tailq/cli/run_config.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <type_traits>

#include "tailq/error.h"
#include "tailq/quantile/quantile.h"

namespace tailq::cli {
namespace {

using nlohmann::json;

const char* schedule_name(models::LrSchedule s) { return s == models::LrSchedule::kCosine ? "cosine" : "constant"; }

json train_json(const models::TrainConfig& c, bool flow) {
  json j = {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.adam.learning_rate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon},
            {"schedule", schedule_name(c.schedule)},
            {"hidden", c.hidden}};
  if (flow) {
    j["stack_depth"] = c.stack_depth;
    j["mc_draws"] = c.mc_draws;
  }
  return j;
}

std::vector<std::string> all_flow_names() {
  return {"aqf-affine", "aqf-nlsq", "anf-affine", "anf-nlsq"};
}

// Merges src into dst; every key of src must already exist in dst.
void merge_checked(json& dst, const json& src, const std::string& path) {
  if (!src.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, value] : src.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!dst.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    if (dst[key].is_object()) {
      merge_checked(dst[key], value, here);
    } else {
      dst[key] = value;
    }
  }
}

// Typed field access with the dotted path in every error.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  template <class T>
  T get(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError("config key '" + where(key) + "' is missing");
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      // Parsed documents store nonnegative integers as unsigned, built ones as signed.
      const bool ok = v.is_number_integer() && (!std::is_unsigned_v<T> || v.get<std::int64_t>() >= 0);
      if (!ok) throw ConfigError("config key '" + where(key) + "' must be " +
                                 (std::is_unsigned_v<T> ? "a nonnegative integer" : "an integer"));
    }
    if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      const bool ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
                        return e.is_number_integer() && e.get<std::int64_t>() >= 0;
                      });
      if (!ok) throw ConfigError("config key '" + where(key) + "' must be a list of nonnegative integers");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type or is missing");
    }
  }
  Reader sub(const std::string& key) const { return Reader(j_.at(key), where(key)); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "' " + what);
}

std::vector<double> read_levels(const Reader& r, const std::string& key, bool open_interval) {
  const auto levels = r.get<std::vector<double>>(key);
  require(!levels.empty(), r.where(key), "must list at least one level");
  for (double a : levels) {
    const bool ok = open_interval ? (a > 0.0 && a < 1.0) : (a >= 0.0 && a <= 1.0);
    require(ok, r.where(key), "holds a level outside the allowed range");
  }
  return levels;
}

models::TrainConfig read_train(const Reader& r, bool flow) {
  models::TrainConfig c = flow ? models::default_flow_config() : models::TrainConfig{};
  c.epochs = r.get<std::size_t>("epochs");
  c.batch_size = r.get<std::size_t>("batch_size");
  require(c.batch_size > 0, r.where("batch_size"), "must be positive");
  c.adam.learning_rate = r.get<double>("learning_rate");
  require(c.adam.learning_rate > 0.0, r.where("learning_rate"), "must be positive");
  c.adam.beta1 = r.get<double>("beta1");
  c.adam.beta2 = r.get<double>("beta2");
  require(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0, r.where("beta1"), "must lie in [0, 1)");
  require(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0, r.where("beta2"), "must lie in [0, 1)");
  c.adam.epsilon = r.get<double>("epsilon");
  require(c.adam.epsilon > 0.0, r.where("epsilon"), "must be positive");
  const auto schedule = r.get<std::string>("schedule");
  require(schedule == "cosine" || schedule == "constant", r.where("schedule"), "must be 'cosine' or 'constant'");
  c.schedule = schedule == "cosine" ? models::LrSchedule::kCosine : models::LrSchedule::kConstant;
  c.hidden = r.get<std::vector<std::size_t>>("hidden");
  for (std::size_t w : c.hidden) require(w > 0, r.where("hidden"), "widths must be positive");
  if (flow) {
    c.stack_depth = r.get<std::size_t>("stack_depth");
    require(c.stack_depth > 0, r.where("stack_depth"), "must be positive");
    c.mc_draws = r.get<std::size_t>("mc_draws");
    require(c.mc_draws > 0, r.where("mc_draws"), "must be positive");
  }
  return c;
}

}  // namespace

json default_config_json() {
  RunConfig c;
  c.qr_levels.assign(kEvalLevels.begin(), kEvalLevels.end());
  c.eval_levels = c.qr_levels;
  for (auto k : {models::FlowKind::kAqfAffine, models::FlowKind::kAqfNlsq, models::FlowKind::kAnfAffine,
                 models::FlowKind::kAnfNlsq}) {
    c.flow_kinds.push_back(k);
  }
  c.eval_methods = {"qr"};
  for (const auto& n : all_flow_names()) c.eval_methods.push_back(n);
  return to_json(c);
}

json to_json(const RunConfig& c) {
  json recordings = json::array();
  for (const auto& r : c.recordings) recordings.push_back({{"tracks", r.tracks.string()}, {"meta", r.meta.string()}});
  json kinds = json::array();
  for (auto k : c.flow_kinds) kinds.push_back(std::string(models::to_string(k)));
  json flow = train_json(c.flow, true);
  flow["kinds"] = std::move(kinds);
  json qr = train_json(c.qr, false);
  qr["levels"] = c.qr_levels;
  return {{"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"workers", c.workers},
          {"data",
           {{"source", c.source},
            {"dims", c.dims},
            {"recordings", std::move(recordings)},
            {"synthetic",
             {{"samples", c.synthetic_samples},
              {"noise_multiplier", c.synthetic.noise_multiplier},
              {"narrow_weight", c.synthetic.narrow_weight},
              {"wide_scale", c.synthetic.wide_scale}}},
            {"split", {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
            {"frame_stride", c.frame_stride},
            {"feature_cap", c.feature_cap},
            {"oversample", {{"enabled", c.oversample}, {"bin_width", c.bin_width}}}}},
          {"qr", std::move(qr)},
          {"flow", std::move(flow)},
          {"eval", {{"methods", c.eval_methods}, {"levels", c.eval_levels}}},
          {"rollout",
           {{"model", c.rollout_model},
            {"scenario", c.scenario.string()},
            {"levels", c.rollout_levels},
            {"horizon", c.horizon}}}};
}

RunConfig parse_run_config(const json& doc) {
  json merged = default_config_json();
  merge_checked(merged, doc, "");
  const Reader root(merged, "");
  RunConfig c;
  c.seed = root.get<std::uint64_t>("seed");
  c.output_dir = root.get<std::string>("output_dir");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
  c.workers = root.get<std::size_t>("workers");
  require(c.workers > 0, "workers", "must be positive");

  const Reader data = root.sub("data");
  c.source = data.get<std::string>("source");
  require(c.source == "synthetic" || c.source == "highd", "data.source", "must be 'synthetic' or 'highd'");
  c.dims = data.get<int>("dims");
  require(c.dims == 1 || c.dims == 2, "data.dims", "must be 1 or 2");
  const json& recs = data.raw("recordings");
  require(recs.is_array(), "data.recordings", "must be an array");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const std::string where = "data.recordings[" + std::to_string(i) + "]";
    require(recs[i].is_object(), where, "must be an object with 'tracks' and 'meta'");
    for (const auto& [key, value] : recs[i].items()) {
      require(key == "tracks" || key == "meta", where + "." + key, "is not a known key");
    }
    const Reader r(recs[i], where);
    c.recordings.push_back({r.get<std::string>("tracks"), r.get<std::string>("meta")});
  }
  if (c.source == "highd") require(!c.recordings.empty(), "data.recordings", "must list at least one recording");
  const Reader synth = data.sub("synthetic");
  c.synthetic_samples = synth.get<std::size_t>("samples");
  require(c.synthetic_samples >= 3, "data.synthetic.samples", "must be at least 3");
  c.synthetic.noise_multiplier = synth.get<double>("noise_multiplier");
  c.synthetic.narrow_weight = synth.get<double>("narrow_weight");
  c.synthetic.wide_scale = synth.get<double>("wide_scale");
  c.synthetic.dims = c.dims;
  try {
    data::validate(c.synthetic);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("data.synthetic: ") + e.what());
  }
  const Reader split = data.sub("split");
  c.split = {split.get<double>("train"), split.get<double>("validation"), split.get<double>("test")};
  require(c.split.train > 0 && c.split.validation > 0 && c.split.test > 0 &&
              std::abs(c.split.train + c.split.validation + c.split.test - 1.0) < 1e-9,
          "data.split", "ratios must be positive and sum to 1");
  c.frame_stride = data.get<int>("frame_stride");
  require(c.frame_stride >= 1, "data.frame_stride", "must be >= 1");
  c.feature_cap = data.get<double>("feature_cap");
  require(c.feature_cap > 0.0, "data.feature_cap", "must be positive");
  c.synthetic.feature_cap = c.feature_cap;
  const Reader over = data.sub("oversample");
  c.oversample = over.get<bool>("enabled");
  c.bin_width = over.get<double>("bin_width");
  require(c.bin_width > 0.0, "data.oversample.bin_width", "must be positive");

  const Reader qr = root.sub("qr");
  c.qr = read_train(qr, false);
  c.qr_levels = read_levels(qr, "levels", false);

  const Reader flow = root.sub("flow");
  c.flow = read_train(flow, true);
  for (const auto& name : flow.get<std::vector<std::string>>("kinds")) {
    try {
      c.flow_kinds.push_back(models::parse_flow_kind(name));
    } catch (const ConfigError&) {
      throw ConfigError("config key 'flow.kinds' holds unknown flow kind '" + name + "'");
    }
  }

  const Reader eval = root.sub("eval");
  c.eval_methods = eval.get<std::vector<std::string>>("methods");
  for (const auto& m : c.eval_methods) {
    const auto names = all_flow_names();
    const bool known = m == "qr" || m == "oracle" || std::find(names.begin(), names.end(), m) != names.end();
    require(known, "eval.methods", "holds unknown method '" + m + "'");
    require(m != "oracle" || (c.source == "synthetic" && c.dims == 1), "eval.methods",
            "may use 'oracle' only with 1D synthetic data");
  }
  c.eval_levels = read_levels(eval, "levels", true);

  const Reader roll = root.sub("rollout");
  c.rollout_model = roll.get<std::string>("model");
  {
    const auto names = all_flow_names();
    const bool known = c.rollout_model == "qr" || c.rollout_model == "oracle" ||
                       std::find(names.begin(), names.end(), c.rollout_model) != names.end();
    require(known, "rollout.model", "must be qr, oracle or a flow kind");
  }
  c.scenario = roll.get<std::string>("scenario");
  c.rollout_levels = read_levels(roll, "levels", true);
  c.horizon = roll.get<std::size_t>("horizon");
  return c;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  const json defaults = default_config_json();
  const json* schema = &defaults;
  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (!schema->is_object() || !schema->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    schema = &(*schema)[part];
    if (!node->is_object()) throw ConfigError("config key '" + key + "' crosses a non-object value");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    begin = dot + 1;
  }
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    if (!std::filesystem::exists(*path)) throw ConfigError("config file not found: " + path->string());
    std::ifstream in(*path);
    doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path->string());
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object: " + path->string());
  }
  if (const char* out = std::getenv("TAILQ_OUT_DIR"); out != nullptr && *out != '\0') doc["output_dir"] = out;
  if (const char* w = std::getenv("TAILQ_WORKERS"); w != nullptr && *w != '\0') {
    char* end = nullptr;
    const long long n = std::strtoll(w, &end, 10);
    if (end == w || *end != '\0' || n <= 0) throw ConfigError("TAILQ_WORKERS must be a positive integer");
    doc["workers"] = n;
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_run_config(doc);
}

}  // namespace tailq::cli
