#include "tailq/data/normalizer.h"

#include <cmath>
#include <string>

#include "tailq/error.h"

namespace tailq::data {

Normalizer::Normalizer(int dims, std::vector<double> feature_mean, std::vector<double> feature_std,
                       std::vector<double> action_mean, std::vector<double> action_std)
    : dims_(check_dims(dims)),
      feature_mean_(std::move(feature_mean)),
      feature_std_(std::move(feature_std)),
      action_mean_(std::move(action_mean)),
      action_std_(std::move(action_std)) {
  if (feature_mean_.size() != data::feature_count(dims) || feature_std_.size() != feature_mean_.size() ||
      action_mean_.size() != static_cast<std::size_t>(dims) || action_std_.size() != action_mean_.size()) {
    throw ShapeError("normalizer statistics do not match dims=" + std::to_string(dims));
  }
  for (std::size_t i = 0; i < feature_std_.size(); ++i) {
    if (!(feature_std_[i] > 0.0)) {
      throw DataError("degenerate feature '" + std::string(feature_names(dims)[i]) + "': zero spread");
    }
  }
  for (std::size_t i = 0; i < action_std_.size(); ++i) {
    if (!(action_std_[i] > 0.0)) {
      throw DataError("degenerate action '" + std::string(action_names(dims)[i]) + "': zero spread");
    }
  }
}

Normalizer Normalizer::fit(std::span<const Sample> samples, int dims) {
  if (samples.empty()) throw DataError("cannot fit a normalizer on an empty split");
  const std::size_t nf = data::feature_count(dims);
  const std::size_t na = static_cast<std::size_t>(dims);
  const double n = static_cast<double>(samples.size());
  std::vector<double> fm(nf, 0.0), fs(nf, 0.0), am(na, 0.0), as(na, 0.0);
  for (const auto& s : samples) {
    const auto v = s.state.to_vector(dims);
    for (std::size_t i = 0; i < nf; ++i) fm[i] += v[i];
    for (std::size_t i = 0; i < na; ++i) am[i] += s.action[i];
  }
  for (auto& m : fm) m /= n;
  for (auto& m : am) m /= n;
  for (const auto& s : samples) {
    const auto v = s.state.to_vector(dims);
    for (std::size_t i = 0; i < nf; ++i) fs[i] += (v[i] - fm[i]) * (v[i] - fm[i]);
    for (std::size_t i = 0; i < na; ++i) as[i] += (s.action[i] - am[i]) * (s.action[i] - am[i]);
  }
  for (auto& x : fs) x = std::sqrt(x / n);
  // A constant action is a legitimate (if trivial) target; only shift it.
  for (auto& x : as) {
    x = std::sqrt(x / n);
    if (x == 0.0) x = 1.0;
  }
  return Normalizer(dims, std::move(fm), std::move(fs), std::move(am), std::move(as));
}

Normalizer Normalizer::identity(int dims) {
  const std::size_t nf = data::feature_count(dims);
  const std::size_t na = static_cast<std::size_t>(dims);
  return Normalizer(dims, std::vector<double>(nf, 0.0), std::vector<double>(nf, 1.0),
                    std::vector<double>(na, 0.0), std::vector<double>(na, 1.0));
}

void Normalizer::standardize_features(std::span<const double> raw, std::span<double> out) const {
  if (raw.size() != feature_mean_.size() || out.size() != raw.size()) {
    throw ShapeError("expected " + std::to_string(feature_mean_.size()) + " features, got " +
                     std::to_string(raw.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - feature_mean_[i]) / feature_std_[i];
}

std::vector<double> Normalizer::standardize_features(std::span<const double> raw) const {
  std::vector<double> out(raw.size());
  standardize_features(raw, out);
  return out;
}

double Normalizer::standardize_action(double raw, std::size_t dim) const {
  return (raw - action_mean_.at(dim)) / action_std_.at(dim);
}

double Normalizer::destandardize_action(double standardized, std::size_t dim) const {
  return action_mean_.at(dim) + action_std_.at(dim) * standardized;
}

nlohmann::json Normalizer::to_json() const {
  return {{"dims", dims_},
          {"feature_names", std::vector<std::string>(feature_names(dims_).begin(), feature_names(dims_).end())},
          {"feature_mean", feature_mean_},
          {"feature_std", feature_std_},
          {"action_mean", action_mean_},
          {"action_std", action_std_}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  try {
    return Normalizer(j.at("dims").get<int>(), j.at("feature_mean").get<std::vector<double>>(),
                      j.at("feature_std").get<std::vector<double>>(),
                      j.at("action_mean").get<std::vector<double>>(),
                      j.at("action_std").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed normalizer: ") + e.what());
  }
}

}  // namespace tailq::data
