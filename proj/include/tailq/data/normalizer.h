#pragma once

#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "tailq/data/sample.h"

namespace tailq::data {

/// Per-feature and per-action mean/stddev, fitted on a training split.
/// Standardization is affine, so quantiles map exactly between the raw and
/// standardized spaces.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(int dims, std::vector<double> feature_mean, std::vector<double> feature_std,
             std::vector<double> action_mean, std::vector<double> action_std);

  /// Population statistics. Throws DataError naming any feature whose
  /// standard deviation is zero, or if samples is empty. A constant action
  /// keeps stddev 1 so it is only shifted.
  static Normalizer fit(std::span<const Sample> samples, int dims);
  /// mean 0, stddev 1 everywhere.
  static Normalizer identity(int dims);

  int dims() const { return dims_; }
  std::size_t feature_count() const { return feature_mean_.size(); }

  void standardize_features(std::span<const double> raw, std::span<double> out) const;
  std::vector<double> standardize_features(std::span<const double> raw) const;
  double standardize_action(double raw, std::size_t dim) const;
  double destandardize_action(double standardized, std::size_t dim) const;

  const std::vector<double>& feature_mean() const { return feature_mean_; }
  const std::vector<double>& feature_std() const { return feature_std_; }
  const std::vector<double>& action_mean() const { return action_mean_; }
  const std::vector<double>& action_std() const { return action_std_; }

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);

  bool operator==(const Normalizer&) const = default;

 private:
  int dims_ = 1;
  std::vector<double> feature_mean_, feature_std_;
  std::vector<double> action_mean_, action_std_;
};

}  // namespace tailq::data
