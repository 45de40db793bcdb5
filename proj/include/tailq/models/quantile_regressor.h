#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "tailq/autodiff/dense_net.h"
#include "tailq/data/normalizer.h"
#include "tailq/data/sample.h"
#include "tailq/models/quantile_model.h"
#include "tailq/models/train_config.h"
#include "tailq/quantile/quantile.h"

namespace tailq::models {

/// One network per quantile level, mapping standardized state features to
/// the standardized alpha-quantile of longitudinal acceleration.
class QuantileRegressor {
 public:
  QuantileRegressor(QuantileLevel level, autodiff::DenseNet net, data::Normalizer normalizer);

  double level() const { return level_.value(); }
  const autodiff::DenseNet& net() const { return net_; }
  autodiff::DenseNet& net() { return net_; }
  const data::Normalizer& normalizer() const { return normalizer_; }

  /// De-standardized prediction for raw features. Throws ShapeError on a
  /// feature-count mismatch.
  double predict(std::span<const double> features) const;

  nlohmann::json to_json() const;
  static QuantileRegressor from_json(const nlohmann::json& j);

 private:
  QuantileLevel level_;
  autodiff::DenseNet net_;
  data::Normalizer normalizer_;
};

struct QrTrainResult {
  QuantileRegressor model;
  TrainingLog log;
};

/// Mini-batch Adam on mean pinball loss at `level` (standardized units).
/// The normalizer must come from the training split. Throws TrainingError if
/// the loss or a gradient becomes non-finite.
QrTrainResult qr_train(std::span<const data::Sample> train, std::span<const data::Sample> validation,
                       QuantileLevel level, const data::Normalizer& normalizer, const TrainConfig& config,
                       std::uint64_t seed);

/// Mean pinball loss in standardized action units.
double qr_loss(const QuantileRegressor& model, std::span<const data::Sample> samples);

/// QuantileModel over a set of per-level regressors (longitudinal only).
class QuantileRegressorSet : public QuantileModel {
 public:
  QuantileRegressorSet() = default;
  void add(QuantileRegressor model);
  bool has_level(double alpha) const;
  /// Throws DomainError naming the level when no regressor exists for it.
  const QuantileRegressor& at(double alpha) const;
  std::vector<double> levels() const;

  int dims() const override { return 1; }
  std::size_t feature_count() const override;
  double quantile(std::span<const double> features, double alpha, std::size_t dim,
                  std::span<const double> prefix) const override;
  using QuantileModel::quantile;
  std::string name() const override { return "qr"; }

 private:
  std::map<double, QuantileRegressor> models_;
};

}  // namespace tailq::models
