#pragma once

#include <span>
#include <vector>

#include "tailq/data/sample.h"
#include "tailq/models/quantile_model.h"
#include "tailq/quantile/quantile.h"

namespace tailq::models {

/// Ignores the state: predicts the training split's empirical alpha-quantile
/// of each action dimension as a constant.
class UnconditionalQuantiles : public QuantileModel {
 public:
  /// Throws DataError if train is empty.
  UnconditionalQuantiles(std::span<const data::Sample> train, int dims);

  int dims() const override { return static_cast<int>(per_dim_.size()); }
  std::size_t feature_count() const override { return data::feature_count(dims()); }
  double quantile(std::span<const double> features, double alpha, std::size_t dim,
                  std::span<const double> prefix) const override;
  using QuantileModel::quantile;
  std::string name() const override { return "unconditional"; }

  const EmpiricalDistribution& distribution(std::size_t dim) const { return per_dim_.at(dim); }

 private:
  std::vector<EmpiricalDistribution> per_dim_;
};

}  // namespace tailq::models
