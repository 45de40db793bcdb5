#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace tailq::models {

/// Common prediction surface: the alpha-quantile of one action dimension
/// given raw state features. For dim > 0, prefix holds the observed (raw)
/// actions of the earlier dimensions and must have exactly `dim` entries.
/// Implementations are immutable after construction and safe to query
/// concurrently.
class QuantileModel {
 public:
  virtual ~QuantileModel() = default;

  virtual int dims() const = 0;
  virtual std::size_t feature_count() const = 0;
  virtual double quantile(std::span<const double> features, double alpha, std::size_t dim,
                          std::span<const double> prefix) const = 0;
  virtual std::string name() const = 0;

  double quantile(std::span<const double> features, double alpha) const {
    return quantile(features, alpha, 0, {});
  }
};

}  // namespace tailq::models
