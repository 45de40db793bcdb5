#pragma once

// Quantile mathematics shared by every model: the tilted absolute (pinball)
// loss, lower empirical quantiles, and a brute-force loss minimizer used to
// cross-check the two.

#include <algorithm>
#include <array>
#include <span>
#include <vector>

namespace tailq {

/// A quantile level in [0, 1].
class QuantileLevel {
 public:
  /// Throws DomainError outside [0, 1] or for NaN.
  explicit QuantileLevel(double alpha);
  double value() const { return alpha_; }
  operator double() const { return alpha_; }

 private:
  double alpha_;
};

/// The nine evaluation levels used for loss tables.
inline constexpr std::array<double, 9> kEvalLevels = {0.001, 0.01, 0.05, 0.25, 0.5,
                                                      0.75,  0.95, 0.99, 0.999};

/// Pinball loss max{alpha (a - pred), (alpha - 1)(a - pred)} for arbitrary
/// scalar types (double or autodiff::Var). No validation.
template <class T>
T pinball(double actual, T predicted, double alpha) {
  using std::max;
  T residual = actual - predicted;
  return max(alpha * residual, (alpha - 1.0) * residual);
}

/// Validated pinball loss. Throws DomainError on non-finite inputs.
double tal(double actual, double predicted, QuantileLevel alpha);

/// Mean pinball loss over aligned pairs. Throws on empty or mismatched input.
double mean_tal(std::span<const double> actuals, std::span<const double> predictions,
                QuantileLevel alpha);

/// Sorted, nonempty sample of one action dimension.
class EmpiricalDistribution {
 public:
  /// Sorts a copy. Throws DomainError if empty or if any value is non-finite.
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::span<const double> sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }
  /// Fraction of samples <= x.
  double cdf(double x) const;

 private:
  std::vector<double> sorted_;
};

/// inf{x : alpha <= F(x)}: the smallest sample whose rank/n reaches alpha.
double empirical_quantile(const EmpiricalDistribution& dist, QuantileLevel alpha);

/// Grid point in [min, max] (step grid_step, starting at min) minimizing mean
/// pinball loss over the sample; ties go to the smallest grid point.
double tal_minimizer_oracle(const EmpiricalDistribution& dist, QuantileLevel alpha, double grid_step);

}  // namespace tailq
