#include "tailq/quantile/quantile.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailq/error.h"

namespace tailq {

QuantileLevel::QuantileLevel(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("quantile level must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double tal(double actual, double predicted, QuantileLevel alpha) {
  if (!std::isfinite(actual) || !std::isfinite(predicted)) {
    throw DomainError("tal: non-finite input");
  }
  return pinball(actual, predicted, alpha.value());
}

double mean_tal(std::span<const double> actuals, std::span<const double> predictions,
                QuantileLevel alpha) {
  if (actuals.empty()) throw DomainError("mean_tal: empty input");
  if (actuals.size() != predictions.size()) {
    throw ShapeError("mean_tal: " + std::to_string(actuals.size()) + " actuals vs " +
                     std::to_string(predictions.size()) + " predictions");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) sum += tal(actuals[i], predictions[i], alpha);
  return sum / static_cast<double>(actuals.size());
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw DomainError("empirical distribution needs at least one sample");
  for (double x : sorted_) {
    if (!std::isfinite(x)) throw DomainError("empirical distribution: non-finite sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double empirical_quantile(const EmpiricalDistribution& dist, QuantileLevel alpha) {
  const auto sorted = dist.sorted();
  const std::size_t n = sorted.size();
  const double nd = static_cast<double>(n);
  // Smallest rank k (1-based) with k/n >= alpha, evaluated exactly as stated
  // rather than trusting ceil(alpha * n) under rounding.
  std::size_t k = static_cast<std::size_t>(std::ceil(alpha.value() * nd));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / nd >= alpha.value()) --k;
  while (k < n && static_cast<double>(k) / nd < alpha.value()) ++k;
  return sorted[k - 1];
}

double tal_minimizer_oracle(const EmpiricalDistribution& dist, QuantileLevel alpha, double grid_step) {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw DomainError("grid step must be positive, got " + std::to_string(grid_step));
  }
  const auto sorted = dist.sorted();
  const double lo = dist.min();
  const double hi = dist.max();
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / grid_step));
  std::vector<double> grid;
  grid.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(lo + static_cast<double>(k) * grid_step);
  if (grid.back() < hi) grid.push_back(hi);

  std::vector<double> losses(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (double a : sorted) sum += pinball(a, grid[g], alpha.value());
    losses[g] = sum / static_cast<double>(sorted.size());
  }
  const double best = *std::min_element(losses.begin(), losses.end());
  // Flat stretches of the objective differ only by rounding; treat those as
  // ties so the smallest grid point wins.
  const double tol = 1e-12 * (1.0 + std::abs(best));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (losses[g] <= best + tol) return grid[g];
  }
  return grid.front();
}

}  // namespace tailq
