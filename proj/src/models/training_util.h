#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tailq/data/normalizer.h"
#include "tailq/data/sample.h"
#include "tailq/error.h"

namespace tailq::models::detail {

/// (features + prefix_dims) x batch matrix of standardized inputs; the
/// trailing rows hold the standardized ground-truth actions of the first
/// prefix_dims dimensions (teacher forcing).
inline Eigen::MatrixXd input_matrix(std::span<const data::Sample> samples, std::span<const std::size_t> rows,
                                    const data::Normalizer& norm, std::size_t prefix_dims) {
  const int dims = norm.dims();
  const std::size_t nf = norm.feature_count();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(nf + prefix_dims), static_cast<Eigen::Index>(rows.size()));
  std::vector<double> buf(nf);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const data::Sample& s = samples[rows[c]];
    const auto raw = s.state.to_vector(dims);
    norm.standardize_features(raw, buf);
    for (std::size_t i = 0; i < nf; ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = buf[i];
    for (std::size_t j = 0; j < prefix_dims; ++j) {
      x(static_cast<Eigen::Index>(nf + j), static_cast<Eigen::Index>(c)) = norm.standardize_action(s.action[j], j);
    }
  }
  return x;
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

inline void check_finite_loss(double loss, std::size_t epoch, const std::string& model) {
  if (!std::isfinite(loss)) {
    throw TrainingError(model + ": non-finite loss in epoch " + std::to_string(epoch));
  }
}

}  // namespace tailq::models::detail
