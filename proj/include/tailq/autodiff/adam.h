#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tailq/error.h"

namespace tailq::autodiff {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Thrown before any parameter is touched when a gradient entry is NaN/inf.
class NonFiniteGradientError : public TrainingError {
 public:
  NonFiniteGradientError(std::size_t index, const std::string& what)
      : TrainingError(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Adam with bias correction. One instance per parameter buffer.
class Adam {
 public:
  explicit Adam(std::size_t num_parameters, AdamConfig config = {});

  /// lr_scale multiplies the configured learning rate (schedules).
  void step(std::span<double> params, std::span<const double> grads, double lr_scale = 1.0);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace tailq::autodiff
