#include "tailq/autodiff/adam.h"

#include <cmath>
#include <string>

namespace tailq::autodiff {

Adam::Adam(std::size_t num_parameters, AdamConfig config)
    : config_(config), m_(num_parameters, 0.0), v_(num_parameters, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr_scale) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("Adam state has " + std::to_string(m_.size()) + " slots, got " +
                     std::to_string(params.size()) + " params / " + std::to_string(grads.size()) +
                     " grads");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NonFiniteGradientError(i, "non-finite gradient at parameter " + std::to_string(i));
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const double lr = config_.learning_rate * lr_scale;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

}  // namespace tailq::autodiff
