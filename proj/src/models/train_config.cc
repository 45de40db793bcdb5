#include "tailq/models/train_config.h"

#include <cmath>
#include <numbers>

namespace tailq::models {

double lr_scale(LrSchedule schedule, std::size_t step, std::size_t total) {
  if (schedule == LrSchedule::kConstant || total == 0) return 1.0;
  const double progress = static_cast<double>(step) / static_cast<double>(total);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace tailq::models
