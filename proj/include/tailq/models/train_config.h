#pragma once

#include <cstddef>
#include <vector>

#include "tailq/autodiff/adam.h"

namespace tailq::models {

enum class LrSchedule { kConstant, kCosine };

/// Optimization hyperparameters shared by all trainable models.
struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  autodiff::AdamConfig adam{.learning_rate = 2e-3};
  /// kCosine decays the learning rate per step from lr to 0 over training.
  LrSchedule schedule = LrSchedule::kCosine;
  /// Hidden widths. QR default is four layers of 64.
  std::vector<std::size_t> hidden = {64, 64, 64, 64};

  // Flows only.
  std::size_t stack_depth = 3;
  /// Monte-Carlo level draws per datum per pass.
  std::size_t mc_draws = 1;
};

// NLSQ flows keep improving in the tails well after affine ones plateau.
inline TrainConfig default_flow_config() {
  TrainConfig c;
  c.epochs = 24;
  c.hidden = {64, 64};
  return c;
}

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;       // running mean over the epoch's mini-batches
  double validation_loss = 0.0;  // full pass, NaN when no validation data
  std::size_t constraint_violations = 0;

  bool operator==(const EpochLog&) const = default;
};

struct TrainingLog {
  double initial_train_loss = 0.0;  // full pass before the first update
  double final_train_loss = 0.0;    // full pass after the last update
  std::vector<EpochLog> epochs;
};

/// Learning-rate multiplier for optimizer step `step` of `total`.
double lr_scale(LrSchedule schedule, std::size_t step, std::size_t total);

}  // namespace tailq::models
