#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tailq/data/normalizer.h"
#include "tailq/data/sample.h"
#include "tailq/models/flow.h"
#include "tailq/models/train_config.h"

namespace tailq::models {

/// Monte-Carlo quantile loss in raw action units:
///   (1/n) sum_i sum_j (1/K) sum_k tal(a_ij, q_j(s_i, alpha_ijk | a_i,<j), alpha_ijk)
/// with alpha drawn uniformly on [0, 1] and ground-truth prefixes.
/// Requires a uniform-base flow.
double aqf_loss(const ConditionalFlow& flow, std::span<const data::Sample> batch, std::mt19937_64& rng,
                std::size_t draws = 1);

/// Same objective with the levels given: alphas[i * dims + j] for datum i and
/// dimension j (one draw). Lets callers share random numbers across models.
double aqf_loss_at_levels(const ConditionalFlow& flow, std::span<const data::Sample> batch,
                          std::span<const double> alphas);

/// Mean negative log-likelihood in raw action units. Requires a normal base.
double anf_nll(const ConditionalFlow& flow, std::span<const data::Sample> batch);

struct FlowGradient {
  double loss = 0.0;  // mean standardized objective
  std::vector<std::vector<std::vector<double>>> grads;  // [dim][transformer][parameter]
};

/// Mean standardized objective over samples[rows] (pinball at the given
/// levels for a uniform base, negative log-likelihood for a normal base) and
/// its gradient with respect to every conditioner parameter. alphas holds
/// levels[(row * dims + j) * draws + k]; it is ignored for a normal base.
/// When caches is non-null it must be sized [dims][stack_depth].
FlowGradient flow_objective_gradient(const ConditionalFlow& flow, std::span<const data::Sample> samples,
                                     std::span<const std::size_t> rows, std::span<const double> alphas,
                                     std::size_t draws,
                                     std::vector<std::vector<autodiff::ForwardCache>>* caches = nullptr);

struct FlowTrainResult {
  ConditionalFlow model;
  /// Losses are in standardized units. The AQF validation and initial/final
  /// losses use a fixed level stream so epochs are comparable.
  TrainingLog log;
};

/// Adam on aqf_loss (uniform base) or anf_nll (normal base) with teacher
/// forcing. NLSQ constraint violations on the validation split are counted
/// after every epoch; they are zero by construction. Throws TrainingError on
/// a non-finite loss or gradient.
FlowTrainResult flow_train(std::span<const data::Sample> train, std::span<const data::Sample> validation,
                           FlowKind kind, const data::Normalizer& normalizer, const TrainConfig& config,
                           std::uint64_t seed);

}  // namespace tailq::models
