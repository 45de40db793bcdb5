#pragma once

// Synthetic car-following data with analytically known conditional
// quantiles: a = mu(s) + sigma(s) * eta, where mu is an intelligent-driver-
// model acceleration and eta a heavy-tailed two-component Gaussian mixture.

#include <cstdint>
#include <vector>

#include "tailq/data/sample.h"

namespace tailq::data {

struct SyntheticSpec {
  // Mean function (intelligent driver model).
  double max_accel = 2.0;           // m/s^2
  double comfortable_decel = 2.0;   // m/s^2
  double desired_speed = 33.0;      // m/s
  double jam_distance = 2.0;        // m
  double desired_headway = 1.2;     // s
  double accel_exponent = 4.0;
  double braking_limit = 9.0;       // mean is clipped to >= -braking_limit

  // Noise: sigma(s) = noise_multiplier * (noise_base + noise_gain / (1 + thw)).
  double noise_base = 0.15;
  double noise_gain = 0.5;
  double noise_multiplier = 1.0;
  // eta ~ narrow_weight * N(0, 1) + (1 - narrow_weight) * N(0, wide_scale^2).
  double narrow_weight = 0.9;
  double wide_scale = 3.0;

  // State sampling. Speeds uniform, closing speed uniform in
  // [-closing_speed_max, closing_speed_max], gap = equilibrium gap
  // (jam_distance + desired_headway * v) times exp(U[gap_log_min, gap_log_max]).
  double speed_min = 15.0;
  double speed_max = 35.0;
  double closing_speed_max = 5.0;
  double gap_log_min = -0.4;
  double gap_log_max = 0.7;
  double dhw_min = 5.0;
  double dhw_max = 120.0;
  double feature_cap = kDefaultFeatureCap;

  // Lateral dimension (dims == 2): a_lat = lateral_coupling * a_long
  //   + lane_bias * (lanes_right - lanes_left) + lateral_scale * N(0, 1)
  // on a road with road_lanes lanes.
  int dims = 1;
  double lateral_coupling = 0.05;
  double lane_bias = 0.03;
  double lateral_scale = 0.1;
  int road_lanes = 3;
};

/// Throws DomainError for inconsistent parameters.
void validate(const SyntheticSpec& spec);

double synth_mean_accel(const SyntheticSpec& spec, const StateFeatures& s);
double synth_noise_scale(const SyntheticSpec& spec, const StateFeatures& s);

double mixture_cdf(const SyntheticSpec& spec, double x);
/// Inverse mixture CDF by bisection to 1e-10. alpha must lie in (0, 1).
double mixture_quantile(const SyntheticSpec& spec, double alpha);

/// n reproducible samples (same seed, same sequence). Throws DomainError for n == 0.
std::vector<Sample> synth_generate(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed);

/// mu(s) + sigma(s) * F_eta^{-1}(alpha). Rejects alpha outside (0, 1).
double synth_true_quantile(const SyntheticSpec& spec, const StateFeatures& s, double alpha);

/// Conditional alpha-quantile of the lateral action given the longitudinal one.
double synth_true_lateral_quantile(const SyntheticSpec& spec, const StateFeatures& s, double accel_long,
                                   double alpha);

}  // namespace tailq::data
