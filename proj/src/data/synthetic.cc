#include "tailq/data/synthetic.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <string>

#include "tailq/error.h"

namespace tailq::data {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void check_open_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("level must lie strictly inside (0, 1) for an unbounded noise law, got " +
                      std::to_string(alpha));
  }
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  check_dims(spec.dims);
  if (!(spec.narrow_weight >= 0.0 && spec.narrow_weight <= 1.0)) throw DomainError("narrow_weight outside [0, 1]");
  if (!(spec.wide_scale > 0.0)) throw DomainError("wide_scale must be positive");
  if (!(spec.noise_multiplier >= 0.0)) throw DomainError("noise_multiplier must be nonnegative");
  if (!(spec.noise_base >= 0.0 && spec.noise_gain >= 0.0)) throw DomainError("noise terms must be nonnegative");
  if (!(spec.speed_min > 0.0 && spec.speed_max >= spec.speed_min)) throw DomainError("invalid speed range");
  if (!(spec.dhw_min > 0.0 && spec.dhw_max >= spec.dhw_min)) throw DomainError("invalid dhw range");
  if (!(spec.gap_log_max >= spec.gap_log_min)) throw DomainError("invalid gap range");
  if (!(spec.max_accel > 0.0 && spec.comfortable_decel > 0.0 && spec.desired_speed > 0.0)) {
    throw DomainError("mean-function constants must be positive");
  }
  if (spec.road_lanes < 1) throw DomainError("road_lanes must be >= 1");
}

double synth_mean_accel(const SyntheticSpec& spec, const StateFeatures& s) {
  const double v = s.v_follow;
  const double dynamic = v * spec.desired_headway +
                         v * (v - s.v_lead) / (2.0 * std::sqrt(spec.max_accel * spec.comfortable_decel));
  const double desired_gap = spec.jam_distance + std::max(0.0, dynamic);
  const double free_term = std::pow(v / spec.desired_speed, spec.accel_exponent);
  const double interaction = (desired_gap / s.dhw) * (desired_gap / s.dhw);
  const double idm = spec.max_accel * (1.0 - free_term - interaction);
  return std::max(idm, -spec.braking_limit);
}

double synth_noise_scale(const SyntheticSpec& spec, const StateFeatures& s) {
  return spec.noise_multiplier * (spec.noise_base + spec.noise_gain / (1.0 + s.thw));
}

double mixture_cdf(const SyntheticSpec& spec, double x) {
  return spec.narrow_weight * normal_cdf(x) + (1.0 - spec.narrow_weight) * normal_cdf(x / spec.wide_scale);
}

double mixture_quantile(const SyntheticSpec& spec, double alpha) {
  check_open_level(alpha);
  double lo = -1.0, hi = 1.0;
  while (mixture_cdf(spec, lo) > alpha) lo *= 2.0;
  while (mixture_cdf(spec, hi) < alpha) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_cdf(spec, mid) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<Sample> synth_generate(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  if (n == 0) throw DomainError("synth_generate: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = uniform(spec.speed_min, spec.speed_max);
    const double closing = uniform(-spec.closing_speed_max, spec.closing_speed_max);
    const double v_lead = std::clamp(v - closing, spec.speed_min, spec.speed_max);
    const double equilibrium = spec.jam_distance + spec.desired_headway * v;
    const double dhw =
        std::clamp(equilibrium * std::exp(uniform(spec.gap_log_min, spec.gap_log_max)), spec.dhw_min, spec.dhw_max);

    Sample s;
    s.state = make_features(dhw, v, v_lead, spec.feature_cap);
    const bool wide = unit(rng) >= spec.narrow_weight;
    const double eta = gauss(rng) * (wide ? spec.wide_scale : 1.0);
    s.action[0] = synth_mean_accel(spec, s.state) + synth_noise_scale(spec, s.state) * eta;
    if (spec.dims == 2) {
      std::uniform_int_distribution<int> lane(0, spec.road_lanes - 1);
      const int k = lane(rng);
      s.state.lanes_left = k;
      s.state.lanes_right = spec.road_lanes - 1 - k;
      s.action[1] = spec.lateral_coupling * s.action[0] +
                    spec.lane_bias * (s.state.lanes_right - s.state.lanes_left) + spec.lateral_scale * gauss(rng);
    }
    out.push_back(s);
  }
  return out;
}

double synth_true_quantile(const SyntheticSpec& spec, const StateFeatures& s, double alpha) {
  check_open_level(alpha);
  return synth_mean_accel(spec, s) + synth_noise_scale(spec, s) * mixture_quantile(spec, alpha);
}

double synth_true_lateral_quantile(const SyntheticSpec& spec, const StateFeatures& s, double accel_long,
                                   double alpha) {
  check_open_level(alpha);
  const double z = boost::math::quantile(boost::math::normal(), alpha);
  return spec.lateral_coupling * accel_long + spec.lane_bias * (s.lanes_right - s.lanes_left) +
         spec.lateral_scale * z;
}

}  // namespace tailq::data
