#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace tailq::data {

/// Feature cap (s) applied to time headway and time-to-collision when they
/// are undefined or unbounded (no closing speed, standing follower).
inline constexpr double kDefaultFeatureCap = 50.0;

/// State features s of the modeled (following) vehicle.
/// 1D: dhw, thw, ttc, v_follow, v_lead. 2D appends lanes_left, lanes_right.
struct StateFeatures {
  double dhw = 0.0;       // net gap to the leader, m
  double thw = 0.0;       // s
  double ttc = 0.0;       // s
  double v_follow = 0.0;  // m/s
  double v_lead = 0.0;    // m/s
  int lanes_left = 0;
  int lanes_right = 0;

  /// g(s): the model input vector for the given action dimensionality.
  std::vector<double> to_vector(int dims) const;
  static StateFeatures from_vector(std::span<const double> values, int dims);
};

/// Throws DomainError unless dims is 1 or 2.
int check_dims(int dims);
std::size_t feature_count(int dims);
std::span<const std::string_view> feature_names(int dims);
std::span<const std::string_view> action_names(int dims);

/// Builds consistent features from raw kinematics. thw = dhw / v_follow and
/// ttc = dhw / closing speed, both capped at `cap` (and set to `cap` when the
/// follower stands still or is not closing in).
StateFeatures make_features(double dhw, double v_follow, double v_lead, double cap = kDefaultFeatureCap);

/// One (state, action) pair. action[0] is longitudinal acceleration (m/s^2),
/// action[1] lateral acceleration (positive toward the driver's left) when
/// dims == 2.
struct Sample {
  StateFeatures state;
  std::array<double, 2> action{};
};

}  // namespace tailq::data
