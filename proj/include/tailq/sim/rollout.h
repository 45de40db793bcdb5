#pragma once

// One-dimensional car following: the leader replays a logged trajectory and
// the follower applies a quantile model's acceleration at every step.

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string_view>
#include <vector>

#include "tailq/data/sample.h"
#include "tailq/data/synthetic.h"
#include "tailq/models/quantile_model.h"

namespace tailq::sim {

struct VehicleState {
  double position = 0.0;  // m, front bumper
  double velocity = 0.0;  // m/s
};

struct Scenario {
  std::vector<double> leader_position;
  std::vector<double> leader_velocity;
  VehicleState follower;
  double vehicle_length = 4.5;  // of the leader, m
  double dt = 0.04;
  double feature_cap = data::kDefaultFeatureCap;

  /// Throws DomainError for mismatched series, dt <= 0, a series shorter
  /// than horizon or a nonpositive initial gap.
  void validate(std::size_t horizon) const;
  std::size_t length() const { return leader_position.size(); }

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
};

/// Semi-implicit Euler with no reversing: v' = max(0, v + a dt), x' = x + v' dt.
VehicleState kinematic_step(VehicleState state, double accel, double dt);

/// dhw = x_lead - x_follow - length; thw and ttc capped as in the data module.
data::StateFeatures recompute_features(VehicleState leader, VehicleState follower, double length,
                                       double cap = data::kDefaultFeatureCap);

enum class Terminal { kCompleted, kCollision };
std::string_view to_string(Terminal t);

struct TraceRecord {
  double time = 0.0;
  double accel = 0.0;
  double velocity = 0.0;
  double dhw = 0.0;
  double thw = 0.0;
  double ttc = 0.0;
  double leader_position = 0.0;
  double follower_position = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

/// Records stop before the first state with dhw <= 0; that state is not
/// recorded and terminal becomes kCollision.
struct RolloutTrace {
  std::vector<TraceRecord> records;
  Terminal terminal = Terminal::kCompleted;

  bool operator==(const RolloutTrace&) const = default;
};

/// Fixed-level rollout. Throws ShapeError if the model does not take the 1D
/// feature set and TrainingError naming the step on a non-finite acceleration.
RolloutTrace rollout(const models::QuantileModel& model, double alpha, const Scenario& scenario,
                     std::size_t horizon);

/// Stochastic rollout: a fresh level in (0, 1) is drawn every step.
RolloutTrace rollout_sampled(const models::QuantileModel& model, const Scenario& scenario, std::size_t horizon,
                             std::uint64_t seed);

/// The generator's analytic conditional quantile as a policy.
class SyntheticOracleModel : public models::QuantileModel {
 public:
  explicit SyntheticOracleModel(data::SyntheticSpec spec) : spec_(std::move(spec)) {}
  int dims() const override { return 1; }
  std::size_t feature_count() const override { return data::feature_count(1); }
  double quantile(std::span<const double> features, double alpha, std::size_t dim,
                  std::span<const double> prefix) const override;
  using QuantileModel::quantile;
  std::string name() const override { return "oracle"; }

 private:
  data::SyntheticSpec spec_;
};

/// Leader cruising around mean_speed with a sinusoidal speed profile plus a
/// seeded random phase; follower starts gap_m behind at the leader's speed.
Scenario synthetic_scenario(std::size_t steps, std::uint64_t seed, double mean_speed = 25.0,
                            double amplitude = 4.0, double period_s = 20.0, double gap_m = 35.0);

}  // namespace tailq::sim
