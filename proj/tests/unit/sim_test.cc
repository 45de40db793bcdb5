#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "tailq/error.h"
#include "tailq/sim/rollout.h"

namespace tailq::sim {
namespace {

// Policy returning a fixed sequence of accelerations, one per call.
class ScriptedModel : public models::QuantileModel {
 public:
  explicit ScriptedModel(std::vector<double> accels, std::size_t features = 5)
      : accels_(std::move(accels)), features_(features) {}
  int dims() const override { return features_ == 5 ? 1 : 2; }
  std::size_t feature_count() const override { return features_; }
  double quantile(std::span<const double>, double, std::size_t, std::span<const double>) const override {
    const double a = accels_[std::min(calls_, accels_.size() - 1)];
    ++calls_;
    return a;
  }
  using QuantileModel::quantile;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<double> accels_;
  std::size_t features_;
  mutable std::size_t calls_ = 0;
};

Scenario standing_leader(double position, double follower_speed, std::size_t steps) {
  Scenario s;
  s.leader_position.assign(steps, position);
  s.leader_velocity.assign(steps, 0.0);
  s.follower = {0.0, follower_speed};
  return s;
}

TEST(Kinematics, SemiImplicitEuler) {
  const auto next = kinematic_step({5.0, 10.0}, 2.0, 0.1);
  EXPECT_DOUBLE_EQ(next.velocity, 10.2);
  EXPECT_DOUBLE_EQ(next.position, 5.0 + 10.2 * 0.1);
  const auto stopped = kinematic_step({5.0, 0.1}, -10.0, 0.04);
  EXPECT_EQ(stopped.velocity, 0.0);
  EXPECT_EQ(stopped.position, 5.0);
}

TEST(Kinematics, RecomputedFeatures) {
  const auto s = recompute_features({100.0, 20.0}, {50.0, 25.0}, 5.0);
  EXPECT_DOUBLE_EQ(s.dhw, 45.0);
  EXPECT_DOUBLE_EQ(s.thw, 1.8);
  EXPECT_DOUBLE_EQ(s.ttc, 9.0);
  EXPECT_EQ(recompute_features({100.0, 30.0}, {50.0, 25.0}, 5.0).ttc, data::kDefaultFeatureCap);
}

TEST(Rollout, ConstantAccelerationClosedForm) {
  const double c = 0.5, dt = 0.04, v0 = 20.0;
  const auto scenario = standing_leader(1e4, v0, 100);
  const auto trace = rollout(ScriptedModel({c}), 0.5, scenario, 100);
  ASSERT_EQ(trace.records.size(), 100u);
  EXPECT_EQ(trace.terminal, Terminal::kCompleted);
  for (std::size_t k = 0; k < 100; ++k) {
    const double kk = static_cast<double>(k);
    // v_k = v0 + c k dt; x_k = dt * sum_{i=1..k} v_i.
    EXPECT_NEAR(trace.records[k].velocity, v0 + c * kk * dt, 1e-9);
    EXPECT_NEAR(trace.records[k].follower_position, dt * (kk * v0 + c * dt * kk * (kk + 1) / 2), 1e-9);
    EXPECT_NEAR(trace.records[k].time, kk * dt, 1e-12);
    EXPECT_EQ(trace.records[k].accel, c);
  }
}

TEST(Rollout, CollisionStopsBeforeRecording) {
  // dhw_k = 50 - 4.5 - 0.8 k: first nonpositive at k = 57.
  const auto trace = rollout(ScriptedModel({0.0}), 0.5, standing_leader(50.0, 20.0, 200), 200);
  EXPECT_EQ(trace.terminal, Terminal::kCollision);
  ASSERT_EQ(trace.records.size(), 57u);
  EXPECT_NEAR(trace.records.back().dhw, 45.5 - 0.8 * 56, 1e-9);
  for (const auto& r : trace.records) EXPECT_GT(r.dhw, 0.0);
  EXPECT_EQ(to_string(trace.terminal), "collision");
}

TEST(Rollout, ReplaysLoggedTrajectory) {
  // Follower log produced by the same integrator; a policy replaying its
  // accelerations must reproduce it.
  const std::size_t n = 300;
  std::vector<double> accels(n);
  for (std::size_t k = 0; k < n; ++k) accels[k] = std::sin(0.05 * static_cast<double>(k));
  std::vector<VehicleState> log = {{0.0, 22.0}};
  for (std::size_t k = 0; k + 1 < n; ++k) log.push_back(kinematic_step(log.back(), accels[k], 0.04));
  Scenario scenario;
  for (const auto& f : log) {
    scenario.leader_position.push_back(f.position + 30.0);
    scenario.leader_velocity.push_back(f.velocity);
  }
  scenario.follower = log.front();
  const auto trace = rollout(ScriptedModel(accels), 0.5, scenario, n);
  ASSERT_EQ(trace.records.size(), n);
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_EQ(trace.records[k].follower_position, log[k].position);
    EXPECT_EQ(trace.records[k].velocity, log[k].velocity);
    EXPECT_NEAR(trace.records[k].dhw, 25.5, 1e-9);
  }
}

TEST(Rollout, NonFiniteAccelerationNamesStep) {
  const auto scenario = standing_leader(1e4, 20.0, 10);
  try {
    rollout(ScriptedModel({0.1, 0.1, 0.1, std::numeric_limits<double>::quiet_NaN()}), 0.5, scenario, 10);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(Rollout, Rejections) {
  const auto scenario = standing_leader(1e4, 20.0, 10);
  EXPECT_THROW(rollout(ScriptedModel({0.0}, 7), 0.5, scenario, 10), ShapeError);
  EXPECT_THROW(rollout(ScriptedModel({0.0}), 0.5, scenario, 11), DomainError);
  EXPECT_THROW(rollout(ScriptedModel({0.0}), 1.5, scenario, 10), DomainError);
  auto bad = scenario;
  bad.leader_velocity.pop_back();
  EXPECT_THROW(bad.validate(5), DomainError);
  bad = standing_leader(3.0, 20.0, 10);
  EXPECT_THROW(bad.validate(5), DomainError);
}

TEST(Rollout, Deterministic) {
  data::SyntheticSpec spec;
  const SyntheticOracleModel oracle(spec);
  const auto scenario = synthetic_scenario(500, 3);
  EXPECT_EQ(rollout(oracle, 0.9, scenario, 500), rollout(oracle, 0.9, scenario, 500));
  EXPECT_EQ(rollout_sampled(oracle, scenario, 500, 4), rollout_sampled(oracle, scenario, 500, 4));
  EXPECT_NE(rollout_sampled(oracle, scenario, 500, 4), rollout_sampled(oracle, scenario, 500, 5));
}

TEST(Rollout, HigherLevelsCloseTheGap) {
  data::SyntheticSpec spec;
  const SyntheticOracleModel oracle(spec);
  const auto scenario = synthetic_scenario(1500, 7);
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {0.5, 0.75, 0.95, 0.99}) {
    const auto trace = rollout(oracle, alpha, scenario, 1500);
    double mean = 0.0;
    for (const auto& r : trace.records) mean += r.dhw;
    mean /= static_cast<double>(trace.records.size());
    EXPECT_LT(mean, previous) << "alpha " << alpha;
    previous = mean;
  }
}

TEST(Oracle, MatchesGeneratorQuantile) {
  data::SyntheticSpec spec;
  const SyntheticOracleModel oracle(spec);
  const auto s = data::make_features(30.0, 25.0, 24.0);
  EXPECT_EQ(oracle.quantile(s.to_vector(1), 0.95), data::synth_true_quantile(spec, s, 0.95));
  EXPECT_THROW(oracle.quantile(s.to_vector(1), 0.5, 1, std::vector<double>{0.0}), DomainError);
}

TEST(Scenario, JsonRoundTrip) {
  const auto s = synthetic_scenario(50, 9);
  const auto back = Scenario::from_json(nlohmann::json::parse(s.to_json().dump()));
  EXPECT_EQ(back.leader_position, s.leader_position);
  EXPECT_EQ(back.leader_velocity, s.leader_velocity);
  EXPECT_EQ(back.follower.velocity, s.follower.velocity);
  EXPECT_EQ(back.dt, s.dt);
  EXPECT_THROW(Scenario::from_json(nlohmann::json{{"dt", 0.04}}), DataError);
}

TEST(Scenario, SyntheticLeaderStartsAhead) {
  const auto s = synthetic_scenario(100, 10);
  ASSERT_EQ(s.length(), 100u);
  EXPECT_NEAR(s.leader_position[0] - s.follower.position - s.vehicle_length, 35.0, 1e-9);
  EXPECT_EQ(s.follower.velocity, s.leader_velocity[0]);
  EXPECT_NO_THROW(s.validate(100));
}

}  // namespace
}  // namespace tailq::sim
