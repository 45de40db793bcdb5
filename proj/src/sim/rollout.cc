#include "tailq/sim/rollout.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tailq/error.h"
#include "tailq/io/csv.h"
#include "tailq/quantile/quantile.h"

namespace tailq::sim {

void Scenario::validate(std::size_t horizon) const {
  if (leader_position.size() != leader_velocity.size()) {
    throw DomainError("scenario leader position and velocity series differ in length");
  }
  if (!(dt > 0.0)) throw DomainError("scenario dt must be positive");
  if (!(vehicle_length >= 0.0)) throw DomainError("vehicle length must be nonnegative");
  if (!(feature_cap > 0.0)) throw DomainError("feature cap must be positive");
  if (leader_position.size() < horizon) {
    throw DomainError("scenario has " + std::to_string(leader_position.size()) + " leader steps, horizon needs " +
                      std::to_string(horizon));
  }
  if (leader_position.empty()) throw DomainError("scenario has no leader steps");
  for (std::size_t i = 0; i < leader_position.size(); ++i) {
    if (!std::isfinite(leader_position[i]) || !std::isfinite(leader_velocity[i]) || leader_velocity[i] < 0.0) {
      throw DomainError("scenario leader state at step " + std::to_string(i) + " is invalid");
    }
  }
  if (!std::isfinite(follower.position) || !(follower.velocity >= 0.0)) {
    throw DomainError("scenario follower initial state is invalid");
  }
  if (!(leader_position.front() - follower.position - vehicle_length > 0.0)) {
    throw DomainError("scenario initial gap must be positive");
  }
}

nlohmann::json Scenario::to_json() const {
  return {{"format_version", 1},
          {"dt", dt},
          {"vehicle_length", vehicle_length},
          {"feature_cap", feature_cap},
          {"follower", {{"position", follower.position}, {"velocity", follower.velocity}}},
          {"leader", {{"position", leader_position}, {"velocity", leader_velocity}}}};
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  try {
    Scenario s;
    if (j.value("format_version", 1) != 1) throw DataError("unsupported scenario format version");
    s.dt = j.value("dt", s.dt);
    s.vehicle_length = j.value("vehicle_length", s.vehicle_length);
    s.feature_cap = j.value("feature_cap", s.feature_cap);
    s.follower.position = j.at("follower").at("position").get<double>();
    s.follower.velocity = j.at("follower").at("velocity").get<double>();
    s.leader_position = j.at("leader").at("position").get<std::vector<double>>();
    s.leader_velocity = j.at("leader").at("velocity").get<std::vector<double>>();
    s.validate(0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scenario: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(std::string("invalid scenario: ") + e.what());
  }
}

VehicleState kinematic_step(VehicleState state, double accel, double dt) {
  const double v = std::max(0.0, state.velocity + accel * dt);
  return {state.position + v * dt, v};
}

data::StateFeatures recompute_features(VehicleState leader, VehicleState follower, double length, double cap) {
  return data::make_features(leader.position - follower.position - length, follower.velocity, leader.velocity, cap);
}

std::string_view to_string(Terminal t) { return t == Terminal::kCompleted ? "completed" : "collision"; }

namespace {

template <class LevelFn>
RolloutTrace run(const models::QuantileModel& model, const Scenario& scenario, std::size_t horizon,
                 LevelFn next_level) {
  if (model.dims() != 1 && model.dims() != 2) throw ShapeError("rollout: unsupported model");
  if (model.feature_count() != data::feature_count(1)) {
    throw ShapeError("rollout needs a model over the " + std::to_string(data::feature_count(1)) +
                     " longitudinal features, model " + model.name() + " takes " +
                     std::to_string(model.feature_count()));
  }
  scenario.validate(horizon);
  RolloutTrace trace;
  trace.records.reserve(horizon);
  VehicleState follower = scenario.follower;
  for (std::size_t k = 0; k < horizon; ++k) {
    const VehicleState leader{scenario.leader_position[k], scenario.leader_velocity[k]};
    const data::StateFeatures s = recompute_features(leader, follower, scenario.vehicle_length, scenario.feature_cap);
    if (s.dhw <= 0.0) {
      trace.terminal = Terminal::kCollision;
      break;
    }
    const double accel = model.quantile(s.to_vector(1), next_level());
    if (!std::isfinite(accel)) {
      throw TrainingError("rollout: model " + model.name() + " produced a non-finite acceleration at step " +
                          std::to_string(k));
    }
    trace.records.push_back({static_cast<double>(k) * scenario.dt, accel, follower.velocity, s.dhw, s.thw, s.ttc,
                             leader.position, follower.position});
    follower = kinematic_step(follower, accel, scenario.dt);
  }
  return trace;
}

}  // namespace

RolloutTrace rollout(const models::QuantileModel& model, double alpha, const Scenario& scenario,
                     std::size_t horizon) {
  QuantileLevel{alpha};
  return run(model, scenario, horizon, [alpha] { return alpha; });
}

RolloutTrace rollout_sampled(const models::QuantileModel& model, const Scenario& scenario, std::size_t horizon,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return run(model, scenario, horizon, [&] {
    double a = 0.0;
    while (a <= 0.0) a = u(rng);
    return a;
  });
}

double SyntheticOracleModel::quantile(std::span<const double> features, double alpha, std::size_t dim,
                                      std::span<const double> prefix) const {
  if (dim != 0 || !prefix.empty()) throw DomainError("the oracle policy is longitudinal only");
  if (features.size() != feature_count()) throw ShapeError("oracle policy: wrong feature count");
  return data::synth_true_quantile(spec_, data::StateFeatures::from_vector(features, 1), alpha);
}

Scenario synthetic_scenario(std::size_t steps, std::uint64_t seed, double mean_speed, double amplitude,
                            double period_s, double gap_m) {
  if (steps == 0) throw DomainError("synthetic scenario needs at least one step");
  if (!(amplitude >= 0.0 && mean_speed - amplitude >= 0.0)) throw DomainError("leader speed would go negative");
  std::mt19937_64 rng(seed);
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  Scenario s;
  const double w = 2.0 * std::numbers::pi / period_s;
  double x = gap_m + s.vehicle_length;
  for (std::size_t k = 0; k < steps; ++k) {
    const double v = mean_speed + amplitude * std::sin(w * static_cast<double>(k) * s.dt + phase);
    s.leader_position.push_back(x);
    s.leader_velocity.push_back(v);
    x += v * s.dt;
  }
  s.follower = {0.0, s.leader_velocity.front()};
  return s;
}

}  // namespace tailq::sim
