#include "tailq/data/sample.h"

#include <algorithm>
#include <string>

#include "tailq/error.h"

namespace tailq::data {

namespace {
constexpr std::string_view kFeatureNames[] = {"dhw",    "thw",        "ttc",        "v_follow",
                                              "v_lead", "lanes_left", "lanes_right"};
constexpr std::string_view kActionNames[] = {"accel_long", "accel_lat"};
}  // namespace

int check_dims(int dims) {
  if (dims != 1 && dims != 2) throw DomainError("dims must be 1 or 2, got " + std::to_string(dims));
  return dims;
}

std::size_t feature_count(int dims) { return check_dims(dims) == 1 ? 5 : 7; }

std::span<const std::string_view> feature_names(int dims) {
  return {kFeatureNames, feature_count(dims)};
}

std::span<const std::string_view> action_names(int dims) {
  return {kActionNames, static_cast<std::size_t>(check_dims(dims))};
}

std::vector<double> StateFeatures::to_vector(int dims) const {
  std::vector<double> v = {dhw, thw, ttc, v_follow, v_lead};
  if (check_dims(dims) == 2) {
    v.push_back(static_cast<double>(lanes_left));
    v.push_back(static_cast<double>(lanes_right));
  }
  return v;
}

StateFeatures StateFeatures::from_vector(std::span<const double> values, int dims) {
  if (values.size() != feature_count(dims)) {
    throw ShapeError("expected " + std::to_string(feature_count(dims)) + " features, got " +
                     std::to_string(values.size()));
  }
  StateFeatures s;
  s.dhw = values[0];
  s.thw = values[1];
  s.ttc = values[2];
  s.v_follow = values[3];
  s.v_lead = values[4];
  if (dims == 2) {
    s.lanes_left = static_cast<int>(values[5]);
    s.lanes_right = static_cast<int>(values[6]);
  }
  return s;
}

StateFeatures make_features(double dhw, double v_follow, double v_lead, double cap) {
  StateFeatures s;
  s.dhw = dhw;
  s.v_follow = v_follow;
  s.v_lead = v_lead;
  s.thw = v_follow > 0.0 ? std::min(dhw / v_follow, cap) : cap;
  const double closing = v_follow - v_lead;
  s.ttc = closing > 0.0 ? std::min(dhw / closing, cap) : cap;
  return s;
}

}  // namespace tailq::data
