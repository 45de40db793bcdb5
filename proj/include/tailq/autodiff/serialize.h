#pragma once

#include <nlohmann/json.hpp>

#include "tailq/autodiff/dense_net.h"

namespace tailq::autodiff {

/// {"layer_sizes", "activation", "weights" (per layer, row-major), "biases"}.
nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

}  // namespace tailq::autodiff
