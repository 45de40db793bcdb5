#include "tailq/autodiff/serialize.h"

#include "tailq/error.h"

namespace tailq::autodiff {

nlohmann::json net_to_json(const DenseNet& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto w = net.weights(l);
    weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
    auto b = net.bias(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {{"layer_sizes", net.layer_sizes()},
          {"activation", "relu"},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

DenseNet net_from_json(const nlohmann::json& j) {
  try {
    if (j.at("activation").get<std::string>() != "relu") {
      throw DataError("unsupported activation tag '" + j.at("activation").get<std::string>() + "'");
    }
    DenseNet net(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != net.num_layers() || biases.size() != net.num_layers()) {
      throw DataError("checkpoint layer count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const auto w = weights[l].get<std::vector<double>>();
      const auto b = biases[l].get<std::vector<double>>();
      auto wm = net.weights(l);
      auto bm = net.bias(l);
      if (w.size() != static_cast<std::size_t>(wm.size()) || b.size() != static_cast<std::size_t>(bm.size())) {
        throw DataError("checkpoint layer " + std::to_string(l) + " has the wrong number of values");
      }
      std::copy(w.begin(), w.end(), wm.data());
      std::copy(b.begin(), b.end(), bm.data());
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("malformed network checkpoint: ") + e.what());
  }
}

}  // namespace tailq::autodiff
