#include "tailq/autodiff/dense_net.h"

#include <cmath>

#include "tailq/error.h"

namespace tailq::autodiff {

DenseNet::DenseNet(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ShapeError("a network needs at least an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw ShapeError("layer sizes must be positive");
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

DenseNet DenseNet::he_uniform(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng) {
  DenseNet net(std::move(layer_sizes));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double fan_in = static_cast<double>(net.sizes_[l]);
    const bool hidden = l + 1 < net.num_layers();
    const double bound = std::sqrt((hidden ? 6.0 : 3.0) / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weights(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  }
  return net;
}

RowMatrixMap DenseNet::weights(std::size_t layer) {
  return {params_.data() + weight_offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

ConstRowMatrixMap DenseNet::weights(std::size_t layer) const {
  return {params_.data() + weight_offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

VectorMap DenseNet::bias(std::size_t layer) {
  return {params_.data() + bias_offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1])};
}

ConstVectorMap DenseNet::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::VectorXd DenseNet::forward(std::span<const double> input) const {
  if (input.size() != input_size()) {
    throw ShapeError("network expects " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(input.size()));
  }
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(input.data(), input.size());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::VectorXd z = weights(l) * h + bias(l);
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd DenseNet::forward_batch(const Eigen::MatrixXd& inputs, ForwardCache* cache) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw ShapeError("network expects " + std::to_string(input_size()) + " input rows, got " +
                     std::to_string(inputs.rows()));
  }
  if (cache != nullptr) cache->layer_inputs.resize(num_layers());
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weights(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    if (cache != nullptr) {
      cache->layer_inputs[l] = std::move(h);
    }
    h = std::move(z);
  }
  return h;
}

void DenseNet::backward_batch(const ForwardCache& cache, const Eigen::MatrixXd& grad_outputs,
                              std::span<double> grad_params) const {
  if (grad_params.size() != params_.size()) {
    throw ShapeError("gradient buffer has " + std::to_string(grad_params.size()) +
                     " entries, network has " + std::to_string(params_.size()));
  }
  if (cache.layer_inputs.size() != num_layers()) throw ShapeError("forward cache does not match network");
  if (static_cast<std::size_t>(grad_outputs.rows()) != output_size()) {
    throw ShapeError("output gradient has wrong row count");
  }
  Eigen::MatrixXd g = grad_outputs;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const Eigen::MatrixXd& in = cache.layer_inputs[l];
    // Products land in aligned temporaries; the caller's buffer only sees
    // elementwise adds, so results do not depend on its alignment.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dw = g * in.transpose();
    const Eigen::VectorXd db = g.rowwise().sum();
    double* w_out = grad_params.data() + weight_offset(l);
    for (Eigen::Index i = 0; i < dw.size(); ++i) w_out[i] += dw.data()[i];
    double* b_out = grad_params.data() + bias_offset(l);
    for (Eigen::Index i = 0; i < db.size(); ++i) b_out[i] += db[i];
    if (l > 0) {
      Eigen::MatrixXd back = weights(l).transpose() * g;
      // Layer input is a ReLU output: zero exactly where the pre-activation was <= 0.
      g = (in.array() > 0.0).select(back, 0.0);
    }
  }
}

std::string DenseNet::describe_parameter(std::size_t flat_index) const {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t w_begin = weight_offset(l);
    const std::size_t b_begin = bias_offset(l);
    const std::size_t b_end = b_begin + sizes_[l + 1];
    if (flat_index >= w_begin && flat_index < b_begin) {
      const std::size_t k = flat_index - w_begin;
      return "layer " + std::to_string(l) + " weight[" + std::to_string(k / sizes_[l]) + "," +
             std::to_string(k % sizes_[l]) + "]";
    }
    if (flat_index >= b_begin && flat_index < b_end) {
      return "layer " + std::to_string(l) + " bias[" + std::to_string(flat_index - b_begin) + "]";
    }
  }
  return "parameter " + std::to_string(flat_index) + " (out of range)";
}

}  // namespace tailq::autodiff
