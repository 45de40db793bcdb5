#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tailq::autodiff {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

/// Activations recorded by DenseNet::forward_batch for the backward pass.
/// layer_inputs[l] is the (width x batch) input of weight layer l.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> layer_inputs;
};

/// Fully connected feed-forward network: ReLU on hidden layers, identity on
/// the output layer. All parameters live in one contiguous buffer laid out
/// layer by layer as [W (out x in, row-major), b (out)].
class DenseNet {
 public:
  DenseNet() = default;
  /// Network with all weights and biases zero.
  explicit DenseNet(std::vector<std::size_t> layer_sizes);

  /// He-uniform weights on ReLU layers, LeCun-uniform on the linear output
  /// layer, zero biases. Identical rng state gives identical weights.
  static DenseNet he_uniform(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  RowMatrixMap weights(std::size_t layer);
  ConstRowMatrixMap weights(std::size_t layer) const;
  VectorMap bias(std::size_t layer);
  ConstVectorMap bias(std::size_t layer) const;

  /// Single input. Throws ShapeError on a length mismatch.
  Eigen::VectorXd forward(std::span<const double> input) const;

  /// Column-per-sample batch: inputs is (input_size x batch). When cache is
  /// non-null the activations needed by backward_batch are stored there.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, ForwardCache* cache = nullptr) const;

  /// Adds d(loss)/d(parameters) to grad_params given d(loss)/d(outputs).
  void backward_batch(const ForwardCache& cache, const Eigen::MatrixXd& grad_outputs,
                      std::span<double> grad_params) const;

  /// Human-readable name of a flat parameter index, e.g. "layer 1 weight[3,7]".
  std::string describe_parameter(std::size_t flat_index) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  // Aligned so vectorized kernels see the same memory layout on every run;
  // otherwise summation order (and the last bits) can vary between runs.
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

}  // namespace tailq::autodiff
