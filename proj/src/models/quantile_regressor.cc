#include "tailq/models/quantile_regressor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailq/autodiff/adam.h"
#include "tailq/autodiff/serialize.h"
#include "tailq/autodiff/tape.h"
#include "tailq/error.h"
#include "tailq/io/csv.h"
#include "training_util.h"

namespace tailq::models {

QuantileRegressor::QuantileRegressor(QuantileLevel level, autodiff::DenseNet net, data::Normalizer normalizer)
    : level_(level), net_(std::move(net)), normalizer_(std::move(normalizer)) {
  if (net_.input_size() != normalizer_.feature_count() || net_.output_size() != 1) {
    throw ShapeError("quantile regressor net must map " + std::to_string(normalizer_.feature_count()) +
                     " features to 1 output");
  }
}

double QuantileRegressor::predict(std::span<const double> features) const {
  const auto x = normalizer_.standardize_features(features);
  return normalizer_.destandardize_action(net_.forward(x)(0), 0);
}

nlohmann::json QuantileRegressor::to_json() const {
  return {{"format_version", 1},
          {"type", "quantile_regressor"},
          {"level", level()},
          {"net", autodiff::net_to_json(net_)},
          {"normalizer", normalizer_.to_json()}};
}

QuantileRegressor QuantileRegressor::from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "quantile_regressor") throw DataError("not a quantile regressor checkpoint");
    if (j.at("format_version").get<int>() != 1) throw DataError("unsupported checkpoint format version");
    return QuantileRegressor(QuantileLevel(j.at("level").get<double>()), autodiff::net_from_json(j.at("net")),
                             data::Normalizer::from_json(j.at("normalizer")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed quantile regressor checkpoint: ") + e.what());
  }
}

double qr_loss(const QuantileRegressor& model, std::span<const data::Sample> samples) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto& norm = model.normalizer();
  constexpr std::size_t kChunk = 4096;
  double sum = 0.0;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < samples.size(); begin += kChunk) {
    const std::size_t end = std::min(samples.size(), begin + kChunk);
    rows.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
    const Eigen::MatrixXd out = model.net().forward_batch(detail::input_matrix(samples, rows, norm, 0));
    for (std::size_t i = begin; i < end; ++i) {
      const double a = norm.standardize_action(samples[i].action[0], 0);
      sum += pinball(a, out(0, static_cast<Eigen::Index>(i - begin)), model.level());
    }
  }
  return sum / static_cast<double>(samples.size());
}

QrTrainResult qr_train(std::span<const data::Sample> train, std::span<const data::Sample> validation,
                       QuantileLevel level, const data::Normalizer& normalizer, const TrainConfig& config,
                       std::uint64_t seed) {
  if (train.empty()) throw DataError("qr_train: empty training split");
  if (config.batch_size == 0) throw DomainError("batch_size must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> sizes = {normalizer.feature_count()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  QuantileRegressor model(level, autodiff::DenseNet::he_uniform(sizes, rng), normalizer);
  autodiff::DenseNet& net = model.net();

  const std::string label = "qr@" + io::format_double(level.value());
  TrainingLog log;
  log.initial_train_loss = qr_loss(model, train);
  detail::check_finite_loss(log.initial_train_loss, 0, label);

  autodiff::Adam adam(net.num_parameters(), config.adam);
  autodiff::Tape tape;
  std::vector<double> grads(net.num_parameters());
  autodiff::ForwardCache cache;
  std::vector<std::size_t> order = detail::iota_indices(train.size());
  const std::size_t steps_per_epoch = (train.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const double inv_b = 1.0 / static_cast<double>(rows.size());
      const Eigen::MatrixXd out = net.forward_batch(detail::input_matrix(train, rows, normalizer, 0), &cache);
      Eigen::MatrixXd grad_out(1, out.cols());
      double batch_loss = 0.0;
      for (std::size_t c = 0; c < rows.size(); ++c) {
        tape.clear();
        const autodiff::Var pred = tape.variable(out(0, static_cast<Eigen::Index>(c)));
        const double a = normalizer.standardize_action(train[rows[c]].action[0], 0);
        const autodiff::Var loss = pinball(a, pred, level.value());
        tape.backward(loss);
        batch_loss += loss.value();
        grad_out(0, static_cast<Eigen::Index>(c)) = tape.grad(pred) * inv_b;
      }
      batch_loss *= inv_b;
      detail::check_finite_loss(batch_loss, epoch, label);
      std::fill(grads.begin(), grads.end(), 0.0);
      net.backward_batch(cache, grad_out, grads);
      try {
        adam.step(net.parameters(), grads, lr_scale(config.schedule, step++, total_steps));
      } catch (const autodiff::NonFiniteGradientError& e) {
        throw TrainingError(label + ": non-finite gradient for " + net.describe_parameter(e.index()) +
                            " in epoch " + std::to_string(epoch));
      }
      epoch_sum += batch_loss * static_cast<double>(rows.size());
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_sum / static_cast<double>(train.size());
    entry.validation_loss = qr_loss(model, validation);
    log.epochs.push_back(entry);
  }
  log.final_train_loss = qr_loss(model, train);
  detail::check_finite_loss(log.final_train_loss, config.epochs, label);
  return {std::move(model), std::move(log)};
}

void QuantileRegressorSet::add(QuantileRegressor model) {
  if (!models_.empty() && model.normalizer().feature_count() != models_.begin()->second.normalizer().feature_count()) {
    throw ShapeError("quantile regressors in one set must share the feature layout");
  }
  const double level = model.level();
  models_.insert_or_assign(level, std::move(model));
}

bool QuantileRegressorSet::has_level(double alpha) const { return models_.contains(alpha); }

const QuantileRegressor& QuantileRegressorSet::at(double alpha) const {
  const auto it = models_.find(alpha);
  if (it == models_.end()) {
    throw DomainError("no quantile regressor trained for level " + io::format_double(alpha));
  }
  return it->second;
}

std::vector<double> QuantileRegressorSet::levels() const {
  std::vector<double> out;
  for (const auto& [level, model] : models_) out.push_back(level);
  return out;
}

std::size_t QuantileRegressorSet::feature_count() const {
  return models_.empty() ? 0 : models_.begin()->second.normalizer().feature_count();
}

double QuantileRegressorSet::quantile(std::span<const double> features, double alpha, std::size_t dim,
                                      std::span<const double> prefix) const {
  if (dim != 0 || !prefix.empty()) throw DomainError("quantile regression models only the longitudinal action");
  return at(alpha).predict(features);
}

}  // namespace tailq::models
