#include "tailq/models/flow_train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tailq/autodiff/adam.h"
#include "tailq/autodiff/tape.h"
#include "tailq/error.h"
#include "tailq/quantile/quantile.h"
#include "training_util.h"

namespace tailq::models {
namespace {

using autodiff::Var;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Raw conditioner outputs for a set of rows: out[j][m] is (params x rows).
using RawParams = std::vector<std::vector<Eigen::MatrixXd>>;

RawParams raw_params(const ConditionalFlow& flow, std::span<const data::Sample> samples,
                     std::span<const std::size_t> rows,
                     std::vector<std::vector<autodiff::ForwardCache>>* caches = nullptr) {
  RawParams out(flow.dims());
  for (int j = 0; j < flow.dims(); ++j) {
    const Eigen::MatrixXd x = detail::input_matrix(samples, rows, flow.normalizer(), j);
    const auto& stack = flow.stack(j);
    for (std::size_t m = 0; m < stack.size(); ++m) {
      out[j].push_back(stack[m].conditioner.forward_batch(x, caches ? &(*caches)[j][m] : nullptr));
    }
  }
  return out;
}

CouplingTransform column_transform(CouplingKind kind, const Eigen::MatrixXd& raw, std::size_t col) {
  const auto c = raw.col(static_cast<Eigen::Index>(col));
  std::array<double, 5> buf{};
  for (Eigen::Index p = 0; p < c.size(); ++p) buf[p] = c(p);
  return CouplingTransform::from_raw(kind, std::span<const double>(buf.data(), static_cast<std::size_t>(c.size())));
}

// One transformer realized on the tape from its raw-parameter leaves.
struct TapeCoupling {
  CouplingKind kind;
  AffineParams<Var> affine;
  NlsqParams<Var> nlsq;

  TapeCoupling(CouplingKind k, std::span<const Var> raw) : kind(k) {
    if (kind == CouplingKind::kAffine) {
      affine = {raw[0], raw[1]};
    } else {
      nlsq = nlsq_from_raw(raw[0], raw[1], raw[2], raw[3], raw[4]);
    }
  }
  Var tau(Var z) const { return kind == CouplingKind::kAffine ? affine_tau(affine, z) : nlsq_tau(nlsq, z); }
  Var log_dtau(Var z) const {
    return kind == CouplingKind::kAffine ? affine_log_dtau(affine, z) : autodiff::log(nlsq_dtau(nlsq, z));
  }
};

// Standardized per-dimension objective of one datum, evaluated in doubles.
// AQF: pinball at the given level. ANF: negative log-density.
double datum_objective(const ConditionalFlow& flow, const RawParams& raw, std::size_t col, int j, double a_std,
                       double alpha) {
  const auto& per_dim = raw[j];
  if (flow.base() == BaseKind::kUniform) {
    double y = alpha;
    for (const auto& block : per_dim) y = column_transform(flow.coupling(), block, col).forward(y);
    return pinball(a_std, y, alpha);
  }
  double y = a_std;
  double log_det = 0.0;
  for (std::size_t m = per_dim.size(); m-- > 0;) {
    const CouplingTransform t = column_transform(flow.coupling(), per_dim[m], col);
    const double z = t.inverse(y);
    const double slope = t.derivative(z);
    if (!(slope > 0.0)) throw InvariantError("nonpositive coupling derivative in the likelihood");
    log_det += std::log(slope);
    y = z;
  }
  return 0.5 * y * y + kHalfLog2Pi + log_det;
}

// Mean objective over samples. alphas (AQF only) holds draws per datum and
// dimension: alphas[(i * dims + j) * draws + k]. raw_units rescales each
// dimension from standardized to raw action units.
double mean_objective(const ConditionalFlow& flow, std::span<const data::Sample> samples,
                      std::span<const double> alphas, std::size_t draws, bool raw_units) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto& norm = flow.normalizer();
  const int dims = flow.dims();
  constexpr std::size_t kChunk = 4096;
  double sum = 0.0;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < samples.size(); begin += kChunk) {
    const std::size_t end = std::min(samples.size(), begin + kChunk);
    rows.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
    const RawParams raw = raw_params(flow, samples, rows);
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 0; j < dims; ++j) {
        const double a_std = norm.standardize_action(samples[i].action[j], j);
        double v = 0.0;
        if (flow.base() == BaseKind::kUniform) {
          for (std::size_t k = 0; k < draws; ++k) {
            v += datum_objective(flow, raw, i - begin, j, a_std, alphas[(i * dims + j) * draws + k]);
          }
          v /= static_cast<double>(draws);
          if (raw_units) v *= norm.action_std()[j];
        } else {
          v = datum_objective(flow, raw, i - begin, j, a_std, 0.0);
          if (raw_units) v += std::log(norm.action_std()[j]);
        }
        sum += v;
      }
    }
  }
  return sum / static_cast<double>(samples.size());
}

std::vector<double> draw_levels(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(count);
  for (double& a : out) a = u(rng);
  return out;
}

void require_base(const ConditionalFlow& flow, BaseKind base, const char* what) {
  if (flow.base() != base) throw DomainError(std::string(what) + " does not apply to flow " + flow.name());
}

}  // namespace

FlowGradient flow_objective_gradient(const ConditionalFlow& flow, std::span<const data::Sample> samples,
                                     std::span<const std::size_t> rows, std::span<const double> alphas,
                                     std::size_t draws,
                                     std::vector<std::vector<autodiff::ForwardCache>>* caches) {
  if (rows.empty()) throw DataError("empty batch");
  const auto& normalizer = flow.normalizer();
  const int dims = flow.dims();
  const std::size_t depth = flow.stack_depth();
  const std::size_t np = raw_param_count(flow.coupling());
  const bool quantile_flow = flow.base() == BaseKind::kUniform;
  if (quantile_flow && alphas.size() != rows.size() * dims * draws) {
    throw ShapeError("need one level per datum, dimension and draw");
  }
  std::vector<std::vector<autodiff::ForwardCache>> local;
  if (caches == nullptr) {
    local.assign(dims, std::vector<autodiff::ForwardCache>(depth));
    caches = &local;
  }
  const auto cols = static_cast<Eigen::Index>(rows.size());
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  const RawParams raw = raw_params(flow, samples, rows, caches);
  RawParams grad_out(dims);
  for (int j = 0; j < dims; ++j) grad_out[j].assign(depth, Eigen::MatrixXd::Zero(np, cols));

  autodiff::Tape tape;
  std::vector<Var> leaves(static_cast<std::size_t>(dims) * depth * np);
  double total = 0.0;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const data::Sample& s = samples[rows[c]];
    tape.clear();
    for (int j = 0; j < dims; ++j) {
      for (std::size_t m = 0; m < depth; ++m) {
        for (std::size_t p = 0; p < np; ++p) {
          leaves[(j * depth + m) * np + p] =
              tape.variable(raw[j][m](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)));
        }
      }
    }
    Var loss = tape.constant(0.0);
    for (int j = 0; j < dims; ++j) {
      const double a_std = normalizer.standardize_action(s.action[j], j);
      std::vector<TapeCoupling> stack;
      for (std::size_t m = 0; m < depth; ++m) {
        stack.emplace_back(flow.coupling(), std::span<const Var>(leaves.data() + (j * depth + m) * np, np));
      }
      if (quantile_flow) {
        for (std::size_t k = 0; k < draws; ++k) {
          const double alpha = alphas[(c * dims + j) * draws + k];
          Var y = tape.constant(alpha);
          for (const auto& t : stack) y = t.tau(y);
          loss = loss + pinball(a_std, y, alpha) * (1.0 / static_cast<double>(draws));
        }
      } else {
        // Walk the stack backwards. Each numeric inverse z* enters the tape
        // as z = z* + (y - tau(z*)) / tau'(z*), whose partials are those of
        // the implicit function z(y, theta).
        Var y = tape.constant(a_std);
        Var log_det = tape.constant(0.0);
        for (std::size_t m = depth; m-- > 0;) {
          const CouplingTransform numeric = column_transform(flow.coupling(), raw[j][m], c);
          const double z_star = numeric.inverse(y.value());
          const double slope = numeric.derivative(z_star);
          if (!(slope > 0.0)) throw InvariantError("nonpositive coupling derivative in the likelihood");
          const Var t_at = stack[m].tau(tape.constant(z_star));
          const autodiff::Edge edges[] = {{y, 1.0 / slope}, {t_at, -1.0 / slope}};
          const Var z = tape.nary(z_star, edges);
          log_det = log_det + stack[m].log_dtau(z);
          y = z;
        }
        loss = loss + 0.5 * autodiff::square(y) + kHalfLog2Pi + log_det;
      }
    }
    tape.backward(loss);
    total += loss.value();
    for (int j = 0; j < dims; ++j) {
      for (std::size_t m = 0; m < depth; ++m) {
        for (std::size_t p = 0; p < np; ++p) {
          grad_out[j][m](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) =
              tape.grad(leaves[(j * depth + m) * np + p]) * inv_b;
        }
      }
    }
  }

  FlowGradient out;
  out.loss = total * inv_b;
  out.grads.resize(dims);
  for (int j = 0; j < dims; ++j) {
    for (std::size_t m = 0; m < depth; ++m) {
      const auto& net = flow.stack(j)[m].conditioner;
      std::vector<double> g(net.num_parameters(), 0.0);
      net.backward_batch((*caches)[j][m], grad_out[j][m], g);
      out.grads[j].push_back(std::move(g));
    }
  }
  return out;
}

double aqf_loss(const ConditionalFlow& flow, std::span<const data::Sample> batch, std::mt19937_64& rng,
                std::size_t draws) {
  require_base(flow, BaseKind::kUniform, "aqf_loss");
  if (batch.empty()) throw DataError("aqf_loss: empty batch");
  if (draws == 0) throw DomainError("aqf_loss: at least one level draw per datum is needed");
  const auto alphas = draw_levels(batch.size() * flow.dims() * draws, rng);
  return mean_objective(flow, batch, alphas, draws, true);
}

double aqf_loss_at_levels(const ConditionalFlow& flow, std::span<const data::Sample> batch,
                          std::span<const double> alphas) {
  require_base(flow, BaseKind::kUniform, "aqf_loss");
  if (batch.empty()) throw DataError("aqf_loss: empty batch");
  if (alphas.size() != batch.size() * flow.dims()) throw ShapeError("aqf_loss: need one level per datum and dimension");
  for (double a : alphas) QuantileLevel{a};
  return mean_objective(flow, batch, alphas, 1, true);
}

double anf_nll(const ConditionalFlow& flow, std::span<const data::Sample> batch) {
  require_base(flow, BaseKind::kNormal, "anf_nll");
  if (batch.empty()) throw DataError("anf_nll: empty batch");
  return mean_objective(flow, batch, {}, 1, true);
}

FlowTrainResult flow_train(std::span<const data::Sample> train, std::span<const data::Sample> validation,
                           FlowKind kind, const data::Normalizer& normalizer, const TrainConfig& config,
                           std::uint64_t seed) {
  if (train.empty()) throw DataError("flow_train: empty training split");
  if (config.batch_size == 0) throw DomainError("batch_size must be positive");
  if (config.mc_draws == 0) throw DomainError("mc_draws must be positive");
  std::mt19937_64 rng(seed);
  ConditionalFlow flow(kind, normalizer, config.stack_depth, config.hidden, rng);
  const std::string label(to_string(kind));
  const int dims = flow.dims();
  const std::size_t depth = flow.stack_depth();
  const bool quantile_flow = flow.base() == BaseKind::kUniform;
  const std::size_t draws = quantile_flow ? config.mc_draws : 1;

  // Fixed level stream for comparable monitoring losses.
  const std::uint64_t monitor_seed = seed ^ 0x6d6f6e69746f72ULL;
  auto monitor_loss = [&](std::span<const data::Sample> s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> alphas;
    if (quantile_flow) {
      std::mt19937_64 mrng(monitor_seed);
      alphas = draw_levels(s.size() * dims * draws, mrng);
    }
    return mean_objective(flow, s, alphas, draws, false);
  };

  TrainingLog log;
  log.initial_train_loss = monitor_loss(train);
  detail::check_finite_loss(log.initial_train_loss, 0, label);

  std::vector<std::vector<autodiff::Adam>> adams(dims);
  std::vector<std::vector<autodiff::ForwardCache>> caches(dims, std::vector<autodiff::ForwardCache>(depth));
  for (int j = 0; j < dims; ++j) {
    for (std::size_t m = 0; m < depth; ++m) {
      adams[j].emplace_back(flow.stack(j)[m].conditioner.num_parameters(), config.adam);
    }
  }

  std::vector<double> alphas;
  std::uniform_real_distribution<double> level_dist(0.0, 1.0);
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
      if (quantile_flow) {
        alphas.resize(rows.size() * dims * draws);
        for (double& a : alphas) a = level_dist(rng);
      }
      const FlowGradient g = flow_objective_gradient(flow, train, rows, alphas, draws, &caches);
      const double batch_loss = g.loss;
      detail::check_finite_loss(batch_loss, epoch, label);
      const double scale = lr_scale(config.schedule, step++, total_steps);
      for (int j = 0; j < dims; ++j) {
        for (std::size_t m = 0; m < depth; ++m) {
          autodiff::DenseNet& net = flow.stack(j)[m].conditioner;
          try {
            adams[j][m].step(net.parameters(), g.grads[j][m], scale);
          } catch (const autodiff::NonFiniteGradientError& e) {
            throw TrainingError(label + ": non-finite gradient for dimension " + std::to_string(j) +
                                " transformer " + std::to_string(m) + " " + net.describe_parameter(e.index()) +
                                " in epoch " + std::to_string(epoch));
          }
        }
      }
      epoch_sum += batch_loss * static_cast<double>(rows.size());
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_sum / static_cast<double>(train.size());
    entry.validation_loss = monitor_loss(validation);
    entry.constraint_violations = flow.count_constraint_violations(validation);
    log.epochs.push_back(entry);
  }
  log.final_train_loss = monitor_loss(train);
  detail::check_finite_loss(log.final_train_loss, config.epochs, label);
  return {std::move(flow), std::move(log)};
}

}  // namespace tailq::models
