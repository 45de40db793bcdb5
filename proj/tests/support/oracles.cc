#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailq/autodiff/tape.h"
#include "tailq/data/normalizer.h"
#include "tailq/models/coupling.h"
#include "tailq/models/flow.h"
#include "tailq/quantile/quantile.h"

namespace tailq::testing {
namespace {

// Hidden-layer pre-activations of one input, straight from the flat buffer.
std::vector<double> pre_activations(const autodiff::DenseNet& net, const std::vector<double>& input) {
  std::vector<double> out;
  const auto& sizes = net.layer_sizes();
  const auto p = net.parameters();
  std::vector<double> x = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], width = sizes[l + 1];
    std::vector<double> y(width);
    for (std::size_t r = 0; r < width; ++r) {
      double s = p[offset + in * width + r];
      for (std::size_t c = 0; c < in; ++c) s += p[offset + r * in + c] * x[c];
      y[r] = s;
    }
    offset += in * width + width;
    const bool hidden = l + 2 < sizes.size();
    if (hidden) {
      out.insert(out.end(), y.begin(), y.end());
      for (double& v : y) v = std::max(0.0, v);
    }
    x = std::move(y);
  }
  return out;
}

}  // namespace

std::vector<double> naive_forward(const autodiff::DenseNet& net, const std::vector<double>& input) {
  const auto& sizes = net.layer_sizes();
  const auto p = net.parameters();
  std::vector<double> x = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], width = sizes[l + 1];
    std::vector<double> y(width);
    for (std::size_t r = 0; r < width; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < in; ++c) s += p[offset + r * in + c] * x[c];
      s += p[offset + in * width + r];
      y[r] = (l + 2 < sizes.size()) ? std::max(0.0, s) : s;
    }
    offset += in * width + width;
    x = std::move(y);
  }
  return x;
}

double naive_quantile(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  // Smallest rank k (1-based) with k >= alpha * n; alpha * n is compared in
  // long double to dodge representation noise such as 0.29 * 100.
  const long double target = static_cast<long double>(alpha) * values.size();
  std::size_t k = 1;
  while (k < values.size() && static_cast<long double>(k) < target - 1e-12L) ++k;
  return values[k - 1];
}

MinimizerReport minimizer_equivalence(std::size_t datasets, std::size_t n, double grid_step, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MinimizerReport report;
  for (std::size_t d = 0; d < datasets; ++d) {
    std::vector<double> values(n);
    const double scale = 0.2 + 2.0 * unit(rng);
    const double shift = 4.0 * unit(rng) - 2.0;
    for (double& v : values) {
      switch (d % 3) {
        case 0: v = shift + scale * normal(rng); break;
        case 1: v = shift + scale * (unit(rng) - 0.5); break;
        default: v = shift + scale * -std::log(1.0 - unit(rng)); break;
      }
    }
    const EmpiricalDistribution dist(values);
    for (double alpha : kEvalLevels) {
      const double argmin = tal_minimizer_oracle(dist, QuantileLevel(alpha), grid_step);
      const double q = empirical_quantile(dist, QuantileLevel(alpha));
      const double independent = naive_quantile(values, alpha);
      const double gap = std::max(std::abs(argmin - q), std::abs(argmin - independent));
      ++report.checks;
      report.worst_gap = std::max(report.worst_gap, gap);
      if (gap > grid_step * (1.0 + 1e-9) || q != independent) ++report.failures;
    }
  }
  return report;
}

GradientReport gradient_check(std::size_t configs, std::uint64_t seed, double rel_tol, double abs_floor) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> width(1, 8), depth(1, 3), outputs(1, 3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr Eigen::Index kBatch = 3;
  constexpr double h = 1e-5;
  GradientReport report;

  while (report.configs < configs) {
    std::vector<std::size_t> sizes = {width(rng)};
    const std::size_t layers = depth(rng);
    for (std::size_t l = 1; l < layers; ++l) sizes.push_back(width(rng));
    sizes.push_back(outputs(rng));
    auto net = autodiff::DenseNet::he_uniform(sizes, rng);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = 0.5 * unit(rng);
    }
    const double alpha = kEvalLevels[std::uniform_int_distribution<std::size_t>(0, 8)(rng)];
    Eigen::MatrixXd x(static_cast<Eigen::Index>(sizes.front()), kBatch);
    Eigen::MatrixXd target(static_cast<Eigen::Index>(sizes.back()), kBatch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = unit(rng);

    auto loss_of = [&](const autodiff::DenseNet& n) {
      double s = 0.0;
      for (Eigen::Index b = 0; b < kBatch; ++b) {
        std::vector<double> in(x.col(b).data(), x.col(b).data() + x.rows());
        const auto out = naive_forward(n, in);
        for (std::size_t o = 0; o < out.size(); ++o) {
          const double r = target(static_cast<Eigen::Index>(o), b) - out[o];
          s += std::max(alpha * r, (alpha - 1.0) * r);
        }
      }
      return s / kBatch;
    };

    // Stay away from kinks so central differences are exact up to rounding.
    bool near_kink = false;
    for (Eigen::Index b = 0; b < kBatch && !near_kink; ++b) {
      std::vector<double> in(x.col(b).data(), x.col(b).data() + x.rows());
      for (double v : pre_activations(net, in)) near_kink |= std::abs(v) < 1e-4;
      const auto out = naive_forward(net, in);
      for (std::size_t o = 0; o < out.size(); ++o) {
        near_kink |= std::abs(target(static_cast<Eigen::Index>(o), b) - out[o]) < 1e-4;
      }
    }
    if (near_kink) continue;
    ++report.configs;

    autodiff::ForwardCache cache;
    const Eigen::MatrixXd out = net.forward_batch(x, &cache);
    Eigen::MatrixXd grad_out(out.rows(), out.cols());
    autodiff::Tape tape;
    for (Eigen::Index b = 0; b < kBatch; ++b) {
      for (Eigen::Index o = 0; o < out.rows(); ++o) {
        tape.clear();
        const autodiff::Var pred = tape.variable(out(o, b));
        tape.backward(pinball(target(o, b), pred, alpha));
        grad_out(o, b) = tape.grad(pred) / kBatch;
      }
    }
    std::vector<double> grads(net.num_parameters(), 0.0);
    net.backward_batch(cache, grad_out, grads);

    for (std::size_t i = 0; i < net.num_parameters(); ++i) {
      const double saved = net.parameters()[i];
      net.parameters()[i] = saved + h;
      const double up = loss_of(net);
      net.parameters()[i] = saved - h;
      const double down = loss_of(net);
      net.parameters()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double diff = std::abs(fd - grads[i]);
      ++report.parameters;
      report.worst_abs_error = std::max(report.worst_abs_error, diff);
      if (diff <= abs_floor) continue;
      const double rel = diff / std::max(std::abs(fd), std::abs(grads[i]));
      if (rel > report.worst_rel_error) {
        report.worst_rel_error = rel;
        report.worst = net.describe_parameter(i);
      }
      if (rel > rel_tol) ++report.failures;
    }
  }
  return report;
}

double nlsq_min_slope_ratio(double /*a_raw*/, double b_raw, double c_raw, double d_raw, double g_raw) {
  const double b = std::exp(b_raw);
  const double d = std::log1p(std::exp(d_raw)) + 1e-3;
  const double c = 0.99 * 8.0 * std::sqrt(3.0) / 9.0 * (b / d) * std::tanh(c_raw);
  double worst = std::numeric_limits<double>::infinity();
  // z-grid dense in t = d z + g around the bump, plus a wide uniform z-grid.
  auto slope = [&](double z) {
    const double t = d * z + g_raw;
    return (b - 2.0 * c * d * t / ((1.0 + t * t) * (1.0 + t * t))) / b;
  };
  for (int k = 0; k <= 20000; ++k) {
    const double t = -10.0 + 1e-3 * k;
    worst = std::min(worst, slope((t - g_raw) / d));
  }
  for (int k = 0; k <= 20000; ++k) worst = std::min(worst, slope(-50.0 + 5e-3 * k));
  return worst;
}

CouplingReport coupling_check(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  CouplingReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<double, 5> raw = {u(-3, 3), u(-2, 2), u(-4, 4), u(-3, 3), u(-3, 3)};
    const auto nlsq = models::CouplingTransform::from_raw(models::CouplingKind::kNlsq, raw);
    const double z = u(-5, 5);
    report.worst_round_trip = std::max(report.worst_round_trip, std::abs(z - nlsq.inverse(nlsq.forward(z))));
    report.worst_derivative_ratio =
        std::min(report.worst_derivative_ratio, nlsq_min_slope_ratio(raw[0], raw[1], raw[2], raw[3], raw[4]));

    const auto affine = models::CouplingTransform::affine(u(-3, 3), u(-2, 2));
    const double z2 = u(-5, 5);
    report.worst_round_trip = std::max(report.worst_round_trip, std::abs(z2 - affine.inverse(affine.forward(z2))));
    report.transforms += 2;
  }
  return report;
}

LogDetReport logdet_check(std::size_t configs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  LogDetReport report;
  const auto norm = data::Normalizer::identity(1);
  for (std::size_t i = 0; i < configs; ++i) {
    const auto kind = (i % 2 == 0) ? models::FlowKind::kAnfNlsq : models::FlowKind::kAnfAffine;
    const auto depth = static_cast<std::size_t>(1 + i % 3);
    models::ConditionalFlow flow(kind, norm, depth, {8}, rng);
    for (auto& t : flow.stack(0)) {
      auto bias = t.conditioner.bias(t.conditioner.num_layers() - 1);
      for (Eigen::Index k = 0; k < bias.size(); ++k) bias(k) = u(-1.0, 1.0);
    }
    std::vector<double> ctx(data::feature_count(1));
    for (double& v : ctx) v = u(-2, 2);
    const double a = u(-3, 3);
    double log_dz_da = 0.0;
    flow.invert_standardized(0, ctx, a, &log_dz_da);
    const double h = 1e-5;
    const double fd = (flow.invert_standardized(0, ctx, a + h) - flow.invert_standardized(0, ctx, a - h)) / (2 * h);
    const double rel = std::abs(std::exp(log_dz_da) - fd) / std::abs(fd);
    report.worst_rel_error = std::max(report.worst_rel_error, rel);
    ++report.configs;
  }
  return report;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace tailq::testing
