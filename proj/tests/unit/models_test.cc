#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tailq/autodiff/dense_net.h"
#include "tailq/data/normalizer.h"
#include "tailq/error.h"
#include "tailq/models/coupling.h"
#include "tailq/models/flow.h"
#include "tailq/models/flow_train.h"
#include "tailq/models/quantile_regressor.h"
#include "oracles.h"

namespace tailq::models {
namespace {

using data::Normalizer;
using data::Sample;

std::vector<Sample> random_states(std::size_t n, std::uint64_t seed, int dims = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> v(15, 35), gap(10, 80);
  std::uniform_int_distribution<int> lanes(0, 2);
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.state = data::make_features(gap(rng), v(rng), v(rng));
    if (dims == 2) {
      s.state.lanes_left = lanes(rng);
      s.state.lanes_right = 2 - s.state.lanes_left;
    }
  }
  return out;
}

// Transformer whose parameters ignore the context: zero weights, bias = raw.
Transformer fixed_transformer(CouplingKind kind, std::size_t inputs, std::vector<double> raw) {
  autodiff::DenseNet net({inputs, raw.size()});
  for (std::size_t i = 0; i < raw.size(); ++i) net.bias(0)(static_cast<Eigen::Index>(i)) = raw[i];
  return {kind, std::move(net)};
}

ConditionalFlow affine_flow(FlowKind kind, double shift, double log_scale) {
  std::vector<std::vector<Transformer>> stacks = {
      {fixed_transformer(CouplingKind::kAffine, data::feature_count(1), {shift, log_scale})}};
  return ConditionalFlow(kind, Normalizer::identity(1), std::move(stacks));
}

TEST(QuantileRegressor, ZeroNetPredictsBias) {
  autodiff::DenseNet net({5, 64, 64, 64, 64, 1});
  net.bias(4)(0) = 1.25;
  const QuantileRegressor qr(QuantileLevel(0.9), std::move(net), Normalizer::identity(1));
  for (const auto& s : random_states(5, 1)) EXPECT_EQ(qr.predict(s.state.to_vector(1)), 1.25);
}

TEST(QuantileRegressor, PredictIsNetThenDestandardize) {
  auto samples = random_states(200, 2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (auto& s : samples) s.action[0] = 3.0 + 2.0 * n(rng);
  const auto norm = Normalizer::fit(samples, 1);
  const QuantileRegressor qr(QuantileLevel(0.1), autodiff::DenseNet::he_uniform({5, 16, 1}, rng), norm);
  for (const auto& s : samples) {
    const auto raw = s.state.to_vector(1);
    std::vector<double> x(raw.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (raw[i] - norm.feature_mean()[i]) / norm.feature_std()[i];
    const double expected = testing::naive_forward(qr.net(), x)[0] * norm.action_std()[0] + norm.action_mean()[0];
    EXPECT_NEAR(qr.predict(raw), expected, 1e-12);
  }
  // Pointwise: the same state gives the same answer regardless of neighbors.
  EXPECT_EQ(qr.predict(samples[3].state.to_vector(1)), qr.predict(samples[3].state.to_vector(1)));
}

TEST(QuantileRegressor, FeatureMismatchRejected) {
  const QuantileRegressor qr(QuantileLevel(0.5), autodiff::DenseNet({5, 1}), Normalizer::identity(1));
  const std::vector<double> wrong(7, 0.0);
  EXPECT_THROW(qr.predict(wrong), ShapeError);
}

TEST(QuantileRegressor, ConstantDataCollapses) {
  auto samples = random_states(1000, 3);
  for (auto& s : samples) s.action[0] = -1.7;
  const auto validation = std::span(samples).first(200);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 16;
  cfg.adam.learning_rate = 1e-2;
  for (double alpha : {0.05, 0.5, 0.95}) {
    const auto result =
        qr_train(samples, validation, QuantileLevel(alpha), Normalizer::fit(samples, 1), cfg, 7);
    EXPECT_LE(result.log.final_train_loss, result.log.initial_train_loss);
    EXPECT_LT(result.log.epochs.back().validation_loss, alpha == 0.5 ? 1e-3 : 1e-2) << "alpha " << alpha;
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(result.model.predict(samples[i].state.to_vector(1)), -1.7, 0.05);
  }
}

TEST(QuantileRegressor, TwoPointDataRecoversEmpiricalQuantiles) {
  auto samples = random_states(2000, 4);
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> actions;
  for (auto& s : samples) {
    s.action[0] = coin(rng) ? 1.0 : 0.0;
    actions.push_back(s.action[0]);
  }
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 64;
  cfg.adam.learning_rate = 1e-2;
  cfg.hidden = {32, 32};
  for (double alpha : {0.25, 0.75}) {
    const double expected = testing::naive_quantile(actions, alpha);
    const auto result = qr_train(samples, {}, QuantileLevel(alpha), Normalizer::fit(samples, 1), cfg, 11);
    for (int i = 0; i < 50; ++i) {
      EXPECT_NEAR(result.model.predict(samples[i].state.to_vector(1)), expected, 0.05) << "alpha " << alpha;
    }
  }
}

TEST(QuantileRegressor, SameSeedSameLog) {
  auto samples = random_states(300, 5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (auto& s : samples) s.action[0] = n(rng);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = {8};
  const auto norm = Normalizer::fit(samples, 1);
  const auto a = qr_train(samples, samples, QuantileLevel(0.9), norm, cfg, 3);
  const auto b = qr_train(samples, samples, QuantileLevel(0.9), norm, cfg, 3);
  EXPECT_EQ(a.log.epochs, b.log.epochs);
  EXPECT_EQ(a.model.to_json(), b.model.to_json());
}

TEST(QuantileRegressor, CheckpointRoundTrip) {
  std::mt19937_64 rng(6);
  const QuantileRegressor qr(QuantileLevel(0.99), autodiff::DenseNet::he_uniform({5, 4, 1}, rng),
                             Normalizer::identity(1));
  const auto back = QuantileRegressor::from_json(nlohmann::json::parse(qr.to_json().dump()));
  const auto s = random_states(1, 6)[0].state.to_vector(1);
  EXPECT_EQ(back.predict(s), qr.predict(s));
  EXPECT_EQ(back.level(), 0.99);
}

TEST(QuantileRegressorSet, MissingLevelNamed) {
  QuantileRegressorSet set;
  set.add(QuantileRegressor(QuantileLevel(0.5), autodiff::DenseNet({5, 1}), Normalizer::identity(1)));
  const auto s = random_states(1, 1)[0].state.to_vector(1);
  EXPECT_EQ(set.quantile(s, 0.5), 0.0);
  try {
    set.quantile(s, 0.99);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("0.99"), std::string::npos);
  }
}

TEST(Coupling, AffineExamples) {
  const auto t = CouplingTransform::affine(2.0, std::log(3.0));
  EXPECT_DOUBLE_EQ(t.forward(0.5), 3.5);
  EXPECT_DOUBLE_EQ(t.inverse(3.5), 0.5);
}

TEST(Coupling, NlsqWithoutBumpIsAffine) {
  const auto t = CouplingTransform::nlsq(1.0, 2.0, 0.0, 0.7, -0.3);
  EXPECT_EQ(t.forward(2.0), 5.0);
  EXPECT_EQ(t.inverse(5.0), (5.0 - 1.0) / 2.0);
  EXPECT_EQ(t.inverse(-3.3), (-3.3 - 1.0) / 2.0);
}

TEST(Coupling, ViolatingParametersRejectedAtConstruction) {
  EXPECT_THROW(CouplingTransform::nlsq(0.0, 1.0, 5.0, 1.0, 0.0), InvariantError);
  EXPECT_THROW(CouplingTransform::nlsq(0.0, -1.0, 0.0, 1.0, 0.0), InvariantError);
}

TEST(Coupling, NonFiniteInverseRejected) {
  const auto t = CouplingTransform::from_raw(CouplingKind::kNlsq, std::vector<double>{NAN, 0, 0, 0, 0});
  EXPECT_THROW(t.inverse(1.0), DomainError);
  EXPECT_THROW(CouplingTransform::affine(0, 0).inverse(INFINITY), DomainError);
}

TEST(Coupling, DerivativeBoundAndRoundTrip) {
  const auto report = testing::coupling_check(1000, 17);
  EXPECT_LT(report.worst_round_trip, 1e-6);
  EXPECT_GE(report.worst_derivative_ratio, 0.009);
}

TEST(Coupling, ExtremeConstrainedParametersStayMonotone) {
  // c at its bound, steep d: the derivative dips to about 0.01 b.
  const auto t = CouplingTransform::from_raw(CouplingKind::kNlsq, std::vector<double>{0.3, -1.0, 8.0, 4.0, 0.5});
  EXPECT_TRUE(t.satisfies_constraint());
  const double b = t.nlsq_params().b;
  for (int k = -4000; k <= 4000; ++k) EXPECT_GE(t.derivative(k * 1e-3), 0.0099 * b);
  for (double z : {-3.0, -0.13, 0.0, 0.02, 2.5}) EXPECT_NEAR(t.inverse(t.forward(z)), z, 1e-9);
}

TEST(Flow, ConstantConditionerAffineGeneration) {
  const auto flow = affine_flow(FlowKind::kAqfAffine, 0.4, std::log(2.5));
  for (const auto& s : random_states(10, 8)) {
    for (double z : {0.0, 0.3, 1.0}) {
      EXPECT_DOUBLE_EQ(flow.generate(s.state.to_vector(1), std::vector<double>{z})[0], 0.4 + 2.5 * z);
    }
  }
}

TEST(Flow, UniformBaseRejectsOutOfSupport) {
  const auto flow = affine_flow(FlowKind::kAqfAffine, 0.0, 0.0);
  const auto s = random_states(1, 1)[0].state.to_vector(1);
  EXPECT_THROW(flow.generate(s, std::vector<double>{1.2}), DomainError);
  EXPECT_THROW(flow.generate(s, std::vector<double>{-0.1}), DomainError);
  EXPECT_NO_THROW(flow.quantile(s, 0.0));
  EXPECT_NO_THROW(flow.quantile(s, 1.0));
}

TEST(Flow, ProbitRejectsEndpoints) {
  EXPECT_THROW(probit(0.0), DomainError);
  EXPECT_THROW(probit(1.0), DomainError);
  EXPECT_EQ(probit(0.5), 0.0);
  const auto flow = affine_flow(FlowKind::kAnfAffine, 0.0, 0.0);
  const auto s = random_states(1, 1)[0].state.to_vector(1);
  EXPECT_THROW(flow.quantile(s, 0.0), DomainError);
}

TEST(Flow, NormalBaseMedianIsGenerationAtZero) {
  std::mt19937_64 rng(12);
  const ConditionalFlow flow(FlowKind::kAnfNlsq, Normalizer::identity(1), 3, {8, 8}, rng);
  for (const auto& s : random_states(20, 12)) {
    const auto x = s.state.to_vector(1);
    EXPECT_EQ(flow.quantile(x, 0.5), flow.generate(x, std::vector<double>{0.0})[0]);
  }
}

TEST(Flow, QuantilesMonotoneInLevel) {
  std::mt19937_64 rng(13);
  for (auto kind : {FlowKind::kAqfNlsq, FlowKind::kAqfAffine, FlowKind::kAnfNlsq}) {
    const ConditionalFlow flow(kind, Normalizer::identity(1), 3, {8, 8}, rng);
    for (const auto& s : random_states(1000, 13)) {
      const auto x = s.state.to_vector(1);
      EXPECT_LE(flow.quantile(x, 0.25), flow.quantile(x, 0.75));
    }
  }
}

TEST(Flow, SecondDimensionDependsOnFirst) {
  std::mt19937_64 rng(14);
  ConditionalFlow flow(FlowKind::kAqfNlsq, Normalizer::identity(2), 2, {8}, rng);
  const auto x = random_states(1, 14, 2)[0].state.to_vector(2);
  const std::vector<double> p1 = {0.3}, p2 = {1.3};
  EXPECT_NE(flow.quantile(x, 0.5, 1, p1), flow.quantile(x, 0.5, 1, p2));
  // Generation feeds the generated first dimension forward.
  const auto gen = flow.generate(x, std::vector<double>{0.4, 0.6});
  EXPECT_DOUBLE_EQ(gen[1], flow.quantile(x, 0.6, 1, std::vector<double>{gen[0]}));
  EXPECT_THROW(flow.quantile(x, 0.5, 1, {}), ShapeError);
}

TEST(Flow, StackRoundTrip) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-2, 2);
  for (auto kind : {FlowKind::kAnfNlsq, FlowKind::kAqfAffine}) {
    const ConditionalFlow flow(kind, Normalizer::identity(2), 3, {8}, rng);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> ctx(data::feature_count(2) + 1);
      for (double& v : ctx) v = u(rng);
      const double z = u(rng);
      const double a = flow.generate_standardized(1, ctx, z);
      EXPECT_NEAR(flow.invert_standardized(1, ctx, a), z, 1e-6);
    }
  }
}

TEST(Flow, CheckpointRoundTrip) {
  std::mt19937_64 rng(16);
  const ConditionalFlow flow(FlowKind::kAqfNlsq, Normalizer::identity(2), 3, {8}, rng);
  const auto j = flow.to_json();
  EXPECT_EQ(j.at("kind"), "aqf-nlsq");
  EXPECT_EQ(j.at("base"), "uniform");
  EXPECT_EQ(j.at("stack_depth"), 3);
  EXPECT_EQ(j.at("dimension_order"), (nlohmann::json{"longitudinal", "lateral"}));
  const auto back = ConditionalFlow::from_json(nlohmann::json::parse(j.dump()));
  const auto x = random_states(1, 16, 2)[0].state.to_vector(2);
  EXPECT_EQ(back.quantile(x, 0.9, 1, std::vector<double>{0.2}), flow.quantile(x, 0.9, 1, std::vector<double>{0.2}));
  auto broken = j;
  broken["stack_depth"] = 2;
  EXPECT_THROW(ConditionalFlow::from_json(broken), DataError);
}

TEST(FlowLoss, SingleDatumFixedLevelIsTal) {
  const auto flow = affine_flow(FlowKind::kAqfAffine, 0.2, std::log(3.0));
  std::vector<Sample> one = random_states(1, 17);
  one[0].action[0] = 1.0;
  const std::vector<double> alpha = {0.3};
  EXPECT_NEAR(aqf_loss_at_levels(flow, one, alpha), tal(1.0, 0.2 + 3.0 * 0.3, QuantileLevel(0.3)), 1e-12);
}

TEST(FlowLoss, CollapsedFlowOnConstantDataHasZeroLoss) {
  // log-scale -800 underflows the scale to zero: tau(z) = c for every z.
  const auto flow = affine_flow(FlowKind::kAqfAffine, 2.0, -800.0);
  auto samples = random_states(100, 18);
  for (auto& s : samples) s.action[0] = 2.0;
  std::mt19937_64 rng(18);
  EXPECT_EQ(aqf_loss(flow, samples, rng), 0.0);
}

TEST(FlowLoss, TrueQuantileFunctionBeatsPerturbations) {
  // a ~ U[-1, 2]: the quantile function is exactly affine, -1 + 3 z.
  const std::size_t n = 100000;
  auto samples = random_states(n, 19);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& s : samples) s.action[0] = -1.0 + 3.0 * u(rng);
  std::vector<double> alphas(n);
  for (double& a : alphas) a = u(rng);

  const auto truth = affine_flow(FlowKind::kAqfAffine, -1.0, std::log(3.0));
  const double best = aqf_loss_at_levels(truth, samples, alphas);
  // E over alpha and a of the pinball loss at the true quantile: 3 / 12.
  EXPECT_NEAR(best, 0.25, 0.005);
  std::uniform_real_distribution<double> size(0.05, 0.3);
  std::bernoulli_distribution sign(0.5);
  for (int k = 0; k < 20; ++k) {
    const double ds = (sign(rng) ? 1 : -1) * size(rng), dl = (sign(rng) ? 1 : -1) * size(rng);
    const auto perturbed = affine_flow(FlowKind::kAqfAffine, -1.0 + ds, std::log(3.0) + dl);
    EXPECT_LT(best, aqf_loss_at_levels(perturbed, samples, alphas)) << "perturbation " << k;
  }
}

TEST(FlowLoss, StandardNormalNll) {
  const auto flow = affine_flow(FlowKind::kAnfAffine, 0.0, 0.0);
  auto samples = random_states(50000, 20);
  std::mt19937_64 rng(20);
  std::normal_distribution<double> n;
  double second_moment = 0.0;
  for (auto& s : samples) {
    s.action[0] = n(rng);
    second_moment += s.action[0] * s.action[0];
  }
  second_moment /= static_cast<double>(samples.size());
  const double nll = anf_nll(flow, samples);
  EXPECT_NEAR(nll, 0.5 * std::log(2 * std::numbers::pi) + 0.5 * second_moment, 1e-12);
  EXPECT_NEAR(nll, 0.5 * std::log(2 * std::numbers::pi) + 0.5, 0.01);
}

TEST(FlowLoss, ScalingDataByTwoAddsLogTwo) {
  auto samples = random_states(500, 21);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (auto& s : samples) s.action[0] = n(rng);
  auto doubled = samples;
  for (auto& s : doubled) s.action[0] *= 2.0;
  const double base = anf_nll(affine_flow(FlowKind::kAnfAffine, 0.0, 0.0), samples);
  const double scaled = anf_nll(affine_flow(FlowKind::kAnfAffine, 0.0, std::log(2.0)), doubled);
  EXPECT_NEAR(scaled - base, std::log(2.0), 1e-12);
}

TEST(FlowLoss, LogDeterminantMatchesFiniteDifferences) {
  EXPECT_LT(testing::logdet_check(300, 22).worst_rel_error, 1e-4);
}

TEST(FlowLoss, WrongBaseRejected) {
  const auto samples = random_states(3, 23);
  std::mt19937_64 rng(23);
  EXPECT_THROW(aqf_loss(affine_flow(FlowKind::kAnfAffine, 0, 0), samples, rng), DomainError);
  EXPECT_THROW(anf_nll(affine_flow(FlowKind::kAqfAffine, 0, 0), samples), DomainError);
}

// Objective gradients, including the implicit inverse used by the NLL,
// against central differences of the objective itself.
class FlowGradientTest : public ::testing::TestWithParam<std::tuple<FlowKind, int>> {};

TEST_P(FlowGradientTest, MatchesFiniteDifferences) {
  const auto [kind, dims] = GetParam();
  std::mt19937_64 rng(24 + dims);
  auto samples = random_states(6, 24, dims);
  std::normal_distribution<double> n;
  for (auto& s : samples) s.action = {0.5 * n(rng), 0.5 * n(rng)};
  const auto norm = Normalizer::fit(samples, dims);
  ConditionalFlow flow(kind, norm, 2, {5}, rng);
  const std::vector<std::size_t> rows = {0, 1, 2, 3, 4, 5};
  std::vector<double> alphas(rows.size() * dims);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (double& a : alphas) a = u(rng);

  auto objective = [&] {
    if (flow.base() == BaseKind::kNormal) {
      // Standardized NLL = raw NLL - sum_j log std_j.
      double shift = 0.0;
      for (int j = 0; j < dims; ++j) shift += std::log(norm.action_std()[j]);
      return anf_nll(flow, samples) - shift;
    }
    // With a single fixed draw the standardized objective is sum_j tal_j / std_j;
    // recompute it from quantiles to stay independent of the training code.
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto x = samples[i].state.to_vector(dims);
      for (int j = 0; j < dims; ++j) {
        const double alpha = alphas[i * dims + j];
        const double q = flow.quantile(x, alpha, j, std::span<const double>(samples[i].action.data(), j));
        sum += tal(samples[i].action[j], q, QuantileLevel(alpha)) / norm.action_std()[j];
      }
    }
    return sum / static_cast<double>(samples.size());
  };

  const FlowGradient g = flow_objective_gradient(flow, samples, rows, alphas, 1);
  EXPECT_NEAR(g.loss, objective(), 1e-10);
  const double h = 1e-6;
  std::size_t checked = 0;
  for (int j = 0; j < dims; ++j) {
    for (std::size_t m = 0; m < flow.stack_depth(); ++m) {
      auto params = flow.stack(j)[m].conditioner.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double saved = params[p];
        params[p] = saved + h;
        const double up = objective();
        params[p] = saved - h;
        const double down = objective();
        params[p] = saved;
        const double fd = (up - down) / (2 * h);
        const double diff = std::abs(fd - g.grads[j][m][p]);
        EXPECT_TRUE(diff < 1e-6 || diff / std::max(std::abs(fd), std::abs(g.grads[j][m][p])) < 1e-4)
            << "dim " << j << " transformer " << m << " param " << p << ": fd " << fd << " vs "
            << g.grads[j][m][p];
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 50u);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, FlowGradientTest,
                         ::testing::Combine(::testing::Values(FlowKind::kAqfAffine, FlowKind::kAqfNlsq,
                                                              FlowKind::kAnfAffine, FlowKind::kAnfNlsq),
                                            ::testing::Values(1, 2)));

TEST(FlowTrain, ConstantActionsCollapse) {
  auto samples = random_states(1000, 25);
  for (auto& s : samples) s.action[0] = 0.8;
  TrainConfig cfg = default_flow_config();
  cfg.epochs = 20;
  cfg.batch_size = 64;
  cfg.adam.learning_rate = 1e-2;
  cfg.hidden = {16, 16};
  for (auto kind : {FlowKind::kAqfAffine, FlowKind::kAqfNlsq}) {
    const auto result = flow_train(samples, samples, kind, Normalizer::fit(samples, 1), cfg, 25);
    for (int i = 0; i < 20; ++i) {
      for (double alpha : {0.0, 0.01, 0.5, 0.99, 1.0}) {
        EXPECT_NEAR(result.model.quantile(samples[i].state.to_vector(1), alpha), 0.8, 0.02)
            << to_string(kind) << " alpha " << alpha;
      }
    }
  }
}

TEST(FlowTrain, TwoDimensionalRunAndConstraintMonitor) {
  auto samples = random_states(600, 26, 2);
  std::mt19937_64 rng(26);
  std::normal_distribution<double> n;
  for (auto& s : samples) {
    s.action[0] = n(rng);
    s.action[1] = 0.3 * s.action[0] + 0.1 * n(rng);
  }
  TrainConfig cfg = default_flow_config();
  cfg.epochs = 3;
  cfg.hidden = {8};
  for (auto kind : {FlowKind::kAqfNlsq, FlowKind::kAnfNlsq}) {
    const auto result = flow_train(samples, samples, kind, Normalizer::fit(samples, 2), cfg, 26);
    EXPECT_EQ(result.model.dims(), 2);
    ASSERT_EQ(result.log.epochs.size(), 3u);
    for (const auto& e : result.log.epochs) EXPECT_EQ(e.constraint_violations, 0u);
    EXPECT_LT(result.log.final_train_loss, result.log.initial_train_loss);
    const auto x = samples[0].state.to_vector(2);
    EXPECT_TRUE(std::isfinite(result.model.quantile(x, 0.3, 1, std::vector<double>{samples[0].action[0]})));
  }
}

TEST(FlowTrain, GeneratedSamplesMatchTrainingQuantiles) {
  // State-independent skewed target: a = exp(0.5 N(0,1)).
  auto samples = random_states(20000, 27);
  std::mt19937_64 rng(27);
  std::normal_distribution<double> n;
  std::vector<double> actions;
  for (auto& s : samples) {
    s.action[0] = std::exp(0.5 * n(rng));
    actions.push_back(s.action[0]);
  }
  TrainConfig cfg = default_flow_config();
  cfg.epochs = 6;
  cfg.hidden = {16, 16};
  const auto result = flow_train(samples, {}, FlowKind::kAqfNlsq, Normalizer::fit(samples, 1), cfg, 27);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> generated;
  for (int i = 0; i < 100000; ++i) {
    const auto x = samples[static_cast<std::size_t>(i) % samples.size()].state.to_vector(1);
    generated.push_back(result.model.generate(x, std::vector<double>{u(rng)})[0]);
  }
  for (double alpha : {0.25, 0.5, 0.75}) {
    EXPECT_NEAR(testing::naive_quantile(generated, alpha), testing::naive_quantile(actions, alpha), 0.1);
  }
}

}  // namespace
}  // namespace tailq::models
