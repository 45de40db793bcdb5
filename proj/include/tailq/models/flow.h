#pragma once

// Conditional autoregressive flows over the action vector a (longitudinal,
// then lateral):
//
//   a_j = tau_{M-1}( ... tau_0(z_j; h_{j,0}) ...; h_{j,M-1}),
//   h_{j,m} = c_{j,m}(g(s), a_<j).
//
// With a uniform base on [0, 1] (AQF) the map z -> a_j is the conditional
// quantile function, so the alpha-quantile is the image of z = alpha. With a
// standard-normal base (ANF) the alpha-quantile is the image of probit(alpha).

#include <cstdint>
#include <nlohmann/json.hpp>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailq/data/normalizer.h"
#include "tailq/models/coupling.h"
#include "tailq/models/quantile_model.h"

namespace tailq::models {

enum class BaseKind { kUniform, kNormal };
enum class FlowKind { kAqfAffine, kAqfNlsq, kAnfAffine, kAnfNlsq };

std::string_view to_string(FlowKind kind);
/// Accepts "aqf-affine", "aqf-nlsq", "anf-affine", "anf-nlsq".
FlowKind parse_flow_kind(std::string_view name);
CouplingKind coupling_of(FlowKind kind);
BaseKind base_of(FlowKind kind);

class ConditionalFlow : public QuantileModel {
 public:
  /// Randomly initialized flow: stack_depth transformers per dimension, each
  /// with a conditioner of the given hidden widths.
  ConditionalFlow(FlowKind kind, data::Normalizer normalizer, std::size_t stack_depth,
                  const std::vector<std::size_t>& hidden, std::mt19937_64& rng);
  /// Flow from explicit transformer stacks, stacks[j][m]. Validates shapes.
  ConditionalFlow(FlowKind kind, data::Normalizer normalizer, std::vector<std::vector<Transformer>> stacks);

  FlowKind kind() const { return kind_; }
  BaseKind base() const { return base_of(kind_); }
  CouplingKind coupling() const { return coupling_of(kind_); }
  std::size_t stack_depth() const { return stacks_.front().size(); }
  const data::Normalizer& normalizer() const { return normalizer_; }
  const std::vector<Transformer>& stack(std::size_t dim) const { return stacks_.at(dim); }
  std::vector<Transformer>& stack(std::size_t dim) { return stacks_.at(dim); }

  /// Conditioner input for dimension dim: standardized features followed by
  /// the standardized prefix actions.
  std::vector<double> context(std::span<const double> std_features, std::span<const double> std_prefix) const;

  /// Realized transformers of one dimension for a given context.
  std::vector<CouplingTransform> realize(std::size_t dim, std::span<const double> context) const;

  /// Standardized-space generation of one dimension from a base value.
  double generate_standardized(std::size_t dim, std::span<const double> context, double z) const;
  /// Standardized-space inversion; optionally returns log dz/da_j.
  double invert_standardized(std::size_t dim, std::span<const double> context, double a,
                             double* log_dz_da = nullptr) const;

  /// Generation in raw units: dimension j uses the already generated a_<j.
  /// Throws DomainError if a uniform-base z lies outside [0, 1].
  std::vector<double> generate(std::span<const double> features, std::span<const double> z) const;

  /// Conditional alpha-quantile of dimension dim given the observed prefix.
  /// Uniform base accepts alpha in [0, 1]; normal base requires (0, 1).
  double quantile(std::span<const double> features, double alpha, std::size_t dim,
                  std::span<const double> prefix) const override;
  using QuantileModel::quantile;

  int dims() const override { return normalizer_.dims(); }
  std::size_t feature_count() const override { return normalizer_.feature_count(); }
  std::string name() const override { return std::string(to_string(kind_)); }

  /// Number of realized NLSQ transformers violating the monotonicity bound
  /// over the given samples (teacher-forced contexts). Always 0 for affine.
  std::size_t count_constraint_violations(std::span<const data::Sample> samples) const;

  nlohmann::json to_json() const;
  static ConditionalFlow from_json(const nlohmann::json& j);

 private:
  double base_value(double alpha) const;

  FlowKind kind_;
  data::Normalizer normalizer_;
  std::vector<std::vector<Transformer>> stacks_;
};

/// Probit Phi^{-1}(alpha); throws DomainError unless alpha is in (0, 1).
double probit(double alpha);

}  // namespace tailq::models
