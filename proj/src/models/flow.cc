#include "tailq/models/flow.h"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "tailq/autodiff/serialize.h"
#include "tailq/error.h"
#include "tailq/io/csv.h"

namespace tailq::models {

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::kAqfAffine: return "aqf-affine";
    case FlowKind::kAqfNlsq: return "aqf-nlsq";
    case FlowKind::kAnfAffine: return "anf-affine";
    case FlowKind::kAnfNlsq: return "anf-nlsq";
  }
  return "unknown";
}

FlowKind parse_flow_kind(std::string_view name) {
  for (FlowKind k : {FlowKind::kAqfAffine, FlowKind::kAqfNlsq, FlowKind::kAnfAffine, FlowKind::kAnfNlsq}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown flow kind '" + std::string(name) + "'");
}

CouplingKind coupling_of(FlowKind kind) {
  return (kind == FlowKind::kAqfAffine || kind == FlowKind::kAnfAffine) ? CouplingKind::kAffine
                                                                        : CouplingKind::kNlsq;
}

BaseKind base_of(FlowKind kind) {
  return (kind == FlowKind::kAqfAffine || kind == FlowKind::kAqfNlsq) ? BaseKind::kUniform : BaseKind::kNormal;
}

double probit(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("probit needs a level strictly inside (0, 1), got " + io::format_double(alpha));
  }
  return boost::math::quantile(boost::math::normal(), alpha);
}

ConditionalFlow::ConditionalFlow(FlowKind kind, data::Normalizer normalizer, std::size_t stack_depth,
                                 const std::vector<std::size_t>& hidden, std::mt19937_64& rng)
    : kind_(kind), normalizer_(std::move(normalizer)) {
  if (stack_depth == 0) throw DomainError("stack depth must be positive");
  const std::size_t nf = normalizer_.feature_count();
  for (int j = 0; j < normalizer_.dims(); ++j) {
    std::vector<Transformer> stack;
    for (std::size_t m = 0; m < stack_depth; ++m) {
      std::vector<std::size_t> sizes = {nf + static_cast<std::size_t>(j)};
      sizes.insert(sizes.end(), hidden.begin(), hidden.end());
      sizes.push_back(raw_param_count(coupling()));
      stack.push_back({coupling(), autodiff::DenseNet::he_uniform(sizes, rng)});
    }
    stacks_.push_back(std::move(stack));
  }
}

ConditionalFlow::ConditionalFlow(FlowKind kind, data::Normalizer normalizer,
                                 std::vector<std::vector<Transformer>> stacks)
    : kind_(kind), normalizer_(std::move(normalizer)), stacks_(std::move(stacks)) {
  if (stacks_.size() != static_cast<std::size_t>(normalizer_.dims())) {
    throw ShapeError("flow needs one transformer stack per action dimension");
  }
  const std::size_t depth = stacks_.front().size();
  if (depth == 0) throw ShapeError("transformer stacks must be nonempty");
  for (std::size_t j = 0; j < stacks_.size(); ++j) {
    if (stacks_[j].size() != depth) throw ShapeError("all dimensions need the same stack depth");
    for (const auto& t : stacks_[j]) {
      if (t.kind != coupling()) throw ShapeError("transformer coupling kind does not match the flow kind");
      if (t.conditioner.input_size() != normalizer_.feature_count() + j ||
          t.conditioner.output_size() != raw_param_count(t.kind)) {
        throw ShapeError("conditioner of dimension " + std::to_string(j) + " has the wrong shape");
      }
    }
  }
}

std::vector<double> ConditionalFlow::context(std::span<const double> std_features,
                                             std::span<const double> std_prefix) const {
  std::vector<double> ctx(std_features.begin(), std_features.end());
  ctx.insert(ctx.end(), std_prefix.begin(), std_prefix.end());
  return ctx;
}

std::vector<CouplingTransform> ConditionalFlow::realize(std::size_t dim, std::span<const double> context) const {
  std::vector<CouplingTransform> out;
  for (const auto& t : stacks_.at(dim)) out.push_back(t.realize(context));
  return out;
}

double ConditionalFlow::generate_standardized(std::size_t dim, std::span<const double> context, double z) const {
  double y = z;
  for (const auto& t : stacks_.at(dim)) y = t.realize(context).forward(y);
  return y;
}

double ConditionalFlow::invert_standardized(std::size_t dim, std::span<const double> context, double a,
                                            double* log_dz_da) const {
  const auto transforms = realize(dim, context);
  double y = a;
  double log_det = 0.0;
  for (std::size_t m = transforms.size(); m-- > 0;) {
    const double z = transforms[m].inverse(y);
    const double slope = transforms[m].derivative(z);
    if (!(slope > 0.0)) throw InvariantError("nonpositive coupling derivative during inversion");
    log_det -= std::log(slope);
    y = z;
  }
  if (log_dz_da != nullptr) *log_dz_da = log_det;
  return y;
}

std::vector<double> ConditionalFlow::generate(std::span<const double> features, std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(dims())) {
    throw ShapeError("expected " + std::to_string(dims()) + " base values, got " + std::to_string(z.size()));
  }
  const auto std_features = normalizer_.standardize_features(features);
  std::vector<double> std_prefix;
  std::vector<double> out;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (base() == BaseKind::kUniform && !(z[j] >= 0.0 && z[j] <= 1.0)) {
      throw DomainError("uniform-base value outside [0, 1]: " + io::format_double(z[j]));
    }
    if (!std::isfinite(z[j])) throw DomainError("non-finite base value");
    const double a = generate_standardized(j, context(std_features, std_prefix), z[j]);
    std_prefix.push_back(a);
    out.push_back(normalizer_.destandardize_action(a, j));
  }
  return out;
}

double ConditionalFlow::base_value(double alpha) const {
  if (base() == BaseKind::kUniform) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw DomainError("quantile level must lie in [0, 1], got " + io::format_double(alpha));
    }
    return alpha;
  }
  return probit(alpha);
}

double ConditionalFlow::quantile(std::span<const double> features, double alpha, std::size_t dim,
                                 std::span<const double> prefix) const {
  if (dim >= static_cast<std::size_t>(dims())) throw DomainError("action dimension out of range");
  if (prefix.size() != dim) throw ShapeError("prefix must hold exactly the earlier action dimensions");
  const auto std_features = normalizer_.standardize_features(features);
  std::vector<double> std_prefix;
  for (std::size_t j = 0; j < prefix.size(); ++j) std_prefix.push_back(normalizer_.standardize_action(prefix[j], j));
  const double a = generate_standardized(dim, context(std_features, std_prefix), base_value(alpha));
  return normalizer_.destandardize_action(a, dim);
}

std::size_t ConditionalFlow::count_constraint_violations(std::span<const data::Sample> samples) const {
  if (coupling() == CouplingKind::kAffine) return 0;
  std::size_t violations = 0;
  for (const auto& s : samples) {
    const auto std_features = normalizer_.standardize_features(s.state.to_vector(dims()));
    std::vector<double> std_prefix;
    for (int j = 0; j < dims(); ++j) {
      for (const auto& t : realize(j, context(std_features, std_prefix))) {
        if (!t.satisfies_constraint()) ++violations;
      }
      std_prefix.push_back(normalizer_.standardize_action(s.action[j], j));
    }
  }
  return violations;
}

nlohmann::json ConditionalFlow::to_json() const {
  nlohmann::json stacks = nlohmann::json::array();
  for (const auto& stack : stacks_) {
    nlohmann::json nets = nlohmann::json::array();
    for (const auto& t : stack) nets.push_back(autodiff::net_to_json(t.conditioner));
    stacks.push_back(std::move(nets));
  }
  nlohmann::json order = nlohmann::json::array({"longitudinal"});
  if (dims() == 2) order.push_back("lateral");
  return {{"format_version", 1},
          {"type", "conditional_flow"},
          {"kind", std::string(to_string(kind_))},
          {"coupling", coupling() == CouplingKind::kAffine ? "affine" : "nlsq"},
          {"base", base() == BaseKind::kUniform ? "uniform" : "normal"},
          {"dims", dims()},
          {"dimension_order", std::move(order)},
          {"stack_depth", stack_depth()},
          {"conditioners", std::move(stacks)},
          {"normalizer", normalizer_.to_json()}};
}

ConditionalFlow ConditionalFlow::from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "conditional_flow") throw DataError("not a flow checkpoint");
    if (j.at("format_version").get<int>() != 1) throw DataError("unsupported checkpoint format version");
    const FlowKind kind = parse_flow_kind(j.at("kind").get<std::string>());
    std::vector<std::vector<Transformer>> stacks;
    for (const auto& nets : j.at("conditioners")) {
      std::vector<Transformer> stack;
      for (const auto& net : nets) stack.push_back({coupling_of(kind), autodiff::net_from_json(net)});
      stacks.push_back(std::move(stack));
    }
    if (stacks.empty() || stacks.front().size() != j.at("stack_depth").get<std::size_t>()) {
      throw DataError("flow checkpoint stack depth does not match its conditioners");
    }
    return ConditionalFlow(kind, data::Normalizer::from_json(j.at("normalizer")), std::move(stacks));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed flow checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("malformed flow checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed flow checkpoint: ") + e.what());
  }
}

}  // namespace tailq::models
