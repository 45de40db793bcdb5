#pragma once

// Monotone coupling transformers tau(z; h).
//
// Affine: tau(z) = shift + exp(log_scale) * z.
// NLSQ:   tau(z) = a + b z + c / (1 + (d z + g)^2), with the raw conditioner
// outputs mapped so that tau'(z) >= 0.01 b > 0 for every z:
//   b = exp(b_raw), d = softplus(d_raw) + 1e-3,
//   c = 0.99 * (8 sqrt(3) / 9) * (b / d) * tanh(c_raw), g = g_raw.
// Since tau'(z) = b - 2 c d t / (1 + t^2)^2 with t = d z + g and
// max_t |t / (1 + t^2)^2| = 9 / (16 sqrt(3)), |2 c d| * 9 / (16 sqrt(3)) <= 0.99 b.
//
// The templates work for double and autodiff::Var alike.

#include <array>
#include <cmath>
#include <span>

#include "tailq/autodiff/dense_net.h"
#include "tailq/autodiff/tape.h"

namespace tailq::models {

enum class CouplingKind { kAffine, kNlsq };

/// Number of raw conditioner outputs per transformer.
constexpr std::size_t raw_param_count(CouplingKind kind) { return kind == CouplingKind::kAffine ? 2 : 5; }

inline constexpr double kNlsqSlack = 0.99;
inline const double kNlsqCdBound = kNlsqSlack * 8.0 * std::sqrt(3.0) / 9.0;
inline constexpr double kNlsqMinD = 1e-3;

template <class T>
struct AffineParams {
  T shift;
  T log_scale;
};

template <class T>
struct NlsqParams {
  T a, b, c, d, g;
};

template <class T>
NlsqParams<T> nlsq_from_raw(T a_raw, T b_raw, T c_raw, T d_raw, T g_raw) {
  using std::exp;
  using std::tanh;
  using autodiff::softplus;
  NlsqParams<T> p{a_raw, exp(b_raw), a_raw, softplus(d_raw) + kNlsqMinD, g_raw};
  p.c = kNlsqCdBound * (p.b / p.d) * tanh(c_raw);
  return p;
}

template <class T>
T affine_tau(const AffineParams<T>& p, T z) {
  using std::exp;
  return p.shift + exp(p.log_scale) * z;
}

template <class T>
T affine_log_dtau(const AffineParams<T>& p, T /*z*/) {
  return p.log_scale;
}

template <class T>
T nlsq_tau(const NlsqParams<T>& p, T z) {
  T t = p.d * z + p.g;
  return p.a + p.b * z + p.c / (1.0 + t * t);
}

template <class T>
T nlsq_dtau(const NlsqParams<T>& p, T z) {
  T t = p.d * z + p.g;
  T q = 1.0 + t * t;
  return p.b - 2.0 * p.c * p.d * t / (q * q);
}

/// A realized transformer: parameters already produced by a conditioner.
class CouplingTransform {
 public:
  static CouplingTransform affine(double shift, double log_scale);
  /// Realized NLSQ parameters; throws InvariantError if they violate the
  /// monotonicity bound (only reachable by bypassing from_raw).
  static CouplingTransform nlsq(double a, double b, double c, double d, double g);
  /// Applies the constraining map to raw conditioner outputs.
  static CouplingTransform from_raw(CouplingKind kind, std::span<const double> raw);

  CouplingKind kind() const { return kind_; }
  AffineParams<double> affine_params() const { return {p_[0], p_[1]}; }
  NlsqParams<double> nlsq_params() const { return {p_[0], p_[1], p_[2], p_[3], p_[4]}; }

  double forward(double z) const;
  double derivative(double z) const;
  /// Affine: closed form. NLSQ: bracket from the affine-part estimate by
  /// geometric expansion, 60 bisection steps, then up to 5 Newton steps kept
  /// inside the bracket. |forward(result) - y| <= 1e-10 (relative to scale).
  /// Throws DomainError if the bracket cannot be established (non-finite
  /// parameters or input).
  double inverse(double y) const;

  /// True when the NLSQ monotonicity bound holds (always for affine).
  bool satisfies_constraint() const;

 private:
  CouplingKind kind_ = CouplingKind::kAffine;
  std::array<double, 5> p_{};
};

/// Transformer = coupling kind + the conditioner network that produces its
/// parameters from the conditioner input (g(s), a_<j).
struct Transformer {
  CouplingKind kind = CouplingKind::kAffine;
  autodiff::DenseNet conditioner;

  CouplingTransform realize(std::span<const double> context) const;
};

double coupling_forward(const Transformer& t, double z, std::span<const double> context);
double coupling_inverse(const Transformer& t, double y, std::span<const double> context);

}  // namespace tailq::models
