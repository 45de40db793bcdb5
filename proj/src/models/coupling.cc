#include "tailq/models/coupling.h"

#include <string>

#include "tailq/error.h"

namespace tailq::models {

CouplingTransform CouplingTransform::affine(double shift, double log_scale) {
  CouplingTransform t;
  t.kind_ = CouplingKind::kAffine;
  t.p_ = {shift, log_scale, 0.0, 0.0, 0.0};
  return t;
}

CouplingTransform CouplingTransform::nlsq(double a, double b, double c, double d, double g) {
  CouplingTransform t;
  t.kind_ = CouplingKind::kNlsq;
  t.p_ = {a, b, c, d, g};
  if (!t.satisfies_constraint()) {
    throw InvariantError("NLSQ parameters violate the monotonicity bound |c d| <= 0.99 (8 sqrt 3 / 9) b");
  }
  return t;
}

CouplingTransform CouplingTransform::from_raw(CouplingKind kind, std::span<const double> raw) {
  if (raw.size() != raw_param_count(kind)) {
    throw ShapeError("expected " + std::to_string(raw_param_count(kind)) + " raw coupling parameters, got " +
                     std::to_string(raw.size()));
  }
  CouplingTransform t;
  t.kind_ = kind;
  if (kind == CouplingKind::kAffine) {
    t.p_ = {raw[0], raw[1], 0.0, 0.0, 0.0};
  } else {
    const auto p = nlsq_from_raw(raw[0], raw[1], raw[2], raw[3], raw[4]);
    t.p_ = {p.a, p.b, p.c, p.d, p.g};
  }
  return t;
}

double CouplingTransform::forward(double z) const {
  return kind_ == CouplingKind::kAffine ? affine_tau(affine_params(), z) : nlsq_tau(nlsq_params(), z);
}

double CouplingTransform::derivative(double z) const {
  return kind_ == CouplingKind::kAffine ? std::exp(p_[1]) : nlsq_dtau(nlsq_params(), z);
}

bool CouplingTransform::satisfies_constraint() const {
  if (kind_ == CouplingKind::kAffine) return std::isfinite(p_[0]) && std::isfinite(p_[1]);
  const auto p = nlsq_params();
  for (double v : p_) {
    if (!std::isfinite(v)) return false;
  }
  return p.b > 0.0 && p.d > 0.0 && std::abs(p.c * p.d) <= kNlsqCdBound * p.b * (1.0 + 1e-12);
}

double CouplingTransform::inverse(double y) const {
  if (!std::isfinite(y)) throw DomainError("coupling inverse: non-finite input");
  if (kind_ == CouplingKind::kAffine) {
    if (!std::isfinite(p_[0]) || !std::isfinite(p_[1])) throw DomainError("coupling inverse: non-finite parameters");
    return (y - p_[0]) * std::exp(-p_[1]);
  }
  const auto p = nlsq_params();
  for (double v : p_) {
    if (!std::isfinite(v)) throw DomainError("coupling inverse: non-finite NLSQ parameters");
  }
  if (p.c == 0.0) return (y - p.a) / p.b;

  // The bump term lies between 0 and c, so the root sits within |c| / b of
  // the affine-part estimate; expand geometrically from there.
  const double center = (y - p.a) / p.b;
  double half = std::abs(p.c) / p.b;
  if (!(half > 0.0)) half = 1e-12 * (1.0 + std::abs(center));
  double lo = center - half, hi = center + half;
  int expansions = 0;
  while (!(forward(lo) <= y && forward(hi) >= y)) {
    half *= 2.0;
    lo = center - half;
    hi = center + half;
    if (++expansions > 200 || !std::isfinite(half)) {
      throw DomainError("coupling inverse: could not bracket the root");
    }
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (forward(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double r = forward(z) - y;
    if (r == 0.0) break;
    const double next = z - r / derivative(z);
    if (!(next >= lo && next <= hi)) break;
    z = next;
  }
  return z;
}

CouplingTransform Transformer::realize(std::span<const double> context) const {
  const Eigen::VectorXd raw = conditioner.forward(context);
  return CouplingTransform::from_raw(kind, std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())));
}

double coupling_forward(const Transformer& t, double z, std::span<const double> context) {
  return t.realize(context).forward(z);
}

double coupling_inverse(const Transformer& t, double y, std::span<const double> context) {
  return t.realize(context).inverse(y);
}

}  // namespace tailq::models
