#include "tailq/autodiff/tape.h"

#include <cmath>
#include <string>

#include "tailq/error.h"

namespace tailq::autodiff {

double Var::value() const {
  if (tape_ == nullptr) throw InvariantError("value() on a detached Var");
  return tape_->value(*this);
}

std::int32_t Tape::check(Var v) const {
  if (v.tape_ != this) throw InvariantError("Var belongs to a different tape");
  if (v.index_ < 0 || static_cast<std::size_t>(v.index_) >= values_.size()) {
    throw InvariantError("Var index out of range: " + std::to_string(v.index_));
  }
  return v.index_;
}

Var Tape::push(double value) {
  if (edge_begin_.empty()) edge_begin_.push_back(0);
  values_.push_back(value);
  grads_.push_back(0.0);
  edge_begin_.push_back(static_cast<std::int32_t>(edge_parent_.size()));
  return Var(this, static_cast<std::int32_t>(values_.size() - 1));
}

Var Tape::variable(double value) { return push(value); }

Var Tape::unary(double value, Var x, double dx) {
  const auto ix = check(x);
  edge_parent_.push_back(ix);
  edge_partial_.push_back(dx);
  return push(value);
}

Var Tape::binary(double value, Var x, double dx, Var y, double dy) {
  const auto ix = check(x);
  const auto iy = check(y);
  edge_parent_.push_back(ix);
  edge_partial_.push_back(dx);
  edge_parent_.push_back(iy);
  edge_partial_.push_back(dy);
  return push(value);
}

Var Tape::nary(double value, std::span<const Edge> parents) {
  for (const Edge& e : parents) {
    edge_parent_.push_back(check(e.parent));
    edge_partial_.push_back(e.partial);
  }
  return push(value);
}

void Tape::backward(Var root) {
  const auto r = check(root);
  adjoint_.assign(static_cast<std::size_t>(r) + 1, 0.0);
  adjoint_[r] = 1.0;
  for (std::int32_t i = r; i >= 0; --i) {
    const double a = adjoint_[i];
    if (a == 0.0) continue;
    for (std::int32_t e = edge_begin_[i]; e < edge_begin_[i + 1]; ++e) {
      const std::int32_t p = edge_parent_[e];
      if (p >= i) {
        throw InvariantError("cyclic graph: node " + std::to_string(i) +
                             " refers to node " + std::to_string(p));
      }
      adjoint_[p] += edge_partial_[e] * a;
    }
  }
  for (std::int32_t i = 0; i <= r; ++i) grads_[i] += adjoint_[i];
}

double Tape::value(Var v) const { return values_[check(v)]; }
double Tape::grad(Var v) const { return grads_[check(v)]; }

void Tape::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void Tape::clear() {
  values_.clear();
  grads_.clear();
  edge_begin_.clear();
  edge_parent_.clear();
  edge_partial_.clear();
}

namespace {
Tape& tape_of(Var x) {
  if (!x.valid()) throw InvariantError("operation on a detached Var");
  return *x.tape();
}
}  // namespace

Var operator+(Var x, Var y) {
  return tape_of(x).binary(x.value() + y.value(), x, 1.0, y, 1.0);
}
Var operator+(Var x, double c) { return tape_of(x).unary(x.value() + c, x, 1.0); }
Var operator+(double c, Var x) { return x + c; }
Var operator-(Var x, Var y) {
  return tape_of(x).binary(x.value() - y.value(), x, 1.0, y, -1.0);
}
Var operator-(Var x, double c) { return tape_of(x).unary(x.value() - c, x, 1.0); }
Var operator-(double c, Var x) { return tape_of(x).unary(c - x.value(), x, -1.0); }
Var operator-(Var x) { return tape_of(x).unary(-x.value(), x, -1.0); }
Var operator*(Var x, Var y) {
  const double a = x.value(), b = y.value();
  return tape_of(x).binary(a * b, x, b, y, a);
}
Var operator*(Var x, double c) { return tape_of(x).unary(x.value() * c, x, c); }
Var operator*(double c, Var x) { return x * c; }
Var operator/(Var x, Var y) {
  const double a = x.value(), b = y.value();
  return tape_of(x).binary(a / b, x, 1.0 / b, y, -a / (b * b));
}
Var operator/(Var x, double c) { return tape_of(x).unary(x.value() / c, x, 1.0 / c); }
Var operator/(double c, Var x) {
  const double b = x.value();
  return tape_of(x).unary(c / b, x, -c / (b * b));
}

Var exp(Var x) {
  const double e = std::exp(x.value());
  return tape_of(x).unary(e, x, e);
}
Var log(Var x) {
  const double a = x.value();
  return tape_of(x).unary(std::log(a), x, 1.0 / a);
}
Var tanh(Var x) {
  const double t = std::tanh(x.value());
  return tape_of(x).unary(t, x, 1.0 - t * t);
}
Var sqrt(Var x) {
  const double s = std::sqrt(x.value());
  return tape_of(x).unary(s, x, 0.5 / s);
}
Var square(Var x) {
  const double a = x.value();
  return tape_of(x).unary(a * a, x, 2.0 * a);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Var softplus(Var x) {
  const double a = x.value();
  const double sigmoid = 1.0 / (1.0 + std::exp(-a));
  return tape_of(x).unary(softplus(a), x, sigmoid);
}

Var relu(Var x) {
  const double a = x.value();
  return tape_of(x).unary(a > 0.0 ? a : 0.0, x, a > 0.0 ? 1.0 : 0.0);
}

Var max(Var x, Var y) {
  const double a = x.value(), b = y.value();
  if (a > b) return tape_of(x).binary(a, x, 1.0, y, 0.0);
  return tape_of(x).binary(b, x, 0.0, y, 1.0);
}

}  // namespace tailq::autodiff
