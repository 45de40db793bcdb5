#pragma once

// Reverse-mode automatic differentiation over scalar computation graphs.
//
// Nodes are appended to a Tape in evaluation order, so a node can only refer
// to parents that were recorded before it and the graph is acyclic by
// construction. backward() walks the tape once in reverse.

#include <cstdint>
#include <span>
#include <vector>

namespace tailq::autodiff {

class Tape;

/// Handle to one scalar node on a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;

  double value() const;
  std::int32_t index() const { return index_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::int32_t index_ = -1;
};

/// One incoming edge of a node: the parent and d(node)/d(parent).
struct Edge {
  Var parent;
  double partial = 0.0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node. Gradients flow into it.
  Var variable(double value);
  /// Leaf node that is not meant to be differentiated (still receives an
  /// adjoint, which callers simply ignore).
  Var constant(double value) { return variable(value); }

  Var unary(double value, Var x, double dx);
  Var binary(double value, Var x, double dx, Var y, double dy);
  /// Node with an arbitrary number of parents, e.g. implicit-function nodes.
  Var nary(double value, std::span<const Edge> parents);

  /// Accumulates d(root)/d(node) into every node's gradient. Gradients from
  /// earlier calls are kept; use zero_grad() to reset.
  void backward(Var root);

  double value(Var v) const;
  double grad(Var v) const;

  void zero_grad();
  /// Drops all nodes but keeps allocated capacity for reuse.
  void clear();
  std::size_t size() const { return values_.size(); }

 private:
  std::int32_t check(Var v) const;
  Var push(double value);

  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<std::int32_t> edge_begin_;  // size() + 1 entries
  std::vector<std::int32_t> edge_parent_;
  std::vector<double> edge_partial_;
  std::vector<double> adjoint_;  // scratch for backward()
};

// Arithmetic. Mixed Var/double overloads treat the double as a constant.
Var operator+(Var x, Var y);
Var operator+(Var x, double c);
Var operator+(double c, Var x);
Var operator-(Var x, Var y);
Var operator-(Var x, double c);
Var operator-(double c, Var x);
Var operator-(Var x);
Var operator*(Var x, Var y);
Var operator*(Var x, double c);
Var operator*(double c, Var x);
Var operator/(Var x, Var y);
Var operator/(Var x, double c);
Var operator/(double c, Var x);

Var exp(Var x);
Var log(Var x);
Var tanh(Var x);
Var sqrt(Var x);
Var square(Var x);
/// log(1 + e^x), evaluated stably.
Var softplus(Var x);
/// max(0, x) with subgradient 0 at x == 0.
Var relu(Var x);
/// Gradient goes to the larger argument; on ties to the second one.
Var max(Var x, Var y);

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

double softplus(double x);
inline double square(double x) { return x * x; }

}  // namespace tailq::autodiff
