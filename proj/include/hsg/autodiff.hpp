#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hsg::ad {

class Tape;

// Handle to a scalar node recorded on a Tape. Cheap to copy; only valid
// while the owning tape is alive and has not been cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  double value() const;
  Tape* tape() const { return tape_; }
  std::uint32_t index() const { return index_; }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

// Flat Wengert list. Every node stores its value and the local partial
// derivative with respect to each parent; backward() is a single reverse
// sweep accumulating adjoints.
class Tape {
 public:
  Tape();

  Var variable(double value);
  Var constant(double value) { return variable(value); }

  // Records a node with explicit parents and local partials.
  Var push(double value, std::span<const std::uint32_t> parents,
           std::span<const double> partials);
  Var push(double value, Var a, double da);
  Var push(double value, Var a, double da, Var b, double db);

  double value(std::uint32_t index) const { return values_[index]; }
  std::size_t size() const { return values_.size(); }
  std::size_t edge_count() const { return parents_.size(); }

  // Adjoints d(output)/d(node) for every node recorded so far.
  std::vector<double> backward(Var output) const;

  void clear();
  void reserve(std::size_t nodes, std::size_t edges);

 private:
  std::vector<double> values_;
  std::vector<std::uint32_t> first_edge_;
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
};

inline double Var::value() const { return tape_->value(index_); }

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

Var operator+(Var a, Var b);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator-(Var a);
Var operator*(Var a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);

Var exp(Var x);
Var log(Var x);
Var sqrt(Var x);
Var sinh(Var x);
Var cosh(Var x);
Var acosh(Var x);
Var asinh(Var x);
Var asin(Var x);
Var acos(Var x);
Var softplus(Var x);

// Piecewise ops; the inactive branch contributes a zero partial.
Var max(Var x, double floor);
Var min(Var x, double ceiling);
Var clamp(Var x, double lo, double hi);

// Fused reductions recorded as a single node.
Var dot(std::span<const Var> a, std::span<const Var> b);
// |a - b|^2
Var squared_distance(std::span<const Var> a, std::span<const Var> b);
Var sum(std::span<const Var> xs);
Var weighted_sum(std::span<const Var> xs, std::span<const double> weights);
// log(sum_i exp(x_i)) with the max-shift applied.
Var logsumexp(std::span<const Var> xs);

}  // namespace hsg::ad
