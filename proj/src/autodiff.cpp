#include "hsg/autodiff.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>

#include "hsg/error.hpp"

namespace hsg::ad {

Tape::Tape() { first_edge_.push_back(0); }

void Tape::clear() {
  values_.clear();
  parents_.clear();
  partials_.clear();
  first_edge_.assign(1, 0);
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  values_.reserve(nodes);
  first_edge_.reserve(nodes + 1);
  parents_.reserve(edges);
  partials_.reserve(edges);
}

Var Tape::variable(double value) {
  values_.push_back(value);
  first_edge_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return {this, static_cast<std::uint32_t>(values_.size() - 1)};
}

Var Tape::push(double value, std::span<const std::uint32_t> parents,
               std::span<const double> partials) {
  assert(parents.size() == partials.size());
  parents_.insert(parents_.end(), parents.begin(), parents.end());
  partials_.insert(partials_.end(), partials.begin(), partials.end());
  values_.push_back(value);
  first_edge_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return {this, static_cast<std::uint32_t>(values_.size() - 1)};
}

Var Tape::push(double value, Var a, double da) {
  parents_.push_back(a.index());
  partials_.push_back(da);
  values_.push_back(value);
  first_edge_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return {this, static_cast<std::uint32_t>(values_.size() - 1)};
}

Var Tape::push(double value, Var a, double da, Var b, double db) {
  parents_.push_back(a.index());
  partials_.push_back(da);
  parents_.push_back(b.index());
  partials_.push_back(db);
  values_.push_back(value);
  first_edge_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return {this, static_cast<std::uint32_t>(values_.size() - 1)};
}

std::vector<double> Tape::backward(Var output) const {
  if (output.tape() != this) throw Error("Tape::backward: output recorded on another tape");
  std::vector<double> adjoint(values_.size(), 0.0);
  adjoint[output.index()] = 1.0;
  for (std::size_t n = output.index() + 1; n-- > 0;) {
    const double g = adjoint[n];
    if (g == 0.0) continue;
    for (std::uint32_t e = first_edge_[n]; e < first_edge_[n + 1]; ++e) {
      adjoint[parents_[e]] += g * partials_[e];
    }
  }
  return adjoint;
}

namespace {

Tape* tape_of(Var a, [[maybe_unused]] Var b) {
  assert(a.tape() == b.tape());
  return a.tape();
}

}  // namespace

Var operator+(Var a, Var b) { return tape_of(a, b)->push(a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator+(Var a, double b) { return a.tape()->push(a.value() + b, a, 1.0); }
Var operator+(double a, Var b) { return b + a; }
Var operator-(Var a, Var b) { return tape_of(a, b)->push(a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator-(Var a, double b) { return a.tape()->push(a.value() - b, a, 1.0); }
Var operator-(double a, Var b) { return b.tape()->push(a - b.value(), b, -1.0); }
Var operator-(Var a) { return a.tape()->push(-a.value(), a, -1.0); }
Var operator*(Var a, Var b) {
  return tape_of(a, b)->push(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator*(Var a, double b) { return a.tape()->push(a.value() * b, a, b); }
Var operator*(double a, Var b) { return b * a; }
Var operator/(Var a, Var b) {
  const double inv = 1.0 / b.value();
  const double q = a.value() * inv;
  return tape_of(a, b)->push(q, a, inv, b, -q * inv);
}
Var operator/(Var a, double b) { return a * (1.0 / b); }
Var operator/(double a, Var b) {
  const double q = a / b.value();
  return b.tape()->push(q, b, -q / b.value());
}

Var exp(Var x) {
  const double v = std::exp(x.value());
  return x.tape()->push(v, x, v);
}
Var log(Var x) { return x.tape()->push(std::log(x.value()), x, 1.0 / x.value()); }
Var sqrt(Var x) {
  const double v = std::sqrt(x.value());
  return x.tape()->push(v, x, v > 0.0 ? 0.5 / v : 0.0);
}
Var sinh(Var x) { return x.tape()->push(std::sinh(x.value()), x, std::cosh(x.value())); }
Var cosh(Var x) { return x.tape()->push(std::cosh(x.value()), x, std::sinh(x.value())); }
Var acosh(Var x) {
  const double v = x.value();
  const double d = v > 1.0 ? 1.0 / std::sqrt(v * v - 1.0) : 0.0;
  return x.tape()->push(std::acosh(v), x, d);
}
Var asinh(Var x) {
  const double v = x.value();
  return x.tape()->push(std::asinh(v), x, 1.0 / std::sqrt(1.0 + v * v));
}
Var asin(Var x) {
  const double v = x.value();
  return x.tape()->push(std::asin(v), x, 1.0 / std::sqrt(std::max(1.0 - v * v, 1e-18)));
}
Var acos(Var x) {
  const double v = x.value();
  return x.tape()->push(std::acos(v), x, -1.0 / std::sqrt(std::max(1.0 - v * v, 1e-18)));
}
Var softplus(Var x) {
  const double v = x.value();
  const double value = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  const double sigmoid = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return x.tape()->push(value, x, sigmoid);
}

Var max(Var x, double floor) {
  if (x.value() > floor) return x;
  return x.tape()->push(floor, x, 0.0);
}
Var min(Var x, double ceiling) {
  if (x.value() < ceiling) return x;
  return x.tape()->push(ceiling, x, 0.0);
}
Var clamp(Var x, double lo, double hi) { return min(max(x, lo), hi); }

Var dot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size(), "ad::dot");
  if (a.empty()) throw Error("ad::dot: empty operands");
  Tape* tape = a.front().tape();
  std::vector<std::uint32_t> parents;
  std::vector<double> partials;
  parents.reserve(2 * a.size());
  partials.reserve(2 * a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i].value() * b[i].value();
    parents.push_back(a[i].index());
    partials.push_back(b[i].value());
    parents.push_back(b[i].index());
    partials.push_back(a[i].value());
  }
  return tape->push(acc, parents, partials);
}

Var squared_distance(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size(), "ad::squared_distance");
  if (a.empty()) throw Error("ad::squared_distance: empty operands");
  std::vector<std::uint32_t> parents;
  std::vector<double> partials;
  parents.reserve(2 * a.size());
  partials.reserve(2 * a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i].value() - b[i].value();
    acc += d * d;
    parents.push_back(a[i].index());
    partials.push_back(2.0 * d);
    parents.push_back(b[i].index());
    partials.push_back(-2.0 * d);
  }
  return a.front().tape()->push(acc, parents, partials);
}

Var sum(std::span<const Var> xs) {
  std::vector<double> ones(xs.size(), 1.0);
  return weighted_sum(xs, ones);
}

Var weighted_sum(std::span<const Var> xs, std::span<const double> weights) {
  if (xs.size() != weights.size()) throw DimensionError(xs.size(), weights.size(), "ad::weighted_sum");
  if (xs.empty()) throw Error("ad::weighted_sum: empty operand");
  std::vector<std::uint32_t> parents(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += weights[i] * xs[i].value();
    parents[i] = xs[i].index();
  }
  return xs.front().tape()->push(acc, parents, weights);
}

Var logsumexp(std::span<const Var> xs) {
  if (xs.empty()) throw Error("ad::logsumexp: empty operand");
  double shift = -std::numeric_limits<double>::infinity();
  for (const Var& x : xs) shift = std::max(shift, x.value());
  std::vector<double> weights(xs.size());
  std::vector<std::uint32_t> parents(xs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    weights[i] = std::exp(xs[i].value() - shift);
    total += weights[i];
    parents[i] = xs[i].index();
  }
  for (double& w : weights) w /= total;
  return xs.front().tape()->push(shift + std::log(total), parents, weights);
}

}  // namespace hsg::ad
