#pragma once

// Lorentz (hyperboloid) model of hyperbolic space with curvature -c.
//
// Points are stored as (space, time) with the time coordinate last when
// flattened to an (n+1)-vector. Only maps based at the origin
// o = (0, ..., 0, 1/sqrt(c)) are provided; project_tangent at an arbitrary
// base point exists for validation.

#include <cmath>
#include <span>
#include <vector>

#include "hsg/autodiff.hpp"
#include "hsg/error.hpp"

namespace hsg {

using Vector = std::vector<double>;

inline constexpr double kCurvatureMin = 1e-3;
inline constexpr double kCurvatureMax = 1e4;
// Floor on the arcosh argument: arcosh(max(arg, 1 + eps)).
inline constexpr double kDistanceEps = 1e-7;
// Below this value of sqrt(c)*|v| the exp-map prefactor uses its series.
inline constexpr double kSinhSeriesCutoff = 1e-4;
// sqrt(c) * r_max; keeps sinh/cosh below e^10.
inline constexpr double kMaxScaledTangentNorm = 10.0;

double softplus(double x);
double softplus_inverse(double y);

// Curvature magnitude c > 0 of the manifold. A learnable curvature is
// stored through an unconstrained raw value u with c = clamp(softplus(u)).
class Curvature {
 public:
  static Curvature fixed(double c);
  static Curvature learnable(double c);
  static Curvature from_raw(double raw, bool learnable);

  double value() const;
  double sqrt_value() const { return std::sqrt(value()); }
  // Unconstrained parameter (u for learnable, c itself otherwise).
  double raw() const { return raw_; }
  bool is_learnable() const { return learnable_; }

  // Replaces the raw parameter and re-clamps c into [c_min, c_max].
  void set_raw(double raw);

 private:
  Curvature(double raw, bool learnable) : raw_(raw), learnable_(learnable) {}
  double raw_;
  bool learnable_;
};

// Largest tangent norm at the origin admitted before the exp map.
inline double max_tangent_norm(double c) { return kMaxScaledTangentNorm / std::sqrt(c); }
inline double max_tangent_norm(const Curvature& c) { return max_tangent_norm(c.value()); }

template <class T>
struct BasicLorentzPoint {
  std::vector<T> space;
  T time{};

  std::size_t dim() const { return space.size(); }
};

using LorentzPoint = BasicLorentzPoint<double>;

// Space part of a tangent vector at the origin; the time part is 0.
struct TangentAtOrigin {
  Vector space;
};

struct PoincarePoint {
  Vector coords;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double max(double x, double floor) { return x > floor ? x : floor; }
inline double min(double x, double ceiling) { return x < ceiling ? x : ceiling; }
inline double clamp(double x, double lo, double hi) { return min(max(x, lo), hi); }

using ad::value_of;

template <class T>
std::vector<T> clamp_tangent_norm(const std::vector<T>& v, const T& r_max) {
  using std::sqrt;
  if (v.empty()) return v;
  const T norm = sqrt(dot(std::span<const T>(v), std::span<const T>(v)));
  if (value_of(norm) <= value_of(r_max)) return v;
  const T scale = r_max / norm;
  std::vector<T> out;
  out.reserve(v.size());
  for (const T& x : v) out.push_back(x * scale);
  return out;
}

// x_space = sinh(sqrt(c)|v|)/(sqrt(c)|v|) v, x_time from the constraint.
template <class T>
BasicLorentzPoint<T> exp_map_origin(const std::vector<T>& v, const T& c, const T& sqrt_c) {
  using std::sinh;
  using std::sqrt;
  const T norm_sq = dot(std::span<const T>(v), std::span<const T>(v));
  const T norm = sqrt(norm_sq);
  const T t = sqrt_c * norm;
  T factor = t * t * (1.0 / 6.0) + 1.0;
  if (value_of(t) >= kSinhSeriesCutoff) factor = sinh(t) / t;
  BasicLorentzPoint<T> x;
  x.space.reserve(v.size());
  for (const T& vi : v) x.space.push_back(vi * factor);
  // |x_space|^2 = |v|^2 * factor^2; reusing norm_sq keeps the tape short.
  x.time = sqrt(1.0 / c + norm_sq * factor * factor);
  return x;
}

// Squared Lorentz norm of (x - y); equals -2/c - 2<x,y>_L on the manifold.
template <class T>
T lorentz_squared_chord(const BasicLorentzPoint<T>& x, const BasicLorentzPoint<T>& y) {
  const T ds = squared_distance(std::span<const T>(x.space), std::span<const T>(y.space));
  const T dt = x.time - y.time;
  return ds - dt * dt;
}

// (1/sqrt c) arcosh(max(-c<x,y>_L, 1 + eps)), evaluated through the chord
// identity -c<x,y>_L = 1 + c|x - y|_L^2 / 2 and
// arcosh(1 + q) = 2 asinh(sqrt(q / 2)) to avoid cancellation.
template <class T>
T lorentz_distance(const BasicLorentzPoint<T>& x, const BasicLorentzPoint<T>& y, const T& c,
                   const T& sqrt_c) {
  using std::asinh;
  using std::sqrt;
  const T excess = max(c * lorentz_squared_chord(x, y) * 0.5, kDistanceEps);
  return asinh(sqrt(excess * 0.5)) * 2.0 / sqrt_c;
}

}  // namespace detail

// <x,y>_L = <x_space, y_space> - x_time y_time on flattened (n+1)-vectors.
double lorentz_inner(std::span<const double> x, std::span<const double> y);
double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y);

Vector flatten(const LorentzPoint& x);
LorentzPoint unflatten(std::span<const double> x);

LorentzPoint origin(std::size_t dim, const Curvature& curv);

// |c<x,x>_L + 1| / (c x_time^2). The normalisation by the magnitude of the
// cancelling terms makes the residual attainable in binary64 across the
// admissible radius range; it equals the absolute residual at the origin.
double hyperboloid_residual(const LorentzPoint& x, const Curvature& curv);
// Throws PreconditionError when the residual exceeds tol.
void require_on_manifold(const LorentzPoint& x, const Curvature& curv, const char* where,
                         double tol = 1e-6);

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y, const Curvature& curv);

TangentAtOrigin clamp_tangent_norm(const TangentAtOrigin& v, double r_max);

LorentzPoint exp_map_origin(const TangentAtOrigin& v, const Curvature& curv);
TangentAtOrigin log_map_origin(const LorentzPoint& x, const Curvature& curv);

// u + c z <u,z>_L on flattened (n+1)-vectors.
Vector project_tangent(std::span<const double> u, const LorentzPoint& z, const Curvature& curv);

LorentzPoint poincare_to_lorentz(const PoincarePoint& b, const Curvature& curv);
PoincarePoint lorentz_to_poincare(const LorentzPoint& x, const Curvature& curv);

double euclidean_norm(std::span<const double> v);

}  // namespace hsg
