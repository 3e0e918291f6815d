#pragma once

// Entailment cones on the Lorentz model. A parent q defines a cone with
// half-aperture omega(q); a child p is entailed when the exterior angle
// phi(p, q) at q does not exceed eta * omega(q).

#include <cmath>
#include <numbers>

#include "hsg/manifold.hpp"

namespace hsg {

struct ConeParams {
  double K = 0.1;    // aperture scale near the origin
  double eta = 1.0;  // aperture threshold multiplier

  void validate() const;
};

inline constexpr double kAngleClampMargin = 1e-9;
inline constexpr double kExteriorDenominatorFloor = 1e-12;
// Space norm below which a point is treated as the root (no cone).
inline constexpr double kRootSpaceNorm = 1e-12;

namespace detail {

template <class T>
T space_norm(const BasicLorentzPoint<T>& q) {
  using std::sqrt;
  return sqrt(dot(std::span<const T>(q.space), std::span<const T>(q.space)));
}

template <class T>
T half_aperture(const BasicLorentzPoint<T>& q, const T& sqrt_c, double K) {
  using std::asin;
  const T norm = space_norm(q);
  if (value_of(norm) < kRootSpaceNorm) throw DomainError("half_aperture: no cone at root");
  const T arg = (2.0 * K) / (sqrt_c * norm);
  return asin(clamp(arg, -1.0 + kAngleClampMargin, 1.0 - kAngleClampMargin));
}

// acos((p_t + q_t c<p,q>_L) / (|q_space| sqrt((c<p,q>_L)^2 - 1))). With
// a = -c<p,q>_L the radicand a^2 - 1 is formed as (a - 1)(a + 1), where
// a - 1 = c|p - q|_L^2 / 2 comes from the cancellation-free chord.
template <class T>
T exterior_angle(const BasicLorentzPoint<T>& p, const BasicLorentzPoint<T>& q, const T& c) {
  using std::acos;
  using std::sqrt;
  const T q_norm = space_norm(q);
  if (value_of(q_norm) < kRootSpaceNorm) throw DomainError("exterior_angle: no cone at root");
  bool coincident = value_of(p.time) == value_of(q.time);
  for (std::size_t i = 0; coincident && i < p.space.size(); ++i) {
    coincident = value_of(p.space[i]) == value_of(q.space[i]);
  }
  if (coincident) throw DomainError("exterior_angle: degenerate geodesic (p == q)");

  const T a_minus_one = c * lorentz_squared_chord(p, q) * 0.5;
  const T radicand = max(a_minus_one * (a_minus_one + 2.0), kExteriorDenominatorFloor);
  const T numerator = p.time - q.time * (a_minus_one + 1.0);
  return acos(clamp(numerator / (q_norm * sqrt(radicand)), -1.0, 1.0));
}

}  // namespace detail

double half_aperture(const LorentzPoint& q, const Curvature& curv, const ConeParams& params);
double exterior_angle(const LorentzPoint& p, const LorentzPoint& q, const Curvature& curv);
// max(0, phi(p, q) - eta * omega(q)); q is the cone apex (parent).
double entailment_loss(const LorentzPoint& p, const LorentzPoint& q, const Curvature& curv,
                       const ConeParams& params);

}  // namespace hsg
