#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numeric code; geometry is redone in long double from the
// textbook formulas.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using LD = long double;
using LVec = std::vector<LD>;

inline LD norm(const LVec& v) {
  LD s = 0;
  for (LD x : v) s += x * x;
  return std::sqrt(s);
}

// exp at the origin of the hyperboloid with curvature -c: space part and time.
struct LPoint {
  LVec space;
  LD time = 0;
};

inline LPoint exp0(const std::vector<double>& v, LD c) {
  LVec s(v.begin(), v.end());
  const LD n = norm(s);
  const LD sc = std::sqrt(c);
  LPoint p;
  p.space = s;
  if (n > 0) {
    const LD f = std::sinh(sc * n) / (sc * n);
    for (LD& x : p.space) x *= f;
  }
  p.time = std::cosh(sc * n) / sc;
  return p;
}

inline LD inner(const LPoint& a, const LPoint& b) {
  LD s = 0;
  for (std::size_t i = 0; i < a.space.size(); ++i) s += a.space[i] * b.space[i];
  return s - a.time * b.time;
}

// Lorentz point to the Poincare ball: b = x_space / (1 + sqrt(c) x_time).
inline LVec to_ball(const LPoint& x, LD c) {
  LVec b = x.space;
  const LD den = 1 + std::sqrt(c) * x.time;
  for (LD& v : b) v /= den;
  return b;
}

// Geodesic distance in the Poincare ball of curvature -c.
inline LD ball_distance(const LVec& a, const LVec& b, LD c) {
  LD diff = 0;
  LD na = 0;
  LD nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const LD arg = 1 + 2 * c * diff / ((1 - c * na) * (1 - c * nb));
  return std::acosh(std::max<LD>(arg, 1)) / std::sqrt(c);
}

// Exterior angle at parent q towards child p from the hyperbolic law of
// cosines in the triangle (origin, q, p), all sides measured in the ball.
inline LD exterior_angle_ball(const LVec& p, const LVec& q, LD c) {
  const LVec o(p.size(), 0);
  const LD sc = std::sqrt(c);
  const LD d_op = ball_distance(o, p, c);
  const LD d_oq = ball_distance(o, q, c);
  const LD d_qp = ball_distance(q, p, c);
  const LD num = std::cosh(sc * d_qp) * std::cosh(sc * d_oq) - std::cosh(sc * d_op);
  const LD den = std::sinh(sc * d_qp) * std::sinh(sc * d_oq);
  const LD angle_oqp = std::acos(std::clamp<LD>(num / den, -1, 1));
  return std::acos(LD(-1)) - angle_oqp;
}

// Ball-form half-aperture asin(K (1 - c|b|^2) / (sqrt(c) |b|)).
inline LD aperture_ball(const LVec& b, LD c, LD K) {
  const LD n = norm(b);
  const LD arg = K * (1 - c * n * n) / (std::sqrt(c) * n);
  return std::asin(std::clamp<LD>(arg, -1 + 1e-9L, 1 - 1e-9L));
}

// Maximum of sum_i S(i, pi(i)) over injective partial maps, by padding to a
// square of zeros and enumerating permutations.
template <class Score>
double brute_force_max(std::size_t rows, std::size_t cols, Score score) {
  const std::size_t n = std::max(rows, cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (perm[i] < cols) total += score(i, perm[i]);
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Counts over explicit edge sets.
inline Counts edge_counts(const std::set<std::pair<int, int>>& pred, const std::set<std::pair<int, int>>& truth) {
  Counts c;
  for (const auto& e : pred) (truth.count(e) ? c.tp : c.fp)++;
  for (const auto& e : truth) {
    if (!pred.count(e)) c.fn++;
  }
  return c;
}

struct Box {
  double x1, y1, x2, y2;
};

// GIoU from areas: intersection, union and the enclosing box.
inline long double giou(const Box& a, const Box& b) {
  const LD ix = std::max<LD>(0, std::min<LD>(a.x2, b.x2) - std::max<LD>(a.x1, b.x1));
  const LD iy = std::max<LD>(0, std::min<LD>(a.y2, b.y2) - std::max<LD>(a.y1, b.y1));
  const LD inter = ix * iy;
  const LD area_a = LD(a.x2 - a.x1) * (a.y2 - a.y1);
  const LD area_b = LD(b.x2 - b.x1) * (b.y2 - b.y1);
  const LD uni = area_a + area_b - inter;
  const LD hull = (std::max<LD>(a.x2, b.x2) - std::min<LD>(a.x1, b.x1)) *
                  (std::max<LD>(a.y2, b.y2) - std::min<LD>(a.y1, b.y1));
  return inter / uni - (hull - uni) / hull;
}

// Random tangent with direction uniform on the sphere and norm uniform in
// [0, r].
inline std::vector<double> random_tangent(std::mt19937_64& rng, std::size_t dim, double r) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0;
  do {
    n = 0;
    for (double& x : v) {
      x = g(rng);
      n += x * x;
    }
  } while (n == 0);
  const double scale = r * u(rng) / std::sqrt(n);
  for (double& x : v) x *= scale;
  return v;
}

}  // namespace oracle
