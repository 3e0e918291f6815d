#include "hsg/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hsg {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw DomainError("softplus_inverse: argument must be positive");
  // log(exp(y) - 1) = y + log(1 - exp(-y))
  return y + std::log(-std::expm1(-y));
}

Curvature Curvature::fixed(double c) {
  if (!std::isfinite(c) || c < kCurvatureMin || c > kCurvatureMax) {
    throw ConfigError("curvature " + std::to_string(c) + " outside [1e-3, 1e4]");
  }
  return Curvature(c, false);
}

Curvature Curvature::learnable(double c) {
  if (!std::isfinite(c) || c < kCurvatureMin || c > kCurvatureMax) {
    throw ConfigError("curvature " + std::to_string(c) + " outside [1e-3, 1e4]");
  }
  return Curvature(softplus_inverse(c), true);
}

Curvature Curvature::from_raw(double raw, bool learnable) {
  if (!learnable) return fixed(raw);
  Curvature curv(0.0, true);
  curv.set_raw(raw);
  return curv;
}

double Curvature::value() const {
  if (!learnable_) return raw_;
  return std::clamp(softplus(raw_), kCurvatureMin, kCurvatureMax);
}

void Curvature::set_raw(double raw) {
  if (!std::isfinite(raw)) throw DomainError("Curvature::set_raw: non-finite parameter");
  if (!learnable_) {
    raw_ = std::clamp(raw, kCurvatureMin, kCurvatureMax);
    return;
  }
  const double c = softplus(raw);
  if (c < kCurvatureMin) {
    raw_ = softplus_inverse(kCurvatureMin);
  } else if (c > kCurvatureMax) {
    raw_ = softplus_inverse(kCurvatureMax);
  } else {
    raw_ = raw;
  }
}

double euclidean_norm(std::span<const double> v) { return std::sqrt(detail::dot(v, v)); }

double lorentz_inner(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError(x.size(), y.size(), "lorentz_inner");
  if (x.size() < 2) throw DimensionError(x.size(), 2, "lorentz_inner (need n+1 >= 2)");
  const std::size_t n = x.size() - 1;
  return detail::dot(x.first(n), y.first(n)) - x[n] * y[n];
}

double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y) {
  if (x.dim() != y.dim()) throw DimensionError(x.dim(), y.dim(), "lorentz_inner");
  return detail::dot(x.space, y.space) - x.time * y.time;
}

Vector flatten(const LorentzPoint& x) {
  Vector out(x.space);
  out.push_back(x.time);
  return out;
}

LorentzPoint unflatten(std::span<const double> x) {
  if (x.size() < 2) throw DimensionError(x.size(), 2, "unflatten");
  LorentzPoint p;
  p.space.assign(x.begin(), x.end() - 1);
  p.time = x.back();
  return p;
}

LorentzPoint origin(std::size_t dim, const Curvature& curv) {
  return LorentzPoint{Vector(dim, 0.0), 1.0 / curv.sqrt_value()};
}

double hyperboloid_residual(const LorentzPoint& x, const Curvature& curv) {
  const double c = curv.value();
  const double time_sq = c * x.time * x.time;
  const double residual = std::abs(c * lorentz_inner(x, x) + 1.0);
  return residual / std::max(1.0, time_sq);
}

void require_on_manifold(const LorentzPoint& x, const Curvature& curv, const char* where, double tol) {
  const double r = hyperboloid_residual(x, curv);
  if (!(r <= tol) || !(x.time > 0.0)) {
    throw PreconditionError(std::string(where) + ": point is off the hyperboloid (residual " +
                            std::to_string(r) + ")");
  }
}

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y, const Curvature& curv) {
  if (x.dim() != y.dim()) throw DimensionError(x.dim(), y.dim(), "lorentz_distance");
  require_on_manifold(x, curv, "lorentz_distance");
  require_on_manifold(y, curv, "lorentz_distance");
  const double c = curv.value();
  return detail::lorentz_distance(x, y, c, std::sqrt(c));
}

TangentAtOrigin clamp_tangent_norm(const TangentAtOrigin& v, double r_max) {
  if (!(r_max > 0.0)) throw DomainError("clamp_tangent_norm: r_max must be positive");
  return {detail::clamp_tangent_norm(v.space, r_max)};
}

LorentzPoint exp_map_origin(const TangentAtOrigin& v, const Curvature& curv) {
  for (double x : v.space) {
    if (!std::isfinite(x)) throw DomainError("exp_map_origin: non-finite tangent component");
  }
  const double c = curv.value();
  return detail::exp_map_origin(v.space, c, std::sqrt(c));
}

TangentAtOrigin log_map_origin(const LorentzPoint& x, const Curvature& curv) {
  require_on_manifold(x, curv, "log_map_origin");
  // proj_o(x) = (x_space, 0); its length along the geodesic is
  // d(o, x) = asinh(sqrt(c) |x_space|) / sqrt(c).
  const double sqrt_c = curv.sqrt_value();
  const double s = euclidean_norm(x.space);
  const double t = sqrt_c * s;
  double scale = 1.0;
  if (t >= kSinhSeriesCutoff) scale = std::asinh(t) / t;
  else scale = 1.0 - t * t / 6.0;
  TangentAtOrigin v;
  v.space.reserve(x.dim());
  for (double xi : x.space) v.space.push_back(xi * scale);
  return v;
}

Vector project_tangent(std::span<const double> u, const LorentzPoint& z, const Curvature& curv) {
  const Vector zf = flatten(z);
  if (u.size() != zf.size()) throw DimensionError(u.size(), zf.size(), "project_tangent");
  const double k = curv.value() * lorentz_inner(u, zf);
  Vector out(u.begin(), u.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k * zf[i];
  return out;
}

LorentzPoint poincare_to_lorentz(const PoincarePoint& b, const Curvature& curv) {
  const double c = curv.value();
  const double norm_sq = detail::dot(b.coords, b.coords);
  if (!(c * norm_sq < 1.0 - 1e-9)) {
    throw DomainError("poincare_to_lorentz: point on or outside the ball boundary");
  }
  const double scale = 2.0 / (1.0 - c * norm_sq);
  LorentzPoint x;
  x.space.reserve(b.coords.size());
  for (double bi : b.coords) x.space.push_back(scale * bi);
  x.time = std::sqrt(1.0 / c + detail::dot(x.space, x.space));
  return x;
}

PoincarePoint lorentz_to_poincare(const LorentzPoint& x, const Curvature& curv) {
  const double c = curv.value();
  // b = x_space (sqrt(1 + c|x_s|^2) - 1) / (c |x_s|^2) = x_space / (1 + sqrt(1 + c|x_s|^2))
  const double scale = 1.0 / (1.0 + std::sqrt(1.0 + c * detail::dot(x.space, x.space)));
  PoincarePoint b;
  b.coords.reserve(x.dim());
  for (double xi : x.space) b.coords.push_back(scale * xi);
  return b;
}

}  // namespace hsg
