#include "hsg/entailment.hpp"

#include <algorithm>
#include <string>

namespace hsg {

void ConeParams::validate() const {
  if (!(K > 0.0) || !std::isfinite(K)) throw ConfigError("cone K must be positive, got " + std::to_string(K));
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("cone eta must be positive, got " + std::to_string(eta));
  }
}

double half_aperture(const LorentzPoint& q, const Curvature& curv, const ConeParams& params) {
  params.validate();
  return detail::half_aperture(q, curv.sqrt_value(), params.K);
}

double exterior_angle(const LorentzPoint& p, const LorentzPoint& q, const Curvature& curv) {
  if (p.dim() != q.dim()) throw DimensionError(p.dim(), q.dim(), "exterior_angle");
  require_on_manifold(p, curv, "exterior_angle");
  require_on_manifold(q, curv, "exterior_angle");
  return detail::exterior_angle(p, q, curv.value());
}

double entailment_loss(const LorentzPoint& p, const LorentzPoint& q, const Curvature& curv,
                       const ConeParams& params) {
  const double phi = exterior_angle(p, q, curv);
  const double omega = half_aperture(q, curv, params);
  return std::max(0.0, phi - params.eta * omega);
}

}  // namespace hsg
