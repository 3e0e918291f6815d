#pragma once

// Random loss-term fixtures shared by the unit tests and the acceptance
// runner.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hsg/objective.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace hsg;

struct LossFixture {
  EmbeddingPool pool;
  ContrastiveBatch place;
  ContrastiveBatch object;
  std::vector<PlaceObjectPair> pairs;
};

// Pool entries [0, places) are places, the rest objects. Places are paired
// up as positives, objects likewise; negatives are all other same-kind
// entries. Every object is paired with place (object index mod places).
inline LossFixture random_fixture(std::mt19937_64& rng, std::size_t places, std::size_t objects, std::size_t dim,
                                  double radius) {
  LossFixture f;
  f.pool.dim = dim;
  for (std::size_t i = 0; i < places + objects; ++i) f.pool.tangents.push_back(oracle::random_tangent(rng, dim, radius));
  auto fill = [](ContrastiveBatch& b, PairKind kind, std::size_t lo, std::size_t n) {
    b.kind = kind;
    for (std::size_t a = 0; a + 1 < n; a += 2) {
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t anchor = lo + a + (dir ? 1 : 0);
        const std::size_t pos = lo + a + (dir ? 0 : 1);
        b.anchors.push_back(anchor);
        b.positives.push_back(pos);
        std::vector<std::size_t> neg;
        for (std::size_t k = 0; k < n; ++k) {
          if (lo + k != anchor && lo + k != pos) neg.push_back(lo + k);
        }
        b.negatives.push_back(neg);
      }
    }
  };
  fill(f.place, PairKind::Place, 0, places);
  fill(f.object, PairKind::Object, places, objects);
  for (std::size_t o = 0; o < objects; ++o) f.pairs.push_back({o % places, places + o});
  return f;
}

// True when no pair sits within `margin` of a non-smooth point: the hinge,
// the aperture clamp, acos near 0 or pi, or the tangent-norm clamp.
inline bool smooth(const LossFixture& f, const Curvature& c, const ConeParams& cone, double margin) {
  const double r_max = max_tangent_norm(c);
  for (const Vector& t : f.pool.tangents) {
    if (euclidean_norm(t) > (1.0 - margin) * r_max) return false;
  }
  for (const PlaceObjectPair& pr : f.pairs) {
    const LorentzPoint q = exp_map_origin(TangentAtOrigin{f.pool.tangents[pr.place]}, c);
    const LorentzPoint p = exp_map_origin(TangentAtOrigin{f.pool.tangents[pr.object]}, c);
    const double qn = euclidean_norm(q.space);
    if (qn < 1e-6) return false;
    const double arg = 2.0 * cone.K / (c.sqrt_value() * qn);
    if (std::abs(arg - 1.0) < margin) return false;
    const double phi = exterior_angle(p, q, c);
    const double omega = half_aperture(q, c, cone);
    if (phi < margin || phi > std::acos(-1.0) - margin) return false;
    if (std::abs(phi - cone.eta * omega) < margin) return false;
  }
  return true;
}

inline NamedObjective objective(std::string name, const LossFixture& f, const Curvature& c,
                                std::function<DifferentiableScalar(const EmbeddingPool&, const Curvature&)> fn) {
  return {std::move(name),
          [f, c, fn](std::span<const double> p) {
            EmbeddingPool pool = f.pool;
            Curvature curv = c;
            unpack_parameters(p, pool, curv);
            return fn(pool, curv);
          },
          [f](std::size_t i) {
            const std::size_t n = f.pool.dim * f.pool.size();
            if (i >= n) return std::string("curvature");
            return "tangent[" + std::to_string(i / f.pool.dim) + "][" + std::to_string(i % f.pool.dim) + "]";
          }};
}

// info_nce, entailment_batch_loss and total_loss objectives at a random
// smooth point for curvature c (learnable).
struct GradientSuite {
  LossFixture fixture;
  Curvature curvature = Curvature::learnable(1.0);
  std::vector<NamedObjective> objectives;
};

inline GradientSuite gradient_suite(double c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradientSuite s;
  s.curvature = Curvature::learnable(c);
  const ConeParams cone;
  const LossWeights weights;
  do {
    s.fixture = random_fixture(rng, 4, 6, 3, 0.8 * max_tangent_norm(c));
  } while (!smooth(s.fixture, s.curvature, cone, 1e-3));
  const LossFixture& f = s.fixture;
  s.objectives.push_back(objective("info_nce", f, s.curvature, [f](const EmbeddingPool& p, const Curvature& cv) {
    return info_nce(p, f.place, cv, 0.1);
  }));
  s.objectives.push_back(
      objective("entailment_batch_loss", f, s.curvature, [f, cone](const EmbeddingPool& p, const Curvature& cv) {
        return entailment_batch_loss(p, f.pairs, cv, cone);
      }));
  s.objectives.push_back(
      objective("total_loss", f, s.curvature, [f, cone, weights](const EmbeddingPool& p, const Curvature& cv) {
        return total_loss(p, f.place, f.object, f.pairs, cv, weights, cone).total;
      }));
  return s;
}

}  // namespace fixtures
