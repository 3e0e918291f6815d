#include <doctest.h>

#include <cmath>
#include <random>

#include "hsg/manifold.hpp"
#include "oracles.hpp"

using namespace hsg;

namespace {

LorentzPoint exp_of(const Vector& v, const Curvature& c) { return exp_map_origin(TangentAtOrigin{v}, c); }

Vector neg(Vector v) {
  for (double& x : v) x = -x;
  return v;
}

}  // namespace

TEST_CASE("lorentz_inner examples") {
  const Vector o{0, 0, 1};
  CHECK(lorentz_inner(o, o) == doctest::Approx(-1.0));
  const Vector x{1, 0, std::sqrt(2.0)};
  const Vector y{0, 1, std::sqrt(2.0)};
  CHECK(lorentz_inner(x, y) == doctest::Approx(-2.0).epsilon(1e-15));
  const Curvature c80 = Curvature::fixed(80);
  const LorentzPoint p = exp_of({0.05, -0.02, 0.03}, c80);
  CHECK(lorentz_inner(p, p) == doctest::Approx(-0.0125).epsilon(1e-12));
}

TEST_CASE("lorentz_inner rejects mismatched dimensions") {
  const Vector a{1, 2, 3};
  const Vector b{1, 2};
  try {
    lorentz_inner(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.lhs() == 3);
    CHECK(e.rhs() == 2);
  }
}

TEST_CASE("distance examples") {
  const Curvature c1 = Curvature::fixed(1.0);
  const LorentzPoint o = origin(2, c1);
  CHECK(lorentz_distance(o, o, c1) <= 5e-4);
  const Vector v{0.6, 0.8};
  CHECK(std::abs(lorentz_distance(exp_of(v, c1), exp_of(neg(v), c1), c1) - 2.0) <= 1e-6);
}

TEST_CASE("distance rejects off-manifold points") {
  const Curvature c1 = Curvature::fixed(1.0);
  LorentzPoint bad = origin(2, c1);
  bad.time = 2.0;
  CHECK_THROWS_AS(lorentz_distance(bad, origin(2, c1), c1), PreconditionError);
}

TEST_CASE("clamp_tangent_norm examples") {
  CHECK(clamp_tangent_norm(TangentAtOrigin{{0.0, 0.0}}, 1.0).space == Vector{0.0, 0.0});
  CHECK(clamp_tangent_norm(TangentAtOrigin{{0.3, 0.4}}, 1.0).space == Vector{0.3, 0.4});
  const Vector out = clamp_tangent_norm(TangentAtOrigin{{3.0, 4.0}}, 1.0).space;
  CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("exp_map_origin examples") {
  const Curvature c1 = Curvature::fixed(1.0);
  const LorentzPoint o = exp_of({0.0, 0.0}, c1);
  CHECK(o.space == Vector{0.0, 0.0});
  CHECK(o.time == 1.0);
  const LorentzPoint x = exp_of({1.0, 0.0}, c1);
  const oracle::LPoint ref = oracle::exp0({1.0, 0.0}, 1.0L);
  CHECK(std::abs(x.space[0] - static_cast<double>(ref.space[0])) <= 1e-14);
  CHECK(x.space[0] == doctest::Approx(1.1752012).epsilon(1e-7));
  CHECK(x.time == doctest::Approx(1.5430806).epsilon(1e-7));
  CHECK(hyperboloid_residual(exp_of({0.1, 0.0}, Curvature::fixed(80)), Curvature::fixed(80)) <= 1e-9);
  CHECK_THROWS(exp_of({NAN, 0.0}, c1));
}

TEST_CASE("exp map matches the long double oracle") {
  std::mt19937_64 rng(11);
  for (double c : {0.01, 1.0, 80.0, 1000.0}) {
    const Curvature curv = Curvature::fixed(c);
    for (int k = 0; k < 200; ++k) {
      const Vector v = oracle::random_tangent(rng, 5, max_tangent_norm(c));
      const LorentzPoint x = exp_of(v, curv);
      const oracle::LPoint ref = oracle::exp0(v, c);
      for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::abs(x.space[i] - static_cast<double>(ref.space[i])) <= 1e-12 * std::max(1.0L, std::abs(ref.time)));
      }
      CHECK(std::abs(x.time - static_cast<double>(ref.time)) <= 1e-12 * std::max(1.0L, ref.time));
    }
  }
}

TEST_CASE("exp at the largest admitted norm stays finite") {
  const Curvature c = Curvature::fixed(kCurvatureMax);
  const LorentzPoint x = exp_of({max_tangent_norm(c), 0.0, 0.0}, c);
  CHECK(std::isfinite(x.time));
  for (double s : x.space) CHECK(std::isfinite(s));
}

TEST_CASE("log_map_origin inverts exp") {
  const Curvature c1 = Curvature::fixed(1.0);
  CHECK(log_map_origin(origin(3, c1), c1).space == Vector{0.0, 0.0, 0.0});
  std::mt19937_64 rng(3);
  for (double c : {0.01, 1.0, 80.0, 1000.0}) {
    const Curvature curv = Curvature::fixed(c);
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
      const Vector v = oracle::random_tangent(rng, 4, max_tangent_norm(c));
      const Vector back = log_map_origin(exp_of(v, curv), curv).space;
      double err = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) err += (back[i] - v[i]) * (back[i] - v[i]);
      worst = std::max(worst, std::sqrt(err) / std::max(1.0, euclidean_norm(v)));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("exp(log(x)) reproduces points") {
  std::mt19937_64 rng(5);
  const Curvature c = Curvature::fixed(1.0);
  for (int k = 0; k < 200; ++k) {
    const LorentzPoint x = exp_of(oracle::random_tangent(rng, 3, 4.0), c);
    const LorentzPoint y = exp_of(log_map_origin(x, c).space, c);
    CHECK(hyperboloid_residual(y, c) <= 1e-9);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y.space[i] - x.space[i]) <= 1e-6 * std::max(1.0, std::abs(x.space[i])));
  }
}

TEST_CASE("project_tangent") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const Curvature c = Curvature::fixed(1.0);
  for (int k = 0; k < 200; ++k) {
    const LorentzPoint z = exp_of(oracle::random_tangent(rng, 3, 3.0), c);
    Vector u{g(rng), g(rng), g(rng), g(rng)};
    const Vector p = project_tangent(u, z, c);
    CHECK(std::abs(lorentz_inner(p, flatten(z))) <= 1e-9 * std::max(1.0, euclidean_norm(u)) * z.time * z.time);
    const Vector again = project_tangent(p, z, c);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(again[i] == doctest::Approx(p[i]).epsilon(1e-9));
  }
  const LorentzPoint z = exp_of({0.3, -0.2, 0.1}, c);
  const Vector out = project_tangent(flatten(z), z, c);
  CHECK(std::abs(lorentz_inner(out, flatten(z))) <= 1e-12);
}

TEST_CASE("poincare conversions") {
  const Curvature c = Curvature::fixed(2.0);
  const LorentzPoint o = poincare_to_lorentz(PoincarePoint{{0.0, 0.0}}, c);
  CHECK(o.space == Vector{0.0, 0.0});
  CHECK(lorentz_to_poincare(origin(2, c), c).coords == Vector{0.0, 0.0});
  CHECK_THROWS_AS(poincare_to_lorentz(PoincarePoint{{1.0 / std::sqrt(2.0), 0.0}}, c), DomainError);

  std::mt19937_64 rng(21);
  for (int k = 0; k < 1000; ++k) {
    const LorentzPoint x = exp_of(oracle::random_tangent(rng, 3, 3.0), c);
    const PoincarePoint b = lorentz_to_poincare(x, c);
    const LorentzPoint y = poincare_to_lorentz(b, c);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y.space[i] - x.space[i]) <= 1e-9 * std::max(1.0, x.time));
    const oracle::LVec ref = oracle::to_ball(oracle::exp0(log_map_origin(x, c).space, 2.0L), 2.0L);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(b.coords[i] - static_cast<double>(ref[i])) <= 1e-9);
  }
}

TEST_CASE("ball radius grows with distance along a ray") {
  const Curvature c = Curvature::fixed(1.0);
  const LorentzPoint o = origin(2, c);
  double last_r = -1.0;
  double last_d = -1.0;
  for (int k = 1; k <= 100; ++k) {
    const LorentzPoint x = exp_of({0.08 * k * 0.6, 0.08 * k * 0.8}, c);
    const double r = euclidean_norm(lorentz_to_poincare(x, c).coords);
    const double d = lorentz_distance(o, x, c);
    CHECK(r > last_r);
    CHECK(d > last_d);
    last_r = r;
    last_d = d;
  }
}

TEST_CASE("distance axioms") {
  std::mt19937_64 rng(1);
  for (double cv : {1.0, 80.0}) {
    const Curvature c = Curvature::fixed(cv);
    for (int k = 0; k < 1000; ++k) {
      const double r = max_tangent_norm(c) * 0.9;
      const LorentzPoint x = exp_of(oracle::random_tangent(rng, 3, r), c);
      const LorentzPoint y = exp_of(oracle::random_tangent(rng, 3, r), c);
      const LorentzPoint z = exp_of(oracle::random_tangent(rng, 3, r), c);
      const double dxy = lorentz_distance(x, y, c);
      CHECK(std::abs(dxy - lorentz_distance(y, x, c)) <= 1e-12);
      CHECK(lorentz_distance(x, z, c) <= dxy + lorentz_distance(y, z, c) + 1e-7);
      CHECK(lorentz_distance(x, x, c) <= 4.5e-4 / std::sqrt(cv));
    }
  }
}

TEST_CASE("distance is additive along rays") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double cv : {1.0, 80.0}) {
    const Curvature c = Curvature::fixed(cv);
    for (int k = 0; k < 200; ++k) {
      Vector dir = oracle::random_tangent(rng, 4, 1.0);
      const double n = euclidean_norm(dir);
      for (double& x : dir) x /= n;
      const double a = u(rng) * max_tangent_norm(c);
      const double b = u(rng) * max_tangent_norm(c);
      Vector va = dir;
      Vector vb = dir;
      for (double& x : va) x *= a;
      for (double& x : vb) x *= b;
      CHECK(std::abs(lorentz_distance(exp_of(va, c), exp_of(vb, c), c) - std::abs(a - b)) <= 1e-6);
    }
  }
}

TEST_CASE("curvature parameterisation") {
  CHECK(Curvature::fixed(80).value() == 80.0);
  CHECK(Curvature::learnable(80).value() == doctest::Approx(80.0).epsilon(1e-12));
  CHECK_THROWS_AS(Curvature::learnable(1e-6), ConfigError);
  CHECK(Curvature::from_raw(-50.0, true).value() == doctest::Approx(kCurvatureMin).epsilon(1e-12));
  Curvature c = Curvature::learnable(1.0);
  c.set_raw(1e9);
  CHECK(c.value() == kCurvatureMax);
  CHECK(softplus_inverse(softplus(0.7)) == doctest::Approx(0.7).epsilon(1e-12));
}
