#include <doctest.h>

#include <cmath>
#include <random>

#include "hsg/figures.hpp"

using namespace hsg;

namespace {

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

EmbeddingTable table(double c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  EmbeddingTable t;
  t.curvature = Curvature::fixed(c);
  for (int i = 0; i < 30; ++i) {
    Vector v(5);
    for (double& x : v) x = g(rng) * (i < 10 ? 0.3 : 1.5) / std::sqrt(c);
    t.entries.push_back({i, i < 10 ? EntityKind::Place : EntityKind::Object, 0, i, clamp_tangent_norm(TangentAtOrigin{v}, max_tangent_norm(c)).space, {}});
  }
  return t;
}

}  // namespace

TEST_CASE("hist csv shape") {
  const EmbeddingTable t = table(2.0, 1);
  const std::string csv = hist_csv(t);
  CHECK(csv.rfind("entity_id,kind,tangent_norm,lorentz_root_distance\n", 0) == 0);
  CHECK(lines(csv) == 1 + t.entries.size() + 2);
  CHECK(csv.find("\nmean,place,") != std::string::npos);
  CHECK(csv.find("\nmean,object,") != std::string::npos);
}

TEST_CASE("poincare points lie in the unit disk") {
  for (double c : {0.01, 1.0, 80.0}) {
    const EmbeddingTable t = table(c, 2);
    const std::vector<DiskPoint> pts = poincare_projection(t);
    CHECK(pts.size() == t.entries.size());
    for (const DiskPoint& p : pts) CHECK(p.u * p.u + p.v * p.v < 1.0);
    CHECK(lines(poincare_csv(t)) == 1 + t.entries.size());
    CHECK(poincare_csv(t) == poincare_csv(t));
  }
}

TEST_CASE("projection keeps the origin and radial order") {
  EmbeddingTable t = table(1.0, 3);
  t.entries[0].tangent.assign(5, 0.0);
  const std::vector<DiskPoint> pts = poincare_projection(t);
  CHECK(pts[0].u == 0.0);
  CHECK(pts[0].v == 0.0);

  // Points on a single ray project to the ray, with radius tanh(|v| / 2).
  EmbeddingTable ray;
  ray.curvature = Curvature::fixed(1.0);
  for (int i = 1; i <= 5; ++i) ray.entries.push_back({i, EntityKind::Object, 0, i, {0.0, 0.5 * i, 0.0}, {}});
  for (const DiskPoint& p : poincare_projection(ray)) {
    CHECK(std::hypot(p.u, p.v) == doctest::Approx(std::tanh(0.25 * p.id)).epsilon(1e-9));
  }
}

TEST_CASE("history csv") {
  std::vector<EpochStats> h{{1, 2.0, 1.5, 0.1, 5.5, 40.0, 0.001}, {2, 1.0, 1.0, 0.0, 2.0, 20.0, 0.002}};
  const std::string csv = history_csv(h);
  CHECK(csv.rfind("epoch,L_pr,L_obj,L_ent,total,curvature,lr\n", 0) == 0);
  CHECK(csv.find("\n1,2,1.5,0.1,5.5,40,0.001\n") != std::string::npos);
  CHECK(lines(csv) == 3);
}
