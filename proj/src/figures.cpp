#include "hsg/figures.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <Eigen/Dense>

namespace hsg {

namespace {

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

const char* kind_name(EntityKind k) { return k == EntityKind::Place ? "place" : "object"; }

}  // namespace

std::vector<DiskPoint> poincare_projection(const EmbeddingTable& table) {
  const std::size_t n = table.entries.size();
  const std::size_t dim = table.dim();
  const double sqrt_c = table.curvature.sqrt_value();
  Eigen::MatrixXd balls(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    // Euclidean tables are unclamped; clamping keeps the lift finite.
    const TangentAtOrigin v = clamp_tangent_norm(TangentAtOrigin{table.entries[i].tangent}, max_tangent_norm(table.curvature));
    const PoincarePoint b = lorentz_to_poincare(exp_map_origin(v, table.curvature), table.curvature);
    for (std::size_t k = 0; k < dim; ++k) balls(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = b.coords[k];
  }

  Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), 2);
  if (n > 0 && dim > 0) {
    const Eigen::MatrixXd moment = balls.transpose() * balls;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment);
    // Eigenvalues ascend; take the last two.
    const Eigen::Index cols = std::min<Eigen::Index>(2, static_cast<Eigen::Index>(dim));
    for (Eigen::Index a = 0; a < cols; ++a) {
      Eigen::VectorXd e = eig.eigenvectors().col(static_cast<Eigen::Index>(dim) - 1 - a);
      Eigen::Index big = 0;
      e.cwiseAbs().maxCoeff(&big);
      if (e(big) < 0.0) e = -e;
      axes.col(a) = e;
    }
  }

  std::vector<DiskPoint> out;
  out.reserve(n);
  const Eigen::MatrixXd uv = balls * axes * sqrt_c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.push_back({table.entries[i].id, table.entries[i].kind, uv(r, 0), uv(r, 1)});
  }
  return out;
}

std::string hist_csv(const EmbeddingTable& table) {
  const RootDistances rd = embed_root_distances(table);
  std::string out = "entity_id,kind,tangent_norm,lorentz_root_distance\n";
  // Rows follow table order; the per-kind lists keep it within a kind.
  std::size_t pi = 0;
  std::size_t oi = 0;
  for (const EmbeddingEntry& e : table.entries) {
    const RootDistance& r = e.kind == EntityKind::Place ? rd.place[pi++] : rd.object[oi++];
    out += std::to_string(r.id) + "," + kind_name(e.kind) + "," + num(r.tangent_norm) + "," + num(r.root_distance) + "\n";
  }
  out += "mean,place," + num(RootDistances::mean_tangent_norm(rd.place)) + "," +
         num(RootDistances::mean_root_distance(rd.place)) + "\n";
  out += "mean,object," + num(RootDistances::mean_tangent_norm(rd.object)) + "," +
         num(RootDistances::mean_root_distance(rd.object)) + "\n";
  return out;
}

std::string poincare_csv(const EmbeddingTable& table) {
  std::string out = "entity_id,kind,u,v\n";
  for (const DiskPoint& p : poincare_projection(table)) {
    out += std::to_string(p.id) + "," + kind_name(p.kind) + "," + num(p.u) + "," + num(p.v) + "\n";
  }
  return out;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,L_pr,L_obj,L_ent,total,curvature,lr\n";
  for (const EpochStats& s : history) {
    out += std::to_string(s.epoch) + "," + num(s.place_loss) + "," + num(s.object_loss) + "," + num(s.entailment_loss) +
           "," + num(s.total) + "," + num(s.curvature) + "," + num(s.lr) + "\n";
  }
  return out;
}

}  // namespace hsg
