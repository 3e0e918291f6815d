#pragma once

// Training objective: hyperbolic InfoNCE for place and object supervision,
// the batch entailment-cone loss and their weighted total. All losses are
// recorded on a reverse-mode tape and returned with their gradient.
//
// Parameter layout of every DifferentiableScalar produced here: the pool
// tangents row-major (entry k, component i at k * dim + i) followed by the
// raw curvature parameter when the curvature is learnable.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsg/autodiff.hpp"
#include "hsg/entailment.hpp"
#include "hsg/manifold.hpp"

namespace hsg {

enum class Geometry { Lorentz, Euclidean };
enum class PairKind { Place, Object };

struct LossWeights {
  double lambda_ent = 20.0;
  double tau_place = 0.1;
  double tau_object = 0.1;

  void validate() const;
};

struct DifferentiableScalar {
  double value = 0.0;
  std::vector<double> partials;
};

// Raw (pre-clamp) tangent vectors at the origin, all of one dimension.
struct EmbeddingPool {
  std::size_t dim = 0;
  std::vector<Vector> tangents;

  std::size_t size() const { return tangents.size(); }
  std::size_t parameter_count(const Curvature& curv) const {
    return dim * tangents.size() + (curv.is_learnable() ? 1 : 0);
  }
};

// Indices into an EmbeddingPool. Row r contrasts anchors[r] with
// positives[r] against negatives[r].
struct ContrastiveBatch {
  PairKind kind = PairKind::Place;
  std::vector<std::size_t> anchors;
  std::vector<std::size_t> positives;
  std::vector<std::vector<std::size_t>> negatives;

  std::size_t rows() const { return anchors.size(); }
  void validate(std::size_t pool_size) const;
};

// Ground-truth containment: the object was observed at the place.
struct PlaceObjectPair {
  std::size_t place = 0;
  std::size_t object = 0;
};

// Tape-backed evaluation context shared by all loss terms of one batch, so
// exp maps and pairwise distances are recorded once.
class LossGraph {
 public:
  LossGraph(const EmbeddingPool& pool, const Curvature& curv, Geometry geometry);
  LossGraph(const LossGraph&) = delete;
  LossGraph& operator=(const LossGraph&) = delete;

  ad::Tape& tape() { return tape_; }
  Geometry geometry() const { return geometry_; }
  ad::Var curvature() const { return c_; }
  ad::Var sqrt_curvature() const { return sqrt_c_; }

  // clamp + exp map of pool entry k (memoised).
  const BasicLorentzPoint<ad::Var>& point(std::size_t k);
  // Lorentz distance, or squared Euclidean distance of the raw tangents
  // under Geometry::Euclidean (memoised, symmetric).
  ad::Var distance(std::size_t i, std::size_t j);

  DifferentiableScalar finish(ad::Var loss) const;
  std::string parameter_name(std::size_t index) const;

 private:
  const EmbeddingPool& pool_;
  Curvature curv_;
  Geometry geometry_;
  ad::Tape tape_;
  ad::Var curvature_param_;
  ad::Var c_;
  ad::Var sqrt_c_;
  ad::Var r_max_;
  std::vector<std::vector<ad::Var>> raw_;
  std::vector<std::uint32_t> first_leaf_;
  std::vector<BasicLorentzPoint<ad::Var>> points_;
  std::vector<bool> mapped_;
  std::vector<std::uint32_t> distance_cache_;
};

ad::Var info_nce_term(LossGraph& graph, const ContrastiveBatch& batch, double tau);

struct EntailmentTerm {
  ad::Var value;
  std::size_t used = 0;
  std::size_t skipped = 0;
};
EntailmentTerm entailment_term(LossGraph& graph, std::span<const PlaceObjectPair> pairs,
                               const ConeParams& cone);

DifferentiableScalar info_nce(const EmbeddingPool& pool, const ContrastiveBatch& batch,
                              const Curvature& curv, double tau,
                              Geometry geometry = Geometry::Lorentz);

DifferentiableScalar entailment_batch_loss(const EmbeddingPool& pool,
                                           std::span<const PlaceObjectPair> pairs,
                                           const Curvature& curv, const ConeParams& cone);

struct TotalLoss {
  DifferentiableScalar total;
  double place = 0.0;
  double object = 0.0;
  double entailment = 0.0;
  std::size_t skipped_pairs = 0;
};

// L_pr + L_obj + lambda L_ent. An empty pair list, or lambda = 0, drops the
// entailment term; the Euclidean geometry requires one of the two.
TotalLoss total_loss(const EmbeddingPool& pool, const ContrastiveBatch& place_batch,
                     const ContrastiveBatch& object_batch, std::span<const PlaceObjectPair> pairs,
                     const Curvature& curv, const LossWeights& weights, const ConeParams& cone,
                     Geometry geometry = Geometry::Lorentz);

std::vector<double> pack_parameters(const EmbeddingPool& pool, const Curvature& curv);
void unpack_parameters(std::span<const double> params, EmbeddingPool& pool, Curvature& curv);

// Gradient verification by central finite differences.

struct NamedObjective {
  std::string name;
  std::function<DifferentiableScalar(std::span<const double>)> evaluate;
  std::function<std::string(std::size_t)> parameter_name;
};

struct GradientCheckReport {
  std::string objective;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::string worst_parameter;
  std::size_t checked = 0;
  bool finite = true;
  std::string failure;

  bool passed(double tolerance) const { return finite && max_rel_error <= tolerance; }
};

// Step h = 1e-5 max(1, |theta_i|); error |analytic - numeric| / max(1e-8, |numeric|).
// When max_coordinates > 0 and smaller than the parameter count, that many
// coordinates are drawn without replacement using seed.
GradientCheckReport check_gradients(const NamedObjective& objective, std::span<const double> params,
                                    std::uint64_t seed, std::size_t max_coordinates = 0);

}  // namespace hsg
