#include "hsg/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hsg/random.hpp"

namespace hsg {

namespace {

constexpr std::uint32_t kNoDistance = std::numeric_limits<std::uint32_t>::max();

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_ent >= 0.0) || !std::isfinite(lambda_ent)) throw ConfigError("lambda_ent must be >= 0");
  if (!(tau_place > 0.0) || !std::isfinite(tau_place)) throw ConfigError("tau_place must be > 0");
  if (!(tau_object > 0.0) || !std::isfinite(tau_object)) throw ConfigError("tau_object must be > 0");
}

void ContrastiveBatch::validate(std::size_t pool_size) const {
  if (anchors.empty()) throw Error("contrastive batch is empty");
  if (positives.size() != anchors.size()) throw DimensionError(positives.size(), anchors.size(), "contrastive positives");
  if (negatives.size() != anchors.size()) throw DimensionError(negatives.size(), anchors.size(), "contrastive negatives");
  for (std::size_t r = 0; r < anchors.size(); ++r) {
    if (negatives[r].empty()) throw Error("contrastive batch: anchor " + std::to_string(r) + " has no negatives");
    if (anchors[r] >= pool_size || positives[r] >= pool_size) throw Error("contrastive batch: index outside pool");
    for (std::size_t n : negatives[r]) {
      if (n >= pool_size) throw Error("contrastive batch: negative index outside pool");
    }
  }
}

LossGraph::LossGraph(const EmbeddingPool& pool, const Curvature& curv, Geometry geometry)
    : pool_(pool), curv_(curv), geometry_(geometry) {
  const std::size_t n = pool.size();
  tape_.reserve(64 * n * std::max<std::size_t>(pool.dim, 1), 256 * n * std::max<std::size_t>(pool.dim, 1));
  raw_.resize(n);
  first_leaf_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (pool.tangents[k].size() != pool.dim) throw DimensionError(pool.tangents[k].size(), pool.dim, "EmbeddingPool");
    raw_[k].reserve(pool.dim);
    for (double x : pool.tangents[k]) {
      if (!std::isfinite(x)) throw DomainError("EmbeddingPool: non-finite tangent component");
      raw_[k].push_back(tape_.variable(x));
    }
    first_leaf_[k] = raw_[k].empty() ? 0 : raw_[k].front().index();
  }
  if (curv.is_learnable()) {
    curvature_param_ = tape_.variable(curv.raw());
    c_ = ad::clamp(ad::softplus(curvature_param_), kCurvatureMin, kCurvatureMax);
  } else {
    curvature_param_ = tape_.constant(curv.value());
    c_ = curvature_param_;
  }
  sqrt_c_ = ad::sqrt(c_);
  r_max_ = kMaxScaledTangentNorm / sqrt_c_;
  points_.resize(n);
  mapped_.assign(n, false);
  distance_cache_.assign(n * n, kNoDistance);
}

const BasicLorentzPoint<ad::Var>& LossGraph::point(std::size_t k) {
  if (!mapped_[k]) {
    const auto clamped = detail::clamp_tangent_norm(raw_[k], r_max_);
    points_[k] = detail::exp_map_origin(clamped, c_, sqrt_c_);
    mapped_[k] = true;
  }
  return points_[k];
}

ad::Var LossGraph::distance(std::size_t i, std::size_t j) {
  const std::size_t n = pool_.size();
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  std::uint32_t& slot = distance_cache_[lo * n + hi];
  if (slot != kNoDistance) return {&tape_, slot};
  ad::Var d;
  if (geometry_ == Geometry::Euclidean) {
    d = ad::squared_distance(raw_[lo], raw_[hi]);
  } else {
    d = detail::lorentz_distance(point(lo), point(hi), c_, sqrt_c_);
  }
  slot = d.index();
  return d;
}

DifferentiableScalar LossGraph::finish(ad::Var loss) const {
  DifferentiableScalar out;
  out.value = loss.value();
  const std::vector<double> adjoint = tape_.backward(loss);
  const std::size_t n = pool_.size();
  out.partials.reserve(pool_.parameter_count(curv_));
  for (std::size_t k = 0; k < n; ++k) {
    for (const ad::Var& leaf : raw_[k]) out.partials.push_back(adjoint[leaf.index()]);
  }
  if (curv_.is_learnable()) out.partials.push_back(adjoint[curvature_param_.index()]);
  return out;
}

std::string LossGraph::parameter_name(std::size_t index) const {
  const std::size_t tangents = pool_.dim * pool_.size();
  if (index < tangents) {
    return "tangent[" + std::to_string(index / pool_.dim) + "][" + std::to_string(index % pool_.dim) + "]";
  }
  return "curvature";
}

ad::Var info_nce_term(LossGraph& graph, const ContrastiveBatch& batch, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("info_nce: temperature must be positive");
  std::vector<ad::Var> rows;
  rows.reserve(batch.rows());
  std::vector<ad::Var> logits;
  const double inv_tau = 1.0 / tau;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const ad::Var positive = graph.distance(batch.anchors[r], batch.positives[r]) * inv_tau;
    logits.clear();
    logits.push_back(-positive);
    for (std::size_t n : batch.negatives[r]) logits.push_back(graph.distance(batch.anchors[r], n) * -inv_tau);
    // -log softmax_0 = d+/tau + logsumexp(-d/tau)
    rows.push_back(positive + ad::logsumexp(logits));
  }
  std::vector<double> weights(rows.size(), 1.0 / static_cast<double>(rows.size()));
  return ad::weighted_sum(rows, weights);
}

EntailmentTerm entailment_term(LossGraph& graph, std::span<const PlaceObjectPair> pairs,
                               const ConeParams& cone) {
  cone.validate();
  if (graph.geometry() != Geometry::Lorentz) throw ConfigError("entailment loss requires the Lorentz geometry");
  if (pairs.empty()) throw Error("entailment_batch_loss: no place-object pairs");
  EntailmentTerm term;
  std::vector<ad::Var> losses;
  losses.reserve(pairs.size());
  for (const PlaceObjectPair& pair : pairs) {
    const auto& q = graph.point(pair.place);
    if (detail::space_norm(q).value() < kRootSpaceNorm) {
      ++term.skipped;
      continue;
    }
    const auto& p = graph.point(pair.object);
    const ad::Var phi = detail::exterior_angle(p, q, graph.curvature());
    const ad::Var omega = detail::half_aperture(q, graph.sqrt_curvature(), cone.K);
    losses.push_back(ad::max(phi - omega * cone.eta, 0.0));
  }
  if (losses.empty()) throw DomainError("entailment_batch_loss: every pair has its place at the root");
  term.used = losses.size();
  std::vector<double> weights(losses.size(), 1.0 / static_cast<double>(losses.size()));
  term.value = ad::weighted_sum(losses, weights);
  return term;
}

DifferentiableScalar info_nce(const EmbeddingPool& pool, const ContrastiveBatch& batch,
                              const Curvature& curv, double tau, Geometry geometry) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("info_nce: temperature must be positive");
  batch.validate(pool.size());
  LossGraph graph(pool, curv, geometry);
  return graph.finish(info_nce_term(graph, batch, tau));
}

DifferentiableScalar entailment_batch_loss(const EmbeddingPool& pool,
                                           std::span<const PlaceObjectPair> pairs,
                                           const Curvature& curv, const ConeParams& cone) {
  for (const auto& pair : pairs) {
    if (pair.place >= pool.size() || pair.object >= pool.size()) throw Error("entailment pair outside pool");
  }
  LossGraph graph(pool, curv, Geometry::Lorentz);
  return graph.finish(entailment_term(graph, pairs, cone).value);
}

TotalLoss total_loss(const EmbeddingPool& pool, const ContrastiveBatch& place_batch,
                     const ContrastiveBatch& object_batch, std::span<const PlaceObjectPair> pairs,
                     const Curvature& curv, const LossWeights& weights, const ConeParams& cone,
                     Geometry geometry) {
  weights.validate();
  place_batch.validate(pool.size());
  object_batch.validate(pool.size());
  const bool with_entailment = weights.lambda_ent > 0.0 && !pairs.empty();
  if (with_entailment && geometry == Geometry::Euclidean) {
    throw ConfigError("entailment loss requires the Lorentz geometry");
  }
  LossGraph graph(pool, curv, geometry);
  const ad::Var place = info_nce_term(graph, place_batch, weights.tau_place);
  const ad::Var object = info_nce_term(graph, object_batch, weights.tau_object);
  TotalLoss out;
  out.place = place.value();
  out.object = object.value();
  ad::Var total = place + object;
  if (with_entailment) {
    const EntailmentTerm ent = entailment_term(graph, pairs, cone);
    out.entailment = ent.value.value();
    out.skipped_pairs = ent.skipped;
    total = total + ent.value * weights.lambda_ent;
  }
  out.total = graph.finish(total);
  return out;
}

std::vector<double> pack_parameters(const EmbeddingPool& pool, const Curvature& curv) {
  std::vector<double> params;
  params.reserve(pool.parameter_count(curv));
  for (const Vector& t : pool.tangents) params.insert(params.end(), t.begin(), t.end());
  if (curv.is_learnable()) params.push_back(curv.raw());
  return params;
}

void unpack_parameters(std::span<const double> params, EmbeddingPool& pool, Curvature& curv) {
  if (params.size() != pool.parameter_count(curv)) {
    throw DimensionError(params.size(), pool.parameter_count(curv), "unpack_parameters");
  }
  std::size_t at = 0;
  for (Vector& t : pool.tangents) {
    for (double& x : t) x = params[at++];
  }
  if (curv.is_learnable()) curv = Curvature::from_raw(params[at], true);
}

GradientCheckReport check_gradients(const NamedObjective& objective, std::span<const double> params,
                                    std::uint64_t seed, std::size_t max_coordinates) {
  GradientCheckReport report;
  report.objective = objective.name;
  std::vector<double> theta(params.begin(), params.end());
  const DifferentiableScalar analytic = objective.evaluate(theta);
  if (analytic.partials.size() != theta.size()) {
    throw DimensionError(analytic.partials.size(), theta.size(), "check_gradients partials");
  }
  auto name_of = [&](std::size_t i) {
    return objective.parameter_name ? objective.parameter_name(i) : "param[" + std::to_string(i) + "]";
  };

  std::vector<std::size_t> coords(theta.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (max_coordinates > 0 && max_coordinates < coords.size()) {
    Rng rng(seed);
    rng.shuffle(coords);
    coords.resize(max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  for (std::size_t i : coords) {
    if (!std::isfinite(analytic.partials[i])) {
      report.finite = false;
      report.failure = "non-finite analytic gradient for " + name_of(i);
      report.worst_index = i;
      report.worst_parameter = name_of(i);
      return report;
    }
    const double saved = theta[i];
    const double h = 1e-5 * std::max(1.0, std::abs(saved));
    theta[i] = saved + h;
    const double up = objective.evaluate(theta).value;
    theta[i] = saved - h;
    const double down = objective.evaluate(theta).value;
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    if (!std::isfinite(numeric)) {
      report.finite = false;
      report.failure = "non-finite numeric gradient for " + name_of(i);
      report.worst_index = i;
      report.worst_parameter = name_of(i);
      return report;
    }
    const double err = std::abs(analytic.partials[i] - numeric) / std::max(1e-8, std::abs(numeric));
    ++report.checked;
    if (report.checked == 1 || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_index = i;
      report.worst_parameter = name_of(i);
    }
  }
  return report;
}

}  // namespace hsg
