#include "hsg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "hsg/random.hpp"

namespace hsg {

namespace {

constexpr std::uint64_t kInitStream = 0x1417ULL;
constexpr std::uint64_t kBatchStream = 0xBA7C4ULL;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

int total_frames(const SyntheticConfig& config) {
  return config.num_scenes * config.places_per_scene * config.views_per_place;
}

Curvature initial_curvature(const TrainConfig& config) {
  if (config.curvature_learnable && !config.euclidean_ablation) return Curvature::learnable(config.curv_init);
  return Curvature::fixed(config.curv_init);
}

// init_std times a semi-orthogonal matrix (orthonormal rows or columns,
// whichever is shorter), from the QR factors of a Gaussian draw.
Projector init_projector(int in_dim, const TrainConfig& config) {
  Rng rng(derive_seed(config.seed, kInitStream));
  const int out_dim = config.embed_dim;
  auto head = [&] {
    const int tall = std::max(in_dim, out_dim);
    const int wide = std::min(in_dim, out_dim);
    Eigen::MatrixXd g(tall, wide);
    for (int j = 0; j < wide; ++j) {
      for (int i = 0; i < tall; ++i) g(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(wide).triangularView<Eigen::Upper>();
    for (int j = 0; j < wide; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    const Eigen::MatrixXd w = out_dim <= in_dim ? Eigen::MatrixXd(q.transpose()) : q;  // out_dim x in_dim
    LinearMap m;
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.weights.resize(static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim));
    for (int i = 0; i < out_dim; ++i) {
      for (int k = 0; k < in_dim; ++k) {
        m.weights[static_cast<std::size_t>(i) * static_cast<std::size_t>(in_dim) + static_cast<std::size_t>(k)] =
            config.init_std * w(i, k);
      }
    }
    return m;
  };
  Projector p;
  p.place = head();
  p.object = head();
  return p;
}

}  // namespace

void TrainConfig::validate() const {
  if (embed_dim < 1) throw ConfigError("train: embed_dim must be >= 1");
  if (projector_dim != embed_dim) throw ConfigError("train: projector_dim must equal embed_dim");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ConfigError("train: weight_decay must be >= 0");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs) throw ConfigError("train: warmup_epochs must be in [0, epochs]");
  if (steps_per_epoch < 1) throw ConfigError("train: steps_per_epoch must be >= 1");
  if (scenes_per_batch < 1) throw ConfigError("train: scenes_per_batch must be >= 1");
  if (!(init_std > 0.0) || !std::isfinite(init_std)) throw ConfigError("train: init_std must be > 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train: train_fraction must be in (0, 1)");
  if (!(curv_lr >= 0.0) || !std::isfinite(curv_lr)) throw ConfigError("train: curv_lr must be >= 0");
  if (!(curv_init >= kCurvatureMin && curv_init <= kCurvatureMax)) {
    throw ConfigError("train: curv_init must be in [1e-3, 1e4]");
  }
  weights.validate();
  cone.validate();
}

int place_entity_id(const View& view) { return view.view; }

int object_entity_id(const Observation& obs, const SyntheticConfig& config) {
  return total_frames(config) + obs.id;
}

LorentzPoint EmbeddingTable::point(std::size_t i) const {
  return exp_map_origin(TangentAtOrigin{entries.at(i).tangent}, curvature);
}

double EmbeddingTable::distance(std::size_t i, std::size_t j) const {
  if (geometry == Geometry::Euclidean) {
    return std::sqrt(detail::squared_distance(entries.at(i).tangent, entries.at(j).tangent));
  }
  return lorentz_distance(point(i), point(j), curvature);
}

double EmbeddingTable::similarity(std::size_t i, std::size_t j) const { return std::exp(-distance(i, j)); }

Vector LinearMap::apply(std::span<const double> feature) const {
  if (feature.size() != static_cast<std::size_t>(in_dim)) {
    throw DimensionError(feature.size(), static_cast<std::size_t>(in_dim), "LinearMap::apply");
  }
  Vector out(static_cast<std::size_t>(out_dim), 0.0);
  for (int r = 0; r < out_dim; ++r) {
    const double* row = weights.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(in_dim);
    double acc = 0.0;
    for (int k = 0; k < in_dim; ++k) acc += row[k] * feature[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

TrainingDiverged::TrainingDiverged(int step_, double curvature_, double max_tangent_norm_)
    : Error([&] {
        std::ostringstream os;
        os << "training diverged at step " << step_ << " (curvature " << curvature_ << ", max tangent norm "
           << max_tangent_norm_ << ")";
        return os.str();
      }()),
      step(step_),
      curvature(curvature_),
      max_tangent_norm(max_tangent_norm_) {}

double lr_schedule(int step, int total_steps, int warmup_steps, double base_lr) {
  if (step <= 0) return 0.0;
  if (step >= total_steps) return 0.0;
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

Trainer::Trainer(const SyntheticDataset& data, TrainConfig config)
    : data_(data), config_(std::move(config)), curvature_(initial_curvature(config_)) {
  config_.validate();
  if (data_.views.empty()) throw PreconditionError("train: dataset has no views");
  projector_ = init_projector(data_.config.feature_dim, config_);
  scenes_ = data_.scene_ids();
  std::unordered_map<int, std::size_t> slot;
  for (std::size_t s = 0; s < scenes_.size(); ++s) slot[scenes_[s]] = s;
  scene_views_.resize(scenes_.size());
  scene_observations_.resize(scenes_.size());
  for (std::size_t i = 0; i < data_.views.size(); ++i) scene_views_[slot.at(data_.views[i].scene)].push_back(i);
  for (std::size_t i = 0; i < data_.observations.size(); ++i) {
    scene_observations_[slot.at(data_.observations[i].scene)].push_back(i);
  }
}

StepBatch Trainer::sample_batch(int step) const {
  Rng rng(derive_seed(derive_seed(config_.seed, kBatchStream), static_cast<std::uint64_t>(step)));
  std::vector<std::size_t> order(scenes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  order.resize(std::min(order.size(), static_cast<std::size_t>(config_.scenes_per_batch)));
  std::sort(order.begin(), order.end());

  StepBatch batch;
  batch.place.kind = PairKind::Place;
  batch.object.kind = PairKind::Object;

  // Views first; remember pool slot per frame id and place label per slot.
  std::vector<int> place_of;
  std::unordered_map<int, std::size_t> slot_of_frame;
  for (std::size_t s : order) {
    for (std::size_t vi : scene_views_[s]) {
      const View& v = data_.views[vi];
      slot_of_frame[v.view] = batch.features.size();
      place_of.push_back(v.place);
      batch.features.push_back(&v.feature);
    }
  }
  const std::size_t n_views = batch.features.size();
  batch.place_count = n_views;
  for (std::size_t a = 0; a < n_views; ++a) {
    std::vector<std::size_t> negatives;
    for (std::size_t j = 0; j < n_views; ++j) {
      if (place_of[j] != place_of[a]) negatives.push_back(j);
    }
    if (negatives.empty()) continue;
    for (std::size_t p = 0; p < n_views; ++p) {
      if (p == a || place_of[p] != place_of[a]) continue;
      batch.place.anchors.push_back(a);
      batch.place.positives.push_back(p);
      batch.place.negatives.push_back(negatives);
    }
  }

  // Two observations (distinct views) per object.
  std::vector<int> object_of;
  std::vector<std::pair<std::size_t, std::size_t>> sampled;
  for (std::size_t s : order) {
    std::vector<int> ids;
    std::unordered_map<int, std::vector<std::size_t>> by_object;
    for (std::size_t oi : scene_observations_[s]) {
      const Observation& o = data_.observations[oi];
      if (!by_object.count(o.object)) ids.push_back(o.object);
      by_object[o.object].push_back(oi);
    }
    for (int id : ids) {
      const auto& obs = by_object[id];
      if (obs.size() < 2) continue;
      const std::size_t i = rng.below(obs.size());
      std::size_t j = rng.below(obs.size() - 1);
      if (j >= i) ++j;
      std::pair<std::size_t, std::size_t> slots;
      for (std::size_t oi : {obs[i], obs[j]}) {
        const Observation& o = data_.observations[oi];
        const std::size_t slot = batch.features.size();
        batch.features.push_back(&o.feature);
        object_of.push_back(o.object);
        batch.pairs.push_back({slot_of_frame.at(o.view), slot});
        (oi == obs[i] ? slots.first : slots.second) = slot;
      }
      sampled.push_back(slots);
    }
  }
  for (const auto& [x, y] : sampled) {
    for (auto [a, p] : {std::pair{x, y}, std::pair{y, x}}) {
      std::vector<std::size_t> negatives;
      for (std::size_t k = n_views; k < batch.features.size(); ++k) {
        if (object_of[k - n_views] != object_of[a - n_views]) negatives.push_back(k);
      }
      if (negatives.empty()) continue;
      batch.object.anchors.push_back(a);
      batch.object.positives.push_back(p);
      batch.object.negatives.push_back(std::move(negatives));
    }
  }
  return batch;
}

std::vector<double> Trainer::parameters() const {
  std::vector<double> params = projector_.place.weights;
  params.insert(params.end(), projector_.object.weights.begin(), projector_.object.weights.end());
  if (curvature_.is_learnable()) params.push_back(curvature_.raw());
  return params;
}

Curvature Trainer::curvature_for(std::span<const double> params) const {
  if (!curvature_.is_learnable()) return curvature_;
  return Curvature::from_raw(params[projector_.parameter_count()], true);
}

std::string Trainer::parameter_name(std::size_t index) const {
  const std::size_t n_place = projector_.place.weights.size();
  const auto in = static_cast<std::size_t>(projector_.place.in_dim);
  if (index < n_place) return "W_place[" + std::to_string(index / in) + "," + std::to_string(index % in) + "]";
  index -= n_place;
  if (index < projector_.object.weights.size()) {
    return "W_object[" + std::to_string(index / in) + "," + std::to_string(index % in) + "]";
  }
  return "curvature.raw";
}

TotalLoss Trainer::loss(const StepBatch& batch, std::span<const double> params) const {
  const std::size_t n_place = projector_.place.weights.size();
  const std::size_t n_weights = projector_.parameter_count();
  const std::size_t expected = n_weights + (curvature_.is_learnable() ? 1 : 0);
  if (params.size() != expected) throw DimensionError(params.size(), expected, "Trainer::loss");
  Projector proj = projector_;
  proj.place.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(n_place));
  proj.object.weights.assign(params.begin() + static_cast<std::ptrdiff_t>(n_place),
                             params.begin() + static_cast<std::ptrdiff_t>(n_weights));
  const Curvature curv = curvature_for(params);

  EmbeddingPool pool;
  pool.dim = static_cast<std::size_t>(config_.embed_dim);
  pool.tangents.reserve(batch.features.size());
  for (std::size_t k = 0; k < batch.features.size(); ++k) {
    pool.tangents.push_back(
        proj.apply(*batch.features[k], k < batch.place_count ? EntityKind::Place : EntityKind::Object));
  }

  std::span<const PlaceObjectPair> pairs;
  if (config_.uses_entailment()) pairs = batch.pairs;
  TotalLoss result = total_loss(pool, batch.place, batch.object, pairs, curv, config_.weights, config_.cone,
                                config_.geometry());

  // Chain rule through the linear heads: dL/dW = sum_k dL/dv_k f_k^T.
  const std::vector<double>& pool_grad = result.total.partials;
  std::vector<double> grad(params.size(), 0.0);
  const auto in = static_cast<std::size_t>(proj.place.in_dim);
  for (std::size_t k = 0; k < batch.features.size(); ++k) {
    const Vector& f = *batch.features[k];
    double* head = grad.data() + (k < batch.place_count ? 0 : n_place);
    for (std::size_t r = 0; r < pool.dim; ++r) {
      const double g = pool_grad[k * pool.dim + r];
      if (g == 0.0) continue;
      double* row = head + r * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += g * f[i];
    }
  }
  if (curv.is_learnable()) grad.back() = pool_grad.back();
  result.total.partials = std::move(grad);
  return result;
}

TrainResult Trainer::run() {
  const int total = config_.total_steps();
  const int warmup = config_.warmup_epochs * config_.steps_per_epoch;
  std::vector<double> params = parameters();
  std::vector<double> m(params.size(), 0.0);
  std::vector<double> v(params.size(), 0.0);
  const std::size_t n_place = projector_.place.weights.size();
  const std::size_t n_weights = projector_.parameter_count();
  // The curvature follows the same schedule, rescaled to its own base rate.
  const double curv_scale = config_.curv_lr / config_.lr;

  TrainResult result;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch + 1;
    for (int s = 0; s < config_.steps_per_epoch; ++s) {
      const int step = epoch * config_.steps_per_epoch + s;
      const StepBatch batch = sample_batch(step);
      const TotalLoss l = loss(batch, params);
      bool finite = std::isfinite(l.total.value);
      for (double g : l.total.partials) finite = finite && std::isfinite(g);
      if (!finite) {
        double max_norm = 0.0;
        for (std::size_t k = 0; k < batch.features.size(); ++k) {
          const EntityKind kind = k < batch.place_count ? EntityKind::Place : EntityKind::Object;
          max_norm = std::max(max_norm, euclidean_norm(projector_.apply(*batch.features[k], kind)));
        }
        throw TrainingDiverged(step, curvature_.value(), max_norm);
      }

      const double lr = lr_schedule(step + 1, total, warmup, config_.lr);
      const double t = static_cast<double>(step + 1);
      const double bc1 = 1.0 - std::pow(kBeta1, t);
      const double bc2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = l.total.partials[i];
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
        // Decoupled decay applies to projector weights only.
        if (i < n_weights) params[i] -= lr * config_.weight_decay * params[i];
        const double rate = i < n_weights ? lr : lr * curv_scale;
        params[i] -= rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
      }
      projector_.place.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(n_place));
      projector_.object.weights.assign(params.begin() + static_cast<std::ptrdiff_t>(n_place),
                                       params.begin() + static_cast<std::ptrdiff_t>(n_weights));
      if (curvature_.is_learnable()) {
        curvature_.set_raw(params.back());
        params.back() = curvature_.raw();
      }

      stats.place_loss += l.place;
      stats.object_loss += l.object;
      stats.entailment_loss += l.entailment;
      stats.total += l.total.value;
      stats.lr = lr;
    }
    const double n = static_cast<double>(config_.steps_per_epoch);
    stats.place_loss /= n;
    stats.object_loss /= n;
    stats.entailment_loss /= n;
    stats.total /= n;
    stats.curvature = curvature_.value();
    result.history.push_back(stats);
  }
  result.projector = projector_;
  result.curvature = curvature_;
  result.geometry = config_.geometry();
  result.table = embed(data_, projector_, curvature_, config_.geometry());
  return result;
}

TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config) {
  Trainer trainer(dataset, config);
  return trainer.run();
}

EmbeddingTable embed(const SyntheticDataset& dataset, const Projector& projector, const Curvature& curvature,
                     Geometry geometry) {
  EmbeddingTable table;
  table.curvature = curvature;
  table.geometry = geometry;
  const double r_max = max_tangent_norm(curvature);
  auto tangent = [&](const Vector& feature, EntityKind kind) {
    TangentAtOrigin t{projector.apply(feature, kind)};
    if (geometry == Geometry::Lorentz) t = clamp_tangent_norm(t, r_max);
    return t.space;
  };
  for (const View& v : dataset.views) {
    table.entries.push_back({place_entity_id(v), EntityKind::Place, v.scene, v.view, tangent(v.feature, EntityKind::Place), std::nullopt});
  }
  for (const Observation& o : dataset.observations) {
    table.entries.push_back(
        {object_entity_id(o, dataset.config), EntityKind::Object, o.scene, o.view, tangent(o.feature, EntityKind::Object), o.box});
  }
  return table;
}

double RootDistances::mean_tangent_norm(const std::vector<RootDistance>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : xs) s += x.tangent_norm;
  return s / static_cast<double>(xs.size());
}

double RootDistances::mean_root_distance(const std::vector<RootDistance>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : xs) s += x.root_distance;
  return s / static_cast<double>(xs.size());
}

RootDistances embed_root_distances(const EmbeddingTable& table) {
  if (table.entries.empty()) throw PreconditionError("embed_root_distances: empty table");
  RootDistances out;
  const std::size_t dim = table.dim();
  Vector centre(dim, 0.0);
  if (table.geometry == Geometry::Euclidean) {
    for (const auto& e : table.entries) {
      for (std::size_t i = 0; i < dim; ++i) centre[i] += e.tangent[i];
    }
    for (double& x : centre) x /= static_cast<double>(table.entries.size());
  }
  const LorentzPoint root = origin(dim, table.curvature);
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const EmbeddingEntry& e = table.entries[k];
    RootDistance r;
    r.id = e.id;
    if (table.geometry == Geometry::Euclidean) {
      r.tangent_norm = euclidean_norm(e.tangent);
      r.root_distance = std::sqrt(detail::squared_distance(e.tangent, centre));
    } else {
      r.tangent_norm = euclidean_norm(e.tangent);
      const double d = lorentz_distance(root, table.point(k), table.curvature);
      // The arcosh floor makes d(o, o) a tiny positive number.
      r.root_distance = r.tangent_norm == 0.0 ? 0.0 : d;
    }
    (e.kind == EntityKind::Place ? out.place : out.object).push_back(r);
  }
  return out;
}

}  // namespace hsg
