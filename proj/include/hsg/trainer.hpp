#pragma once

// Desk-scale trainer: linear heads map per-view features to tangent
// vectors at the origin, which are lifted to the hyperboloid and trained
// with the place/object InfoNCE and entailment objective using AdamW.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsg/objective.hpp"
#include "hsg/synth.hpp"

namespace hsg {

struct TrainConfig {
  int embed_dim = 32;
  int projector_dim = 32;  // width of the projector head; equals embed_dim
  double lr = 3e-3;        // 2e-6 in the full-scale setting
  double weight_decay = 0.01;
  int epochs = 20;
  int warmup_epochs = 3;
  int steps_per_epoch = 80;
  int scenes_per_batch = 2;
  double init_std = 1.2;  // gain of the semi-orthogonal projector initialisation
  double train_fraction = 0.8;
  double curv_init = 80.0;
  double curv_lr = 30.0;  // base learning rate of the raw curvature parameter
  LossWeights weights;
  ConeParams cone;
  std::uint64_t seed = 7;
  bool euclidean_ablation = false;
  bool entailment_enabled = true;
  bool curvature_learnable = true;

  void validate() const;
  Geometry geometry() const { return euclidean_ablation ? Geometry::Euclidean : Geometry::Lorentz; }
  bool uses_entailment() const { return entailment_enabled && !euclidean_ablation && weights.lambda_ent > 0.0; }
  int total_steps() const { return epochs * steps_per_epoch; }
};

enum class EntityKind { Place, Object };

struct EmbeddingEntry {
  int id = 0;
  EntityKind kind = EntityKind::Place;
  int scene = 0;
  int view = 0;
  Vector tangent;
  std::optional<BoundingBox> box;  // objects only
  friend bool operator==(const EmbeddingEntry&, const EmbeddingEntry&) = default;
};

struct EmbeddingTable {
  std::vector<EmbeddingEntry> entries;
  Curvature curvature = Curvature::fixed(1.0);
  Geometry geometry = Geometry::Lorentz;

  std::size_t dim() const { return entries.empty() ? 0 : entries.front().tangent.size(); }
  // Point on the hyperboloid for a Lorentz table.
  LorentzPoint point(std::size_t i) const;
  // exp(-distance); Lorentz distance, or Euclidean distance of tangents.
  double similarity(std::size_t i, std::size_t j) const;
  double distance(std::size_t i, std::size_t j) const;
};

// Place entities keep the frame id; object observations are offset past
// every frame id of the generating configuration.
int place_entity_id(const View& view);
int object_entity_id(const Observation& obs, const SyntheticConfig& config);

struct LinearMap {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weights;  // row-major out_dim x in_dim

  Vector apply(std::span<const double> feature) const;
  friend bool operator==(const LinearMap&, const LinearMap&) = default;
};

// Separate heads for place views and object observations.
struct Projector {
  LinearMap place;
  LinearMap object;

  const LinearMap& head(EntityKind kind) const { return kind == EntityKind::Place ? place : object; }
  Vector apply(std::span<const double> feature, EntityKind kind) const { return head(kind).apply(feature); }
  std::size_t parameter_count() const { return place.weights.size() + object.weights.size(); }
  friend bool operator==(const Projector&, const Projector&) = default;
};

struct EpochStats {
  int epoch = 0;
  double place_loss = 0.0;
  double object_loss = 0.0;
  double entailment_loss = 0.0;
  double total = 0.0;
  double curvature = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Projector projector;
  Curvature curvature = Curvature::fixed(1.0);
  Geometry geometry = Geometry::Lorentz;
  std::vector<EpochStats> history;
  EmbeddingTable table;  // embeddings of the training dataset
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int step, double curvature, double max_tangent_norm);
  int step;
  double curvature;
  double max_tangent_norm;
};

// Linear warmup from 0 to base_lr, then half-cosine decay to 0.
double lr_schedule(int step, int total_steps, int warmup_steps, double base_lr);

// Entities of one optimisation step: pool members plus the three loss
// term index sets over the pool.
struct StepBatch {
  std::vector<const Vector*> features;
  std::size_t place_count = 0;  // pool entries [0, place_count) are views
  ContrastiveBatch place;
  ContrastiveBatch object;
  std::vector<PlaceObjectPair> pairs;
};

class Trainer {
 public:
  Trainer(const SyntheticDataset& data, TrainConfig config);

  TrainResult run();

  // Deterministic in (seed, step).
  StepBatch sample_batch(int step) const;
  // Parameters: place head, object head (row-major), then raw curvature if
  // learnable.
  std::vector<double> parameters() const;
  TotalLoss loss(const StepBatch& batch, std::span<const double> params) const;
  std::string parameter_name(std::size_t index) const;

  const Projector& projector() const { return projector_; }
  const Curvature& curvature() const { return curvature_; }

 private:
  Curvature curvature_for(std::span<const double> params) const;

  const SyntheticDataset& data_;
  TrainConfig config_;
  Projector projector_;
  Curvature curvature_;
  std::vector<int> scenes_;
  std::vector<std::vector<std::size_t>> scene_views_;
  std::vector<std::vector<std::size_t>> scene_observations_;
};

TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config);

EmbeddingTable embed(const SyntheticDataset& dataset, const Projector& projector,
                     const Curvature& curvature, Geometry geometry);

struct RootDistance {
  int id = 0;
  double tangent_norm = 0.0;
  double root_distance = 0.0;
};

struct RootDistances {
  std::vector<RootDistance> place;
  std::vector<RootDistance> object;

  static double mean_tangent_norm(const std::vector<RootDistance>& xs);
  static double mean_root_distance(const std::vector<RootDistance>& xs);
};

// Lorentz tables: |v| and d(o, exp(v)). Euclidean tables measure from the
// mean embedding instead, there being no canonical root.
RootDistances embed_root_distances(const EmbeddingTable& table);

}  // namespace hsg
