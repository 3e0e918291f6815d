#pragma once

// Deterministic synthetic multiview scenes: place anchors on the unit
// sphere, object anchors offset orthogonally from their place, noisy
// per-view features and jittered boxes, plus the ground-truth scene graph.

#include <cstdint>
#include <utility>
#include <vector>

#include "hsg/manifold.hpp"
#include "hsg/scene_graph.hpp"

namespace hsg {

struct ImageSize {
  int width = 256;
  int height = 192;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct SyntheticConfig {
  int num_scenes = 5;
  int places_per_scene = 8;
  int objects_per_place = 4;
  int views_per_place = 6;
  int feature_dim = 32;
  double noise_sigma = 0.1;
  double box_jitter = 4.0;
  ImageSize image_size;
  std::uint64_t seed = 7;

  void validate() const;
  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

inline constexpr double kObjectOffsetNorm = 0.5;

struct View {
  int scene = 0;
  int view = 0;   // frame id, unique across the dataset
  int place = 0;  // place label, unique across the dataset
  Vector feature;
  friend bool operator==(const View&, const View&) = default;
};

// One present (object, frame) detection with its appearance feature.
struct Observation {
  int id = 0;  // index in the generated dataset
  int scene = 0;
  int object = 0;
  int view = 0;
  BoundingBox box;
  Vector feature;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct SyntheticDataset {
  SyntheticConfig config;
  std::vector<View> views;
  std::vector<Observation> observations;
  SceneGraph gt_graph;

  std::vector<int> scene_ids() const;
  friend bool operator==(const SyntheticDataset&, const SyntheticDataset&) = default;
};

SyntheticDataset generate(const SyntheticConfig& config);

// Views of one place form a clique; an object is adjacent to every view it
// is observed in.
SceneGraph ground_truth_graph(const std::vector<View>& views,
                              const std::vector<Observation>& observations);

// Dataset restricted to the given scenes (ground truth rebuilt).
SyntheticDataset subset(const SyntheticDataset& dataset, const std::vector<int>& scenes);

struct DatasetSplit {
  SyntheticDataset train;
  SyntheticDataset test;
};

// Scene-level split; round(fraction * scenes) scenes go to train, clamped
// so both sides are nonempty.
DatasetSplit split(const SyntheticDataset& dataset, double train_fraction, std::uint64_t seed);
std::pair<std::vector<int>, std::vector<int>> split_scene_ids(const std::vector<int>& scenes,
                                                              double train_fraction,
                                                              std::uint64_t seed);

}  // namespace hsg
