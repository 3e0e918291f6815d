#include "hsg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>

#include "hsg/random.hpp"

namespace hsg {

namespace {

Vector gaussian(Rng& rng, int dim) {
  Vector v(static_cast<std::size_t>(dim));
  for (double& x : v) x = rng.normal();
  return v;
}

void scale_to(Vector& v, double norm) {
  const double current = euclidean_norm(v);
  for (double& x : v) x *= norm / current;
}

BoundingBox base_box(Rng& rng, const ImageSize& image) {
  const double w = rng.uniform(0.1, 0.3) * image.width;
  const double h = rng.uniform(0.1, 0.3) * image.height;
  const double x1 = rng.uniform(0.0, image.width - w);
  const double y1 = rng.uniform(0.0, image.height - h);
  return {x1, y1, x1 + w, y1 + h};
}

BoundingBox jittered(Rng& rng, const BoundingBox& base, double jitter, const ImageSize& image) {
  auto shift = [&](double v, double hi) { return std::clamp(v + rng.uniform(-jitter, jitter), 0.0, hi); };
  const double w = image.width;
  const double h = image.height;
  BoundingBox box{shift(base.x1, w), shift(base.y1, h), shift(base.x2, w), shift(base.y2, h)};
  return box.valid() ? box : base;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (num_scenes < 1 || places_per_scene < 1 || objects_per_place < 1 || views_per_place < 1) {
    throw ConfigError("synthetic config: all counts must be >= 1");
  }
  if (feature_dim < 2) throw ConfigError("synthetic config: feature_dim must be >= 2");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("synthetic config: noise_sigma must be >= 0");
  if (!(box_jitter >= 0.0) || !std::isfinite(box_jitter)) throw ConfigError("synthetic config: box_jitter must be >= 0");
  if (image_size.width < 8 || image_size.height < 8) throw ConfigError("synthetic config: image_size too small");
}

std::vector<int> SyntheticDataset::scene_ids() const {
  std::set<int> ids;
  for (const View& v : views) ids.insert(v.scene);
  return {ids.begin(), ids.end()};
}

SyntheticDataset generate(const SyntheticConfig& config) {
  config.validate();
  SyntheticDataset data;
  data.config = config;
  const int views_per_scene = config.places_per_scene * config.views_per_place;
  const int objects_per_scene = config.places_per_scene * config.objects_per_place;

  for (int scene = 0; scene < config.num_scenes; ++scene) {
    // Each scene draws from its own stream so scenes are independent of order.
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(scene)));
    for (int p = 0; p < config.places_per_scene; ++p) {
      Vector anchor = gaussian(rng, config.feature_dim);
      scale_to(anchor, 1.0);

      std::vector<Vector> object_anchors;
      std::vector<BoundingBox> boxes;
      for (int k = 0; k < config.objects_per_place; ++k) {
        Vector offset = gaussian(rng, config.feature_dim);
        const double along = detail::dot(offset, anchor);
        for (std::size_t i = 0; i < offset.size(); ++i) offset[i] -= along * anchor[i];
        scale_to(offset, kObjectOffsetNorm);
        for (std::size_t i = 0; i < offset.size(); ++i) offset[i] += anchor[i];
        object_anchors.push_back(std::move(offset));
        boxes.push_back(base_box(rng, config.image_size));
      }

      for (int v = 0; v < config.views_per_place; ++v) {
        View view;
        view.scene = scene;
        view.view = scene * views_per_scene + p * config.views_per_place + v;
        view.place = scene * config.places_per_scene + p;
        view.feature = anchor;
        for (double& x : view.feature) x += config.noise_sigma * rng.normal();

        for (int k = 0; k < config.objects_per_place; ++k) {
          Observation obs;
          obs.id = static_cast<int>(data.observations.size());
          obs.scene = scene;
          obs.object = scene * objects_per_scene + p * config.objects_per_place + k;
          obs.view = view.view;
          obs.box = jittered(rng, boxes[static_cast<std::size_t>(k)], config.box_jitter, config.image_size);
          obs.feature = object_anchors[static_cast<std::size_t>(k)];
          for (double& x : obs.feature) x += config.noise_sigma * rng.normal();
          data.observations.push_back(std::move(obs));
        }
        data.views.push_back(std::move(view));
      }
    }
  }
  data.gt_graph = ground_truth_graph(data.views, data.observations);
  return data;
}

SceneGraph ground_truth_graph(const std::vector<View>& views, const std::vector<Observation>& observations) {
  SceneGraph g;
  std::unordered_map<int, std::size_t> place_row;
  for (const View& v : views) {
    place_row[v.view] = g.places.size();
    g.places.push_back({v.view, v.scene});
  }
  std::unordered_map<int, std::size_t> object_col;
  for (const Observation& o : observations) {
    if (!object_col.count(o.object)) {
      object_col[o.object] = g.objects.size();
      g.objects.push_back({o.object, o.scene});
    }
  }
  g.pp = BinaryMatrix(g.places.size(), g.places.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    for (std::size_t j = i + 1; j < views.size(); ++j) {
      if (views[i].place == views[j].place && views[i].scene == views[j].scene) {
        g.pp.set(i, j);
        g.pp.set(j, i);
      }
    }
  }
  g.po = BinaryMatrix(g.places.size(), g.objects.size());
  for (const Observation& o : observations) {
    const auto row = place_row.find(o.view);
    if (row == place_row.end()) throw FormatError("observation references unknown view " + std::to_string(o.view));
    g.po.set(row->second, object_col.at(o.object));
    g.tracks.push_back({o.object, o.view, o.box, true});
  }
  return g;
}

SyntheticDataset subset(const SyntheticDataset& dataset, const std::vector<int>& scenes) {
  const std::set<int> keep(scenes.begin(), scenes.end());
  SyntheticDataset out;
  out.config = dataset.config;
  for (const View& v : dataset.views) {
    if (keep.count(v.scene)) out.views.push_back(v);
  }
  for (const Observation& o : dataset.observations) {
    if (keep.count(o.scene)) out.observations.push_back(o);
  }
  out.gt_graph = ground_truth_graph(out.views, out.observations);
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_scene_ids(const std::vector<int>& scenes,
                                                              double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("split: fraction must be in (0, 1)");
  if (scenes.size() < 2) throw ConfigError("split: need at least 2 scenes");
  std::vector<int> order = scenes;
  std::sort(order.begin(), order.end());
  Rng rng(derive_seed(seed, 0x5711ULL));
  rng.shuffle(order);
  const auto n = static_cast<long>(order.size());
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
  std::vector<int> train(order.begin(), order.begin() + n_train);
  std::vector<int> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

DatasetSplit split(const SyntheticDataset& dataset, double train_fraction, std::uint64_t seed) {
  const auto [train, test] = split_scene_ids(dataset.scene_ids(), train_fraction, seed);
  return {subset(dataset, train), subset(dataset, test)};
}

}  // namespace hsg
