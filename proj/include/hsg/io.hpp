#pragma once

// Structured-text artifacts: datasets, scene graphs, checkpoints and
// metric reports as JSON documents. Writers emit sorted keys with a fixed
// indent so identical inputs give identical bytes; doubles round-trip
// exactly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hsg/graph_metrics.hpp"
#include "hsg/synth.hpp"
#include "hsg/trainer.hpp"

namespace hsg {

using Json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

// Canonical text of a document (2-space indent, trailing newline).
std::string dump(const Json& j);
Json parse_json(std::string_view text, const std::string& what);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our use: whole buffer, then checks the stream.
void write_file(const std::filesystem::path& path, std::string_view text);

Json to_json(const BoundingBox& box);
BoundingBox box_from_json(const Json& j);

Json to_json(const SceneGraph& graph);
SceneGraph graph_from_json(const Json& j);

Json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const Json& j);

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const SyntheticDataset& dataset);
SyntheticDataset dataset_from_json(const Json& j);

// Hash of the canonical dataset text.
std::string dataset_hash(const SyntheticDataset& dataset);

struct Checkpoint {
  std::string config_hash;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  TrainConfig train;  // effective training configuration
  Curvature curvature = Curvature::fixed(1.0);
  Geometry geometry = Geometry::Lorentz;
  Projector projector;
  std::vector<int> train_scenes;
  std::vector<int> test_scenes;
  // Every entity of the dataset, embedded with the trained heads.
  EmbeddingTable table;
};

Json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& j);

Json to_json(const IouCounts& counts);
Json to_json(const MetricsReport& report);

}  // namespace hsg
