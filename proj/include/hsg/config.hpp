#pragma once

// Run configuration: one JSON document with synthetic, train and
// threshold sections. Missing keys take defaults; unknown keys are errors.

#include <filesystem>
#include <string>

#include "hsg/graph_metrics.hpp"
#include "hsg/io.hpp"
#include "hsg/synth.hpp"
#include "hsg/trainer.hpp"

namespace hsg {

struct RunConfig {
  SyntheticConfig synthetic;
  TrainConfig train;
  Thresholds thresholds;
  std::string output_dir = "out";

  void validate() const;
};

RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize(const RunConfig& config);

// Hash of the sections that determine a trained model (synthetic + train).
std::string config_hash(const RunConfig& config);

}  // namespace hsg
