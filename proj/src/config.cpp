#include "hsg/config.hpp"

namespace hsg {

void RunConfig::validate() const {
  synthetic.validate();
  train.validate();
  thresholds.validate();
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  RunConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "synthetic") {
      c.synthetic = synthetic_config_from_json(v);
    } else if (k == "train") {
      c.train = train_config_from_json(v);
    } else if (k == "thresholds") {
      if (!v.is_object()) throw ConfigError("thresholds: expected an object");
      for (const auto& [tk, tv] : v.items()) {
        if (tk != "place" && tk != "object") throw ConfigError("thresholds: unknown key '" + tk + "'");
        if (!tv.is_number()) throw ConfigError("thresholds." + tk + " must be a number");
        (tk == "place" ? c.thresholds.place : c.thresholds.object) = tv.get<double>();
      }
    } else if (k == "output_dir") {
      if (!v.is_string()) throw ConfigError("output_dir must be a string");
      c.output_dir = v.get<std::string>();
    } else {
      throw ConfigError("config: unknown key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

Json to_json(const RunConfig& c) {
  return {{"synthetic", to_json(c.synthetic)},
          {"train", to_json(c.train)},
          {"thresholds", {{"place", c.thresholds.place}, {"object", c.thresholds.object}}},
          {"output_dir", c.output_dir}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string serialize(const RunConfig& config) { return dump(to_json(config)); }

std::string config_hash(const RunConfig& config) {
  const Json model = {{"synthetic", to_json(config.synthetic)}, {"train", to_json(config.train)}};
  return hex64(fnv1a64(dump(model)));
}

}  // namespace hsg
