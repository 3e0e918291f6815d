#include <doctest.h>

#include <filesystem>

#include "hsg/config.hpp"

using namespace hsg;

TEST_CASE("run config round trip") {
  RunConfig c;
  c.synthetic.num_scenes = 3;
  c.synthetic.noise_sigma = 0.0;
  c.train.epochs = 4;
  c.train.weights.lambda_ent = 5.0;
  c.thresholds.place = 0.4;
  c.output_dir = "elsewhere";
  const std::string text = serialize(c);
  const RunConfig back = run_config_from_json(parse_json(text, "config"));
  CHECK(serialize(back) == text);
  CHECK(back.synthetic == c.synthetic);
  CHECK(back.train.weights.lambda_ent == 5.0);
  CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("defaults") {
  const RunConfig c = run_config_from_json(Json::object());
  CHECK(c.train.curv_init == 80.0);
  CHECK(c.train.weight_decay == 0.01);
  CHECK(c.train.warmup_epochs == 3);
  CHECK(c.train.weights.tau_place == 0.1);
  CHECK(c.train.weights.lambda_ent == 20.0);
  CHECK(c.thresholds.place == 0.3);
  CHECK(c.thresholds.object == 0.2);
  CHECK(c.train.scenes_per_batch == 2);
}

TEST_CASE("hash follows the model sections only") {
  RunConfig a;
  RunConfig b = a;
  b.thresholds.place = 0.5;
  b.output_dir = "x";
  CHECK(config_hash(a) == config_hash(b));
  b.train.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("unknown keys and bad values") {
  CHECK_THROWS_AS(run_config_from_json({{"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json({{"thresholds", {{"places", 0.3}}}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json({{"thresholds", {{"place", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json({{"train", {{"warmup_epochs", 50}}}}), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "hsg_bad_config.json";
  write_file(path, "{ not json");
  CHECK_THROWS_AS(load_run_config(path), ConfigError);
  std::filesystem::remove(path);
}
