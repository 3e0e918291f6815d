#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "hsg/cli.hpp"
#include "hsg/io.hpp"

using namespace hsg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct Workdir {
  fs::path dir;
  Workdir() : dir(fs::temp_directory_path() / "hsg_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const Json config = {
        {"synthetic", {{"num_scenes", 3}, {"places_per_scene", 3}, {"views_per_place", 2}, {"objects_per_place", 2}, {"feature_dim", 8}}},
        {"train", {{"embed_dim", 8}, {"epochs", 2}, {"warmup_epochs", 1}, {"steps_per_epoch", 4}, {"train_fraction", 0.67}}},
        {"output_dir", (dir / "out").string()}};
    write_file(path("config.json"), dump(config));
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"train"}).code == kExitUsage);
  CHECK(cli({"train", "--dataset", "x.json", "--ablation", "spherical"}).code == kExitUsage);
  CHECK(cli({"generate", "--config", "/nonexistent.json"}).code == kExitUsage);
}

TEST_CASE("generate, train, eval and figures") {
  const Workdir w;
  const std::string cfg = w.path("config.json");
  const Run g = cli({"generate", "--config", cfg, "--out", w.path("data.json")});
  REQUIRE(g.code == kExitOk);
  CHECK(g.out.find("scenes 3 views 18 places 9 objects 18 observations 36 pp_edges 9 po_edges 36") != std::string::npos);

  const Run t = cli({"train", "--config", cfg, "--dataset", w.path("data.json"), "--out", w.path("ck.json")});
  REQUIRE(t.code == kExitOk);
  CHECK(fs::exists(w.path("ck.history.csv")));
  const Checkpoint ck = checkpoint_from_json(parse_json(read_file(w.path("ck.json")), "ck"));
  CHECK(ck.train_scenes.size() == 2);
  CHECK(ck.test_scenes.size() == 1);
  CHECK(ck.table.entries.size() == 18 + 36);

  const Run e = cli({"eval", "--checkpoint", w.path("ck.json"), "--dataset", w.path("data.json"), "--out", w.path("report.json")});
  REQUIRE(e.code == kExitOk);
  const Json report = parse_json(read_file(w.path("report.json")), "report");
  CHECK(report.at("split") == "test");
  CHECK(report.contains("pp_iou"));
  CHECK(report.at("train").contains("recall_at_1"));

  CHECK(cli({"hist", "--checkpoint", w.path("ck.json"), "--out", w.path("hist.csv")}).code == kExitOk);
  CHECK(cli({"poincare", "--checkpoint", w.path("ck.json"), "--out", w.path("disk.csv")}).code == kExitOk);
  CHECK(read_file(w.path("hist.csv")).rfind("entity_id,kind,", 0) == 0);
}

TEST_CASE("eval refuses a checkpoint from another dataset") {
  const Workdir w;
  const std::string cfg = w.path("config.json");
  REQUIRE(cli({"generate", "--config", cfg, "--out", w.path("a.json")}).code == kExitOk);
  REQUIRE(cli({"generate", "--config", cfg, "--seed", "9", "--out", w.path("b.json")}).code == kExitOk);
  REQUIRE(cli({"train", "--config", cfg, "--dataset", w.path("a.json"), "--out", w.path("ck.json")}).code == kExitOk);
  const Run e = cli({"eval", "--checkpoint", w.path("ck.json"), "--dataset", w.path("b.json"), "--out", w.path("r.json")});
  CHECK(e.code == kExitMismatch);
  CHECK_FALSE(fs::exists(w.path("r.json")));

  // A tampered config hash is caught as well.
  Json ck = parse_json(read_file(w.path("ck.json")), "ck");
  ck["config_hash"] = "0000000000000000";
  write_file(w.path("ck2.json"), dump(ck));
  CHECK(cli({"eval", "--checkpoint", w.path("ck2.json"), "--dataset", w.path("a.json")}).code == kExitMismatch);
}

TEST_CASE("ablation flags reach the checkpoint") {
  const Workdir w;
  const std::string cfg = w.path("config.json");
  REQUIRE(cli({"generate", "--config", cfg, "--out", w.path("d.json")}).code == kExitOk);
  REQUIRE(cli({"train", "--config", cfg, "--dataset", w.path("d.json"), "--out", w.path("e.json"), "--ablation", "euclidean"}).code == kExitOk);
  CHECK(checkpoint_from_json(parse_json(read_file(w.path("e.json")), "e")).geometry == Geometry::Euclidean);
  REQUIRE(cli({"train", "--config", cfg, "--dataset", w.path("d.json"), "--out", w.path("n.json"), "--ablation", "no-entailment"}).code == kExitOk);
  const Checkpoint n = checkpoint_from_json(parse_json(read_file(w.path("n.json")), "n"));
  CHECK_FALSE(n.train.entailment_enabled);
  CHECK(n.train.weights.lambda_ent == 0.0);
  REQUIRE(cli({"train", "--config", cfg, "--dataset", w.path("d.json"), "--out", w.path("f.json"), "--fixed-curvature", "1"}).code == kExitOk);
  const Checkpoint f = checkpoint_from_json(parse_json(read_file(w.path("f.json")), "f"));
  CHECK(f.curvature.value() == 1.0);
  CHECK_FALSE(f.curvature.is_learnable());
}

TEST_CASE("repeated runs write identical bytes") {
  const Workdir w;
  const std::string cfg = w.path("config.json");
  for (const char* tag : {"1", "2"}) {
    const std::string t = tag;
    REQUIRE(cli({"generate", "--config", cfg, "--out", w.path("d" + t + ".json")}).code == kExitOk);
    REQUIRE(cli({"train", "--config", cfg, "--dataset", w.path("d" + t + ".json"), "--out", w.path("c" + t + ".json")}).code == kExitOk);
  }
  CHECK(read_file(w.path("d1.json")) == read_file(w.path("d2.json")));
  CHECK(read_file(w.path("c1.json")) == read_file(w.path("c2.json")));
}
