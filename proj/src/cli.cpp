#include "hsg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hsg/config.hpp"
#include "hsg/figures.hpp"
#include "hsg/io.hpp"

namespace hsg {

namespace {

namespace fs = std::filesystem;

class Mismatch : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string ablation;
  std::optional<double> fixed_curvature;
  std::string out;
  std::string dataset;
  std::string checkpoint;
  std::string history;
};

RunConfig base_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    c.synthetic.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  if (o.ablation == "euclidean") {
    c.train.euclidean_ablation = true;
  } else if (o.ablation == "no-entailment") {
    c.train.entailment_enabled = false;
    c.train.weights.lambda_ent = 0.0;
  }
  if (o.fixed_curvature) {
    c.train.curvature_learnable = false;
    c.train.curv_init = *o.fixed_curvature;
  }
  c.validate();
  return c;
}

fs::path out_path(const Options& o, const RunConfig& c, const char* name) {
  return o.out.empty() ? fs::path(c.output_dir) / name : fs::path(o.out);
}

SyntheticDataset load_dataset(const fs::path& path) {
  return dataset_from_json(parse_json(read_file(path), path.string()));
}

Checkpoint load_checkpoint(const fs::path& path) {
  return checkpoint_from_json(parse_json(read_file(path), path.string()));
}

EmbeddingTable restrict(const EmbeddingTable& table, const std::vector<int>& scenes) {
  const std::set<int> keep(scenes.begin(), scenes.end());
  EmbeddingTable out;
  out.curvature = table.curvature;
  out.geometry = table.geometry;
  for (const EmbeddingEntry& e : table.entries) {
    if (keep.count(e.scene)) out.entries.push_back(e);
  }
  return out;
}

int cmd_generate(const Options& o, std::ostream& out) {
  const RunConfig c = base_config(o);
  const SyntheticDataset data = generate(c.synthetic);
  const fs::path path = out_path(o, c, "dataset.json");
  write_file(path, dump(to_json(data)));
  out << "scenes " << data.scene_ids().size() << " views " << data.views.size() << " places "
      << c.synthetic.num_scenes * c.synthetic.places_per_scene << " objects " << data.gt_graph.objects.size()
      << " observations " << data.observations.size() << " pp_edges " << data.gt_graph.pp.count() / 2
      << " po_edges " << data.gt_graph.po.count() << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c = base_config(o);
  const SyntheticDataset data = load_dataset(o.dataset);
  c.synthetic = data.config;
  const auto [train_ids, test_ids] = split_scene_ids(data.scene_ids(), c.train.train_fraction, c.train.seed);
  const SyntheticDataset train_set = subset(data, train_ids);

  TrainResult result;
  try {
    result = train(train_set, c.train);
  } catch (const TrainingDiverged& e) {
    err << "training diverged\n"
        << "  step: " << e.step << "\n"
        << "  curvature: " << e.curvature << "\n"
        << "  max tangent norm: " << e.max_tangent_norm << "\n";
    return kExitDiverged;
  }

  Checkpoint ck;
  ck.config_hash = config_hash(c);
  ck.dataset_hash = dataset_hash(data);
  ck.seed = c.train.seed;
  ck.train = c.train;
  ck.curvature = result.curvature;
  ck.geometry = result.geometry;
  ck.projector = result.projector;
  ck.train_scenes = train_ids;
  ck.test_scenes = test_ids;
  ck.table = embed(data, result.projector, result.curvature, result.geometry);

  const fs::path path = out_path(o, c, "checkpoint.json");
  fs::path history = o.history;
  if (history.empty()) history = fs::path(path).replace_extension(".history.csv");
  write_file(path, dump(to_json(ck)));
  write_file(history, history_csv(result.history));

  const EpochStats& last = result.history.back();
  out << "epochs " << result.history.size() << " total " << last.total << " curvature " << result.curvature.value()
      << "\n";
  out << "wrote " << path.string() << " and " << history.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  // Only the thresholds of --config matter here.
  const RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const SyntheticDataset data = load_dataset(o.dataset);

  if (dataset_hash(data) != ck.dataset_hash) throw Mismatch("dataset hash differs from the one the checkpoint was trained on");
  RunConfig trained;
  trained.synthetic = data.config;
  trained.train = ck.train;
  if (config_hash(trained) != ck.config_hash) throw Mismatch("checkpoint config hash does not match its contents");

  auto run = [&](const std::vector<int>& scenes) {
    return evaluate_table(restrict(ck.table, scenes), subset(data, scenes).gt_graph, c.thresholds);
  };
  const MetricsReport test = run(ck.test_scenes);
  const MetricsReport train = run(ck.train_scenes);

  Json report = to_json(test);
  report["format"] = "hsg-report";
  report["version"] = 1;
  report["split"] = "test";
  report["scenes"] = ck.test_scenes;
  report["thresholds"] = {{"place", c.thresholds.place}, {"object", c.thresholds.object}};
  report["config_hash"] = ck.config_hash;
  Json train_json = to_json(train);
  train_json.erase("matching");
  train_json["scenes"] = ck.train_scenes;
  report["train"] = train_json;

  const fs::path path = out_path(o, c, "report.json");
  write_file(path, dump(report));
  out << "test recall@1 " << test.recall_at_1 << " pp_iou " << test.pp_iou << " po_iou " << test.po_iou
      << " graph_iou " << test.graph_iou << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_figure(const Options& o, std::ostream& out, bool hist) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const RunConfig defaults;
  const fs::path path = out_path(o, defaults, hist ? "hist.csv" : "poincare.csv");
  write_file(path, hist ? hist_csv(ck.table) : poincare_csv(ck.table));
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperbolic scene-graph toolkit"};
  app.name("hsg");
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) { sub->add_option("--out", o.out, "output file"); };
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "run config (JSON)"); };
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "seed for generation and training");
  };

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_config(gen);
  add_overrides(gen);
  add_common(gen);

  CLI::App* tr = app.add_subcommand("train", "train on a dataset and write a checkpoint");
  add_config(tr);
  add_overrides(tr);
  add_common(tr);
  tr->add_option("--dataset", o.dataset, "dataset file")->required();
  tr->add_option("--ablation", o.ablation, "euclidean or no-entailment")
      ->check(CLI::IsMember({"euclidean", "no-entailment"}));
  tr->add_option("--fixed-curvature", o.fixed_curvature, "freeze curvature at this value");
  tr->add_option("--history", o.history, "loss history CSV (default: next to the checkpoint)");

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on its held-out scenes");
  add_config(ev);
  add_common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "checkpoint file")->required();
  ev->add_option("--dataset", o.dataset, "dataset file")->required();

  CLI::App* hi = app.add_subcommand("hist", "root-distance histogram data");
  add_common(hi);
  hi->add_option("--checkpoint", o.checkpoint, "checkpoint file")->required();

  CLI::App* po = app.add_subcommand("poincare", "2-D Poincare disk coordinates");
  add_common(po);
  po->add_option("--checkpoint", o.checkpoint, "checkpoint file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (tr->parsed()) return cmd_train(o, out, err);
    if (ev->parsed()) return cmd_eval(o, out);
    if (hi->parsed()) return cmd_figure(o, out, true);
    if (po->parsed()) return cmd_figure(o, out, false);
  } catch (const Mismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hsg
