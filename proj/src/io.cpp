#include "hsg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hsg {

namespace {

constexpr int kFormatVersion = 1;

// Strict field readers. Missing keys keep the default; present keys must
// have the right type.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items()) {
      if (!allowed.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const {
    if (!j_.contains(key)) fail(std::string("missing key '") + key + "'");
    return j_.at(key);
  }

  void read(const char* key, int& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) fail(std::string(key) + " must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) fail(std::string(key) + " out of range");
    out = static_cast<int>(x);
  }
  void read(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(std::string(key) + " must be a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const char* key, double& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) fail(std::string(key) + " must be a number");
    out = v.get<double>();
  }
  void read(const char* key, bool& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) fail(std::string(key) + " must be a boolean");
    out = v.get<bool>();
  }

  template <class T>
  T required(const char* key) const {
    T out{};
    if (!has(key)) fail(std::string("missing key '") + key + "'");
    read(key, out);
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

 private:
  const Json& j_;
  std::string where_;
};

// Artifact parsing reports FormatError, whatever the nested reader threw.
template <class F>
auto as_format(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const ConfigError& e) {
    throw FormatError(what + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) {
    if (!std::isfinite(x)) throw FormatError("refusing to serialize a non-finite value");
    a.push_back(x);
  }
  return a;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  Vector v;
  v.reserve(j.size());
  for (const Json& x : j) {
    if (!x.is_number()) throw FormatError(std::string(what) + ": expected numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<int> ints_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
  std::vector<int> v;
  for (const Json& x : j) {
    if (!x.is_number_integer()) throw FormatError(std::string(what) + ": expected integers");
    v.push_back(x.get<int>());
  }
  return v;
}

void check_header(const Json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string()) != format) {
    throw FormatError(std::string("not a ") + format + " document");
  }
  if (j.value("version", 0) != kFormatVersion) throw FormatError(std::string(format) + ": unsupported version");
}

const char* kind_name(EntityKind k) { return k == EntityKind::Place ? "place" : "object"; }

EntityKind kind_from(const std::string& s) {
  if (s == "place") return EntityKind::Place;
  if (s == "object") return EntityKind::Object;
  throw FormatError("unknown entity kind '" + s + "'");
}

Json linear_map_json(const LinearMap& m) { return vector_json(m.weights); }

LinearMap linear_map_from(const Json& j, int in_dim, int out_dim, const char* what) {
  LinearMap m;
  m.in_dim = in_dim;
  m.out_dim = out_dim;
  m.weights = vector_from_json(j, what);
  if (m.weights.size() != static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim)) {
    throw FormatError(std::string(what) + ": weight count does not match in_dim x out_dim");
  }
  return m;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error("write failed for " + path.string());
}

Json to_json(const BoundingBox& box) { return Json::array({box.x1, box.y1, box.x2, box.y2}); }

BoundingBox box_from_json(const Json& j) {
  const Vector v = vector_from_json(j, "box");
  if (v.size() != 4) throw FormatError("box: expected [x1, y1, x2, y2]");
  return {v[0], v[1], v[2], v[3]};
}

Json to_json(const SceneGraph& g) {
  Json nodes = Json::array();
  for (const PlaceNode& p : g.places) nodes.push_back({{"id", p.id}, {"kind", "place"}, {"scene", p.scene}, {"view", p.id}});
  for (const ObjectNode& o : g.objects) {
    nodes.push_back({{"id", o.id}, {"kind", "object"}, {"scene", o.scene}, {"view", nullptr}});
  }
  Json pp = Json::array();
  for (std::size_t i = 0; i < g.places.size(); ++i) {
    for (std::size_t j = i + 1; j < g.places.size(); ++j) {
      if (g.pp.at(i, j)) pp.push_back({g.places[i].id, g.places[j].id});
    }
  }
  Json po = Json::array();
  for (std::size_t i = 0; i < g.places.size(); ++i) {
    for (std::size_t j = 0; j < g.objects.size(); ++j) {
      if (g.po.at(i, j)) po.push_back({g.places[i].id, g.objects[j].id});
    }
  }
  Json tracks = Json::array();
  for (const TrackEntry& t : g.tracks) {
    tracks.push_back({{"object", t.object}, {"frame", t.frame}, {"box", to_json(t.box)}, {"present", t.present}});
  }
  return {{"nodes", nodes}, {"edges", {{"pp", pp}, {"po", po}}}, {"tracks", tracks}};
}

SceneGraph graph_from_json(const Json& j) {
  return as_format("scene graph", [&] {
    SceneGraph g;
    std::unordered_map<int, std::size_t> place_row;
    std::unordered_map<int, std::size_t> object_col;
    for (const Json& n : j.at("nodes")) {
      const int id = n.at("id").get<int>();
      const int scene = n.at("scene").get<int>();
      if (kind_from(n.at("kind").get<std::string>()) == EntityKind::Place) {
        if (!place_row.emplace(id, g.places.size()).second) throw FormatError("duplicate place id " + std::to_string(id));
        g.places.push_back({id, scene});
      } else {
        if (!object_col.emplace(id, g.objects.size()).second) {
          throw FormatError("duplicate object id " + std::to_string(id));
        }
        g.objects.push_back({id, scene});
      }
    }
    auto lookup = [](const std::unordered_map<int, std::size_t>& m, const Json& id, const char* what) {
      const auto it = m.find(id.get<int>());
      if (it == m.end()) throw FormatError(std::string("edge references unknown ") + what);
      return it->second;
    };
    g.pp = BinaryMatrix(g.places.size(), g.places.size());
    for (const Json& e : j.at("edges").at("pp")) {
      const std::size_t a = lookup(place_row, e.at(0), "place");
      const std::size_t b = lookup(place_row, e.at(1), "place");
      g.pp.set(a, b);
      g.pp.set(b, a);
    }
    g.po = BinaryMatrix(g.places.size(), g.objects.size());
    for (const Json& e : j.at("edges").at("po")) {
      g.po.set(lookup(place_row, e.at(0), "place"), lookup(object_col, e.at(1), "object"));
    }
    for (const Json& t : j.at("tracks")) {
      g.tracks.push_back({t.at("object").get<int>(), t.at("frame").get<int>(), box_from_json(t.at("box")),
                          t.at("present").get<bool>()});
    }
    g.validate();
    return g;
  });
}

Json to_json(const SyntheticConfig& c) {
  return {{"num_scenes", c.num_scenes},
          {"places_per_scene", c.places_per_scene},
          {"objects_per_place", c.objects_per_place},
          {"views_per_place", c.views_per_place},
          {"feature_dim", c.feature_dim},
          {"noise_sigma", c.noise_sigma},
          {"box_jitter", c.box_jitter},
          {"image_size", {{"width", c.image_size.width}, {"height", c.image_size.height}}},
          {"seed", c.seed}};
}

SyntheticConfig synthetic_config_from_json(const Json& j) {
  SyntheticConfig c;
  const Reader r(j, "synthetic");
  r.only({"num_scenes", "places_per_scene", "objects_per_place", "views_per_place", "feature_dim", "noise_sigma",
          "box_jitter", "image_size", "seed"});
  r.read("num_scenes", c.num_scenes);
  r.read("places_per_scene", c.places_per_scene);
  r.read("objects_per_place", c.objects_per_place);
  r.read("views_per_place", c.views_per_place);
  r.read("feature_dim", c.feature_dim);
  r.read("noise_sigma", c.noise_sigma);
  r.read("box_jitter", c.box_jitter);
  r.read("seed", c.seed);
  if (r.has("image_size")) {
    const Reader img(j.at("image_size"), "synthetic.image_size");
    img.only({"width", "height"});
    img.read("width", c.image_size.width);
    img.read("height", c.image_size.height);
  }
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"projector_dim", c.projector_dim},
          {"lr", c.lr},
          {"curv_lr", c.curv_lr},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"warmup_epochs", c.warmup_epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"scenes_per_batch", c.scenes_per_batch},
          {"init_std", c.init_std},
          {"train_fraction", c.train_fraction},
          {"curv_init", c.curv_init},
          {"curvature_learnable", c.curvature_learnable},
          {"entailment_enabled", c.entailment_enabled},
          {"euclidean_ablation", c.euclidean_ablation},
          {"seed", c.seed},
          {"loss", {{"lambda_ent", c.weights.lambda_ent}, {"tau_place", c.weights.tau_place},
                    {"tau_object", c.weights.tau_object}}},
          {"cone", {{"K", c.cone.K}, {"eta", c.cone.eta}}}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  const Reader r(j, "train");
  r.only({"embed_dim", "projector_dim", "lr", "curv_lr", "weight_decay", "epochs", "warmup_epochs", "steps_per_epoch",
          "scenes_per_batch", "init_std", "train_fraction", "curv_init", "curvature_learnable", "entailment_enabled",
          "euclidean_ablation", "seed", "loss", "cone"});
  r.read("embed_dim", c.embed_dim);
  // projector_dim follows embed_dim unless given explicitly.
  c.projector_dim = c.embed_dim;
  r.read("projector_dim", c.projector_dim);
  r.read("lr", c.lr);
  r.read("curv_lr", c.curv_lr);
  r.read("weight_decay", c.weight_decay);
  r.read("epochs", c.epochs);
  r.read("warmup_epochs", c.warmup_epochs);
  r.read("steps_per_epoch", c.steps_per_epoch);
  r.read("scenes_per_batch", c.scenes_per_batch);
  r.read("init_std", c.init_std);
  r.read("train_fraction", c.train_fraction);
  r.read("curv_init", c.curv_init);
  r.read("curvature_learnable", c.curvature_learnable);
  r.read("entailment_enabled", c.entailment_enabled);
  r.read("euclidean_ablation", c.euclidean_ablation);
  r.read("seed", c.seed);
  if (r.has("loss")) {
    const Reader l(j.at("loss"), "train.loss");
    l.only({"lambda_ent", "tau_place", "tau_object"});
    l.read("lambda_ent", c.weights.lambda_ent);
    l.read("tau_place", c.weights.tau_place);
    l.read("tau_object", c.weights.tau_object);
  }
  if (r.has("cone")) {
    const Reader k(j.at("cone"), "train.cone");
    k.only({"K", "eta"});
    k.read("K", c.cone.K);
    k.read("eta", c.cone.eta);
  }
  c.validate();
  return c;
}

Json to_json(const SyntheticDataset& d) {
  Json views = Json::array();
  for (const View& v : d.views) {
    views.push_back({{"scene", v.scene}, {"view", v.view}, {"place", v.place}, {"feature", vector_json(v.feature)}});
  }
  Json obs = Json::array();
  for (const Observation& o : d.observations) {
    obs.push_back({{"id", o.id},
                   {"scene", o.scene},
                   {"object", o.object},
                   {"view", o.view},
                   {"box", to_json(o.box)},
                   {"feature", vector_json(o.feature)}});
  }
  return {{"format", "hsg-dataset"}, {"version", kFormatVersion},   {"config", to_json(d.config)},
          {"views", views},          {"observations", obs},        {"graph", to_json(d.gt_graph)}};
}

SyntheticDataset dataset_from_json(const Json& j) {
  check_header(j, "hsg-dataset");
  return as_format("dataset", [&] {
    SyntheticDataset d;
    d.config = synthetic_config_from_json(j.at("config"));
    for (const Json& v : j.at("views")) {
      View view;
      view.scene = v.at("scene").get<int>();
      view.view = v.at("view").get<int>();
      view.place = v.at("place").get<int>();
      view.feature = vector_from_json(v.at("feature"), "view feature");
      d.views.push_back(std::move(view));
    }
    for (const Json& o : j.at("observations")) {
      Observation obs;
      obs.id = o.at("id").get<int>();
      obs.scene = o.at("scene").get<int>();
      obs.object = o.at("object").get<int>();
      obs.view = o.at("view").get<int>();
      obs.box = box_from_json(o.at("box"));
      obs.feature = vector_from_json(o.at("feature"), "observation feature");
      d.observations.push_back(std::move(obs));
    }
    for (const View& v : d.views) {
      if (v.feature.size() != static_cast<std::size_t>(d.config.feature_dim)) {
        throw FormatError("dataset: view feature length differs from feature_dim");
      }
    }
    for (const Observation& o : d.observations) {
      if (o.feature.size() != static_cast<std::size_t>(d.config.feature_dim)) {
        throw FormatError("dataset: observation feature length differs from feature_dim");
      }
    }
    d.gt_graph = graph_from_json(j.at("graph"));
    if (!(d.gt_graph == ground_truth_graph(d.views, d.observations))) {
      throw FormatError("dataset: stored graph disagrees with views and observations");
    }
    return d;
  });
}

std::string dataset_hash(const SyntheticDataset& dataset) { return hex64(fnv1a64(dump(to_json(dataset)))); }

Json to_json(const Checkpoint& c) {
  Json entries = Json::array();
  for (const EmbeddingEntry& e : c.table.entries) {
    Json row = {{"id", e.id},
                {"kind", kind_name(e.kind)},
                {"scene", e.scene},
                {"view", e.view},
                {"tangent", vector_json(e.tangent)}};
    if (e.box) row["box"] = to_json(*e.box);
    entries.push_back(std::move(row));
  }
  return {{"format", "hsg-checkpoint"},
          {"version", kFormatVersion},
          {"config_hash", c.config_hash},
          {"dataset_hash", c.dataset_hash},
          {"seed", c.seed},
          {"train_config", to_json(c.train)},
          {"geometry", c.geometry == Geometry::Lorentz ? "lorentz" : "euclidean"},
          {"curvature", {{"value", c.curvature.value()}, {"raw", c.curvature.raw()}, {"learnable", c.curvature.is_learnable()}}},
          {"projector",
           {{"in_dim", c.projector.place.in_dim},
            {"out_dim", c.projector.place.out_dim},
            {"place", linear_map_json(c.projector.place)},
            {"object", linear_map_json(c.projector.object)}}},
          {"split", {{"train", c.train_scenes}, {"test", c.test_scenes}}},
          {"embeddings", entries}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  check_header(j, "hsg-checkpoint");
  return as_format("checkpoint", [&] {
    Checkpoint c;
    c.config_hash = j.at("config_hash").get<std::string>();
    c.dataset_hash = j.at("dataset_hash").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.train = train_config_from_json(j.at("train_config"));
    const std::string geometry = j.at("geometry").get<std::string>();
    if (geometry != "lorentz" && geometry != "euclidean") throw FormatError("unknown geometry '" + geometry + "'");
    c.geometry = geometry == "lorentz" ? Geometry::Lorentz : Geometry::Euclidean;
    const Json& curv = j.at("curvature");
    c.curvature = Curvature::from_raw(curv.at("raw").get<double>(), curv.at("learnable").get<bool>());
    const Json& proj = j.at("projector");
    const int in_dim = proj.at("in_dim").get<int>();
    const int out_dim = proj.at("out_dim").get<int>();
    c.projector.place = linear_map_from(proj.at("place"), in_dim, out_dim, "place head");
    c.projector.object = linear_map_from(proj.at("object"), in_dim, out_dim, "object head");
    c.train_scenes = ints_from_json(j.at("split").at("train"), "train split");
    c.test_scenes = ints_from_json(j.at("split").at("test"), "test split");
    c.table.curvature = c.curvature;
    c.table.geometry = c.geometry;
    const double r_max = max_tangent_norm(c.curvature);
    for (const Json& e : j.at("embeddings")) {
      EmbeddingEntry entry;
      entry.id = e.at("id").get<int>();
      entry.kind = kind_from(e.at("kind").get<std::string>());
      entry.scene = e.at("scene").get<int>();
      entry.view = e.at("view").get<int>();
      entry.tangent = vector_from_json(e.at("tangent"), "tangent");
      if (entry.tangent.size() != static_cast<std::size_t>(out_dim)) throw FormatError("tangent length differs from out_dim");
      if (c.geometry == Geometry::Lorentz && euclidean_norm(entry.tangent) > r_max * (1.0 + 1e-12)) {
        throw FormatError("tangent norm exceeds r_max");
      }
      if (e.contains("box")) entry.box = box_from_json(e.at("box"));
      c.table.entries.push_back(std::move(entry));
    }
    return c;
  });
}

Json to_json(const IouCounts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"iou", c.iou()}}; }

Json to_json(const MetricsReport& r) {
  Json matching = Json::array();
  for (const MatchedObject& m : r.matching) {
    matching.push_back({{"scene", m.scene}, {"gt_object", m.gt_object},
                        {"pred_object", m.pred_object < 0 ? Json(nullptr) : Json(m.pred_object)}});
  }
  return {{"recall_at_1", r.recall_at_1},
          {"pp_iou", r.pp_iou},
          {"po_iou", r.po_iou},
          {"graph_iou", r.graph_iou},
          {"counts", {{"pp", to_json(r.pp)}, {"po", to_json(r.po)}, {"graph", to_json(r.graph)}}},
          {"matching", matching}};
}

}  // namespace hsg
