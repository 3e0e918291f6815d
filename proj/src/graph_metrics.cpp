#include "hsg/graph_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

namespace hsg {

namespace {

// Pairwise distances among the given table rows.
std::vector<double> distance_matrix(const EmbeddingTable& table, const std::vector<std::size_t>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> d(n * n, 0.0);
  if (table.geometry == Geometry::Euclidean) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        d[a * n + b] = d[b * n + a] = table.distance(rows[a], rows[b]);
      }
    }
    return d;
  }
  std::vector<LorentzPoint> pts;
  pts.reserve(n);
  for (std::size_t r : rows) pts.push_back(table.point(r));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      d[a * n + b] = d[b * n + a] = lorentz_distance(pts[a], pts[b], table.curvature);
    }
  }
  return d;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

Vector fused_tangent(const EmbeddingTable& table, const std::vector<std::size_t>& members) {
  Vector mean(table.dim(), 0.0);
  for (std::size_t r : members) {
    const Vector t = table.geometry == Geometry::Euclidean
                         ? table.entries[r].tangent
                         : log_map_origin(table.point(r), table.curvature).space;
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i];
  }
  for (double& x : mean) x /= static_cast<double>(members.size());
  return mean;
}

// Unordered place pairs (upper triangle).
IouCounts upper_counts(const BinaryMatrix& pred, const BinaryMatrix& truth) {
  IouCounts c;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t j = i + 1; j < truth.cols(); ++j) {
      const bool p = pred.at(i, j);
      const bool t = truth.at(i, j);
      c.tp += p && t;
      c.fp += p && !t;
      c.fn += !p && t;
    }
  }
  return c;
}

std::size_t column_count(const BinaryMatrix& m, std::size_t j) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) n += m.at(i, j);
  return n;
}

}  // namespace

double similarity(const LorentzPoint& a, const LorentzPoint& b, const Curvature& curv) {
  return std::exp(-lorentz_distance(a, b, curv));
}

void Thresholds::validate() const {
  if (!(place > 0.0 && place < 1.0)) throw ConfigError("place threshold must be in (0, 1)");
  if (!(object > 0.0 && object < 1.0)) throw ConfigError("object threshold must be in (0, 1)");
}

PredictedGraph build_graph(const EmbeddingTable& table, const Thresholds& thresholds) {
  thresholds.validate();
  if (table.entries.empty()) throw PreconditionError("build_graph: empty table");
  // Similarity >= t  <=>  d <= -ln t.
  const double place_radius = -std::log(thresholds.place);
  const double object_radius = -std::log(thresholds.object);

  std::vector<std::size_t> place_rows;
  std::map<int, std::vector<std::size_t>> objects_by_scene;
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const EmbeddingEntry& e = table.entries[k];
    if (e.kind == EntityKind::Place) {
      place_rows.push_back(k);
    } else {
      objects_by_scene[e.scene].push_back(k);
    }
  }

  PredictedGraph out;
  SceneGraph& g = out.graph;
  std::unordered_map<int, std::size_t> place_of_frame;
  for (std::size_t r : place_rows) {
    const EmbeddingEntry& e = table.entries[r];
    if (!place_of_frame.emplace(e.view, g.places.size()).second) {
      throw FormatError("build_graph: duplicate place view " + std::to_string(e.view));
    }
    g.places.push_back({e.view, e.scene});
  }
  g.pp = BinaryMatrix(place_rows.size(), place_rows.size());
  {
    const std::vector<double> d = distance_matrix(table, place_rows);
    const std::size_t n = place_rows.size();
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (table.entries[place_rows[a]].scene != table.entries[place_rows[b]].scene) continue;
        if (d[a * n + b] <= place_radius) {
          g.pp.set(a, b);
          g.pp.set(b, a);
        }
      }
    }
  }

  for (auto& [scene, rows] : objects_by_scene) {
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return table.entries[a].id < table.entries[b].id; });
    const std::size_t n = rows.size();
    const std::vector<double> d = distance_matrix(table, rows);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (d[a * n + b] > object_radius) continue;
        const std::size_t ra = find_root(parent, a);
        const std::size_t rb = find_root(parent, b);
        // The root of a cluster is always its lowest-id member.
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
    std::map<std::size_t, std::vector<std::size_t>> clusters;
    for (std::size_t a = 0; a < n; ++a) clusters[find_root(parent, a)].push_back(rows[a]);
    for (auto& [root, members] : clusters) {
      g.objects.push_back({table.entries[rows[root]].id, scene});
      out.object_tangents.push_back(fused_tangent(table, members));
      out.members.push_back(members);
    }
  }

  g.po = BinaryMatrix(g.places.size(), g.objects.size());
  for (std::size_t j = 0; j < out.members.size(); ++j) {
    std::set<int> frames;
    for (std::size_t r : out.members[j]) {
      const EmbeddingEntry& e = table.entries[r];
      const auto place = place_of_frame.find(e.view);
      if (place != place_of_frame.end()) g.po.set(place->second, j);
      // Members are in id order, so the first box per frame wins.
      if (e.box && frames.insert(e.view).second) g.tracks.push_back({g.objects[j].id, e.view, *e.box, true});
    }
  }
  return out;
}

double IouCounts::iou() const {
  if (empty()) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

IouCounts adjacency_counts(const BinaryMatrix& pred, const BinaryMatrix& truth) {
  if (pred.rows() != truth.rows()) throw DimensionError(pred.rows(), truth.rows(), "adjacency_iou rows");
  if (pred.cols() != truth.cols()) throw DimensionError(pred.cols(), truth.cols(), "adjacency_iou cols");
  IouCounts c;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t j = 0; j < truth.cols(); ++j) {
      const bool p = pred.at(i, j);
      const bool t = truth.at(i, j);
      c.tp += p && t;
      c.fp += p && !t;
      c.fn += !p && t;
    }
  }
  return c;
}

double adjacency_iou(const BinaryMatrix& a, const BinaryMatrix& b) { return adjacency_counts(a, b).iou(); }

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) throw PreconditionError("box_iou: degenerate box");
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) throw PreconditionError("giou: degenerate box");
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  const double hull = (std::max(a.x2, b.x2) - std::min(a.x1, b.x1)) * (std::max(a.y2, b.y2) - std::min(a.y1, b.y1));
  return inter / uni - (hull - uni) / hull;
}

ObjectMatching match_objects(const std::vector<ObjectNode>& gt_objects, const std::vector<TrackEntry>& gt_tracks,
                             const std::vector<ObjectNode>& pred_objects,
                             const std::vector<TrackEntry>& pred_tracks) {
  std::unordered_map<int, std::size_t> gt_index;
  std::unordered_map<int, std::size_t> pred_index;
  for (std::size_t i = 0; i < gt_objects.size(); ++i) gt_index[gt_objects[i].id] = i;
  for (std::size_t j = 0; j < pred_objects.size(); ++j) pred_index[pred_objects[j].id] = j;

  // frame -> (object row, box) for present detections.
  std::map<int, std::vector<std::pair<std::size_t, BoundingBox>>> gt_by_frame;
  std::map<int, std::vector<std::pair<std::size_t, BoundingBox>>> pred_by_frame;
  for (const TrackEntry& t : gt_tracks) {
    const auto it = gt_index.find(t.object);
    if (t.present && it != gt_index.end()) gt_by_frame[t.frame].push_back({it->second, t.box});
  }
  for (const TrackEntry& t : pred_tracks) {
    const auto it = pred_index.find(t.object);
    if (t.present && it != pred_index.end()) pred_by_frame[t.frame].push_back({it->second, t.box});
  }

  ObjectMatching out;
  out.scores = ScoreMatrix(gt_objects.size(), pred_objects.size());
  for (const auto& [frame, gts] : gt_by_frame) {
    const auto preds = pred_by_frame.find(frame);
    if (preds == pred_by_frame.end()) continue;
    for (const auto& [i, gb] : gts) {
      for (const auto& [j, pb] : preds->second) out.scores(i, j) += giou(gb, pb);
    }
  }
  out.assignment = max_weight_assignment(out.scores);
  return out;
}

MetricsReport evaluate(const SceneGraph& pred, const SceneGraph& gt) {
  MetricsReport report;
  std::vector<int> scenes = gt.scenes();
  for (int s : pred.scenes()) {
    if (!std::binary_search(scenes.begin(), scenes.end(), s)) {
      throw FormatError("evaluate: predicted scene " + std::to_string(s) + " missing from ground truth");
    }
  }
  for (int scene : scenes) {
    const SceneGraph g = gt.scene(scene);
    const SceneGraph p = pred.scene(scene);
    if (g.places.size() != p.places.size()) throw FormatError("evaluate: place sets differ in scene " + std::to_string(scene));

    // Align predicted place rows to ground-truth order by frame id.
    std::unordered_map<int, std::size_t> pred_row;
    for (std::size_t i = 0; i < p.places.size(); ++i) pred_row[p.places[i].id] = i;
    std::vector<std::size_t> row(g.places.size());
    for (std::size_t i = 0; i < g.places.size(); ++i) {
      const auto it = pred_row.find(g.places[i].id);
      if (it == pred_row.end()) throw FormatError("evaluate: frame " + std::to_string(g.places[i].id) + " not predicted");
      row[i] = it->second;
    }
    const std::size_t np = g.places.size();
    BinaryMatrix pp(np, np);
    for (std::size_t a = 0; a < np; ++a) {
      for (std::size_t b = 0; b < np; ++b) pp.set(a, b, p.pp.at(row[a], row[b]));
    }
    report.pp += upper_counts(pp, g.pp);

    const ObjectMatching m = match_objects(g.objects, g.tracks, p.objects, p.tracks);
    std::vector<bool> pred_used(p.objects.size(), false);
    IouCounts po;
    for (std::size_t i = 0; i < g.objects.size(); ++i) {
      const int j = m.assignment.row_to_col[i];
      report.matching.push_back({scene, g.objects[i].id, j >= 0 ? p.objects[static_cast<std::size_t>(j)].id : -1});
      if (j < 0) {
        po.fn += column_count(g.po, i);
        continue;
      }
      pred_used[static_cast<std::size_t>(j)] = true;
      for (std::size_t a = 0; a < np; ++a) {
        const bool pv = p.po.at(row[a], static_cast<std::size_t>(j));
        const bool tv = g.po.at(a, i);
        po.tp += pv && tv;
        po.fp += pv && !tv;
        po.fn += !pv && tv;
      }
    }
    for (std::size_t j = 0; j < p.objects.size(); ++j) {
      if (!pred_used[j]) po.fp += column_count(p.po, j);
    }
    report.po += po;
  }
  report.graph = report.pp;
  report.graph += report.po;
  report.pp_iou = report.pp.iou();
  report.po_iou = report.po.iou();
  report.graph_iou = report.graph.iou();
  return report;
}

double recall_at_1(const EmbeddingTable& table, const SceneGraph& gt) {
  std::map<int, std::vector<std::size_t>> by_scene;
  std::size_t total = 0;
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    if (table.entries[k].kind == EntityKind::Place) {
      by_scene[table.entries[k].scene].push_back(k);
      ++total;
    }
  }
  if (total < 2) throw PreconditionError("recall_at_1: need at least 2 place views");
  std::unordered_map<int, std::size_t> gt_row;
  for (std::size_t i = 0; i < gt.places.size(); ++i) gt_row[gt.places[i].id] = i;

  std::size_t queries = 0;
  std::size_t hits = 0;
  for (const auto& [scene, rows] : by_scene) {
    const std::size_t n = rows.size();
    if (n < 2) continue;
    const std::vector<double> d = distance_matrix(table, rows);
    for (std::size_t a = 0; a < n; ++a) {
      std::size_t best = a == 0 ? 1 : 0;
      for (std::size_t b = 0; b < n; ++b) {
        if (b != a && d[a * n + b] < d[a * n + best]) best = b;
      }
      const auto qa = gt_row.find(table.entries[rows[a]].view);
      const auto qb = gt_row.find(table.entries[rows[best]].view);
      if (qa == gt_row.end() || qb == gt_row.end()) throw FormatError("recall_at_1: view missing from ground truth");
      ++queries;
      hits += gt.pp.at(qa->second, qb->second);
    }
  }
  if (queries == 0) throw PreconditionError("recall_at_1: no scene has two place views");
  return static_cast<double>(hits) / static_cast<double>(queries);
}

MetricsReport evaluate_table(const EmbeddingTable& table, const SceneGraph& gt, const Thresholds& thresholds) {
  const PredictedGraph pred = build_graph(table, thresholds);
  MetricsReport report = evaluate(pred.graph, gt);
  report.recall_at_1 = recall_at_1(table, gt);
  return report;
}

}  // namespace hsg
