#pragma once

// Scene-graph reconstruction from an embedding table and the evaluation
// suite: adjacency IoU, GIoU, truth-to-result object matching and
// Recall@1.

#include <vector>

#include "hsg/assignment.hpp"
#include "hsg/scene_graph.hpp"
#include "hsg/trainer.hpp"

namespace hsg {

inline constexpr double kDefaultPlaceThreshold = 0.3;
inline constexpr double kDefaultObjectThreshold = 0.2;

// exp(-d) for the Lorentz distance d.
double similarity(const LorentzPoint& a, const LorentzPoint& b, const Curvature& curv);

struct Thresholds {
  double place = kDefaultPlaceThreshold;
  double object = kDefaultObjectThreshold;

  void validate() const;
};

struct PredictedGraph {
  SceneGraph graph;
  // Fused tangent of each predicted object (mean of member log maps).
  std::vector<Vector> object_tangents;
  // Table rows of the members of each predicted object, ascending.
  std::vector<std::vector<std::size_t>> members;
};

// Place-place edges join views of one scene whose similarity reaches the
// place threshold. Object observations of one scene are merged by single
// linkage at the object threshold; a predicted object is adjacent to every
// view one of its members was observed in. Object node ids are the lowest
// member entity id; its per-frame box is that of the lowest-id member seen
// in the frame.
PredictedGraph build_graph(const EmbeddingTable& table, const Thresholds& thresholds);

struct IouCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // TP / (TP + FP + FN), with 0/0 read as 1.
  double iou() const;
  bool empty() const { return tp + fp + fn == 0; }
  IouCounts& operator+=(const IouCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const IouCounts&, const IouCounts&) = default;
};

// Entry-wise counts with `pred` against `truth` (equal shapes).
IouCounts adjacency_counts(const BinaryMatrix& pred, const BinaryMatrix& truth);
double adjacency_iou(const BinaryMatrix& a, const BinaryMatrix& b);

double box_iou(const BoundingBox& a, const BoundingBox& b);
double giou(const BoundingBox& a, const BoundingBox& b);

struct ObjectMatching {
  ScoreMatrix scores;  // ground-truth objects x predicted objects
  Assignment assignment;
};

// S(i, j) sums GIoU over frames where both objects are present.
ObjectMatching match_objects(const std::vector<ObjectNode>& gt_objects, const std::vector<TrackEntry>& gt_tracks,
                             const std::vector<ObjectNode>& pred_objects,
                             const std::vector<TrackEntry>& pred_tracks);

struct MatchedObject {
  int scene = 0;
  int gt_object = 0;
  int pred_object = 0;  // -1 when unmatched
};

struct MetricsReport {
  double recall_at_1 = 0.0;
  double pp_iou = 0.0;
  double po_iou = 0.0;
  double graph_iou = 0.0;
  IouCounts pp;     // unordered place pairs
  IouCounts po;
  IouCounts graph;  // pp + po
  std::vector<MatchedObject> matching;
};

// Scene by scene: places are aligned by frame id, objects by match_objects.
// Counts are pooled over scenes. Unmatched predicted objects contribute
// their edges as FP, unmatched ground-truth objects as FN. recall_at_1 is
// left at 0.
MetricsReport evaluate(const SceneGraph& pred, const SceneGraph& gt);

// Leave-one-out: each place view retrieves its nearest other place view of
// the same scene; a hit is a ground-truth place-place edge.
double recall_at_1(const EmbeddingTable& table, const SceneGraph& gt);

// build_graph + evaluate + recall_at_1.
MetricsReport evaluate_table(const EmbeddingTable& table, const SceneGraph& gt, const Thresholds& thresholds);

}  // namespace hsg
