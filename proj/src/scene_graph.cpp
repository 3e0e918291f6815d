#include "hsg/scene_graph.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace hsg {

void SceneGraph::validate() const {
  const std::size_t np = places.size();
  const std::size_t no = objects.size();
  if (pp.rows() != np || pp.cols() != np) throw FormatError("scene graph: A_pp shape does not match place count");
  if (po.rows() != np || po.cols() != no) throw FormatError("scene graph: A_po shape does not match node counts");
  for (std::size_t i = 0; i < np; ++i) {
    if (pp.at(i, i)) throw FormatError("scene graph: A_pp has a self loop");
    for (std::size_t j = i + 1; j < np; ++j) {
      if (pp.at(i, j) != pp.at(j, i)) throw FormatError("scene graph: A_pp is not symmetric");
    }
  }
  for (const TrackEntry& t : tracks) {
    if (t.present && !t.box.valid()) {
      throw FormatError("scene graph: invalid box for object " + std::to_string(t.object));
    }
  }
}

std::vector<int> SceneGraph::scenes() const {
  std::vector<int> ids;
  for (const auto& p : places) ids.push_back(p.scene);
  for (const auto& o : objects) ids.push_back(o.scene);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

SceneGraph SceneGraph::scene(int scene_id) const {
  SceneGraph out;
  std::vector<std::size_t> place_rows;
  std::vector<std::size_t> object_cols;
  for (std::size_t i = 0; i < places.size(); ++i) {
    if (places[i].scene == scene_id) {
      place_rows.push_back(i);
      out.places.push_back(places[i]);
    }
  }
  std::unordered_map<int, bool> scene_objects;
  for (std::size_t j = 0; j < objects.size(); ++j) {
    if (objects[j].scene == scene_id) {
      object_cols.push_back(j);
      out.objects.push_back(objects[j]);
      scene_objects[objects[j].id] = true;
    }
  }
  out.pp = BinaryMatrix(place_rows.size(), place_rows.size());
  out.po = BinaryMatrix(place_rows.size(), object_cols.size());
  for (std::size_t a = 0; a < place_rows.size(); ++a) {
    for (std::size_t b = 0; b < place_rows.size(); ++b) out.pp.set(a, b, pp.at(place_rows[a], place_rows[b]));
    for (std::size_t b = 0; b < object_cols.size(); ++b) out.po.set(a, b, po.at(place_rows[a], object_cols[b]));
  }
  for (const TrackEntry& t : tracks) {
    if (scene_objects.count(t.object)) out.tracks.push_back(t);
  }
  return out;
}

}  // namespace hsg
