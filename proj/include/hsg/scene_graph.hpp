#pragma once

#include <cstdint>
#include <vector>

#include "hsg/error.hpp"

namespace hsg {

// Axis-aligned box in pixel coordinates.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x1 < x2 && y1 < y2; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v = true) { data_[i * cols_ + j] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data_) n += v;
    return n;
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

// A place node is one view (frame); its id is the frame id.
struct PlaceNode {
  int id = 0;
  int scene = 0;
  friend bool operator==(const PlaceNode&, const PlaceNode&) = default;
};

struct ObjectNode {
  int id = 0;
  int scene = 0;
  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

// Detection of an object in a frame. Absent (object, frame) combinations
// are simply not listed; `present` is kept for the file schema.
struct TrackEntry {
  int object = 0;
  int frame = 0;
  BoundingBox box;
  bool present = true;
  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

struct SceneGraph {
  std::vector<PlaceNode> places;
  std::vector<ObjectNode> objects;
  BinaryMatrix pp;  // places x places, symmetric, zero diagonal
  BinaryMatrix po;  // places x objects
  std::vector<TrackEntry> tracks;

  void validate() const;
  std::vector<int> scenes() const;
  // Nodes, edges and tracks restricted to one scene (order preserved).
  SceneGraph scene(int scene_id) const;

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

}  // namespace hsg
