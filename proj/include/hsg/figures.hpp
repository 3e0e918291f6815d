#pragma once

// CSV exports behind the root-distance histogram and the Poincare disk
// plots, plus the per-epoch loss history.

#include <string>
#include <vector>

#include "hsg/trainer.hpp"

namespace hsg {

struct DiskPoint {
  int id = 0;
  EntityKind kind = EntityKind::Place;
  double u = 0.0;
  double v = 0.0;
};

// Ball coordinates projected on the top two principal axes of their
// uncentred second moment, scaled by sqrt(c) into the unit disk. Each axis
// is signed so its largest-magnitude component is positive.
std::vector<DiskPoint> poincare_projection(const EmbeddingTable& table);

// entity_id,kind,tangent_norm,lorentz_root_distance, then one mean row per
// kind.
std::string hist_csv(const EmbeddingTable& table);
std::string poincare_csv(const EmbeddingTable& table);
// epoch,L_pr,L_obj,L_ent,total,curvature,lr
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace hsg
