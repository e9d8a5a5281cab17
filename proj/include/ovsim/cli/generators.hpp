#pragma once

#include <cstdint>
#include <string>

#include "ovsim/core/scene.hpp"

namespace ovsim::cli {

struct GenConfig {
  std::string kind;       // chain | bridge | bowl | building
  int workers = 2;
  int count = 0;          // links / planks / spheres / blocks; 0 = default
  std::uint64_t seed = 1;
  double dt = 0.002;
};

/// Deterministic scene generators.
///
/// chain:    vertical ball-jointed chain of spheres under a static anchor
///           (default 6 links); partition splits the chain into
///           contiguous runs.
/// bridge:   row of box planks ball-jointed end to end between two static
///           anchors (default 24 planks); sags under gravity.
/// bowl:     sloped static planes forming a basin, spheres dropped in a
///           jittered grid (default 300); partition by spawn quadrant.
/// building: square tower of stacked sphere layers on a floor plane
///           (default 4x4x4); partition by vertical slab.
Scene generate_scene(const GenConfig& cfg);

}  // namespace ovsim::cli
