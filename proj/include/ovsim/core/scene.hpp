#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ovsim/core/types.hpp"

namespace ovsim {

/// Immutable scene description. Safe to share read-only across threads
/// after construction.
struct Scene {
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);
  double timestep = 0.002;  // seconds
  int num_workers = 1;
  std::vector<RigidBody> bodies;  // indexed by BodyId (ids are dense)
  std::vector<JointSpec> joints;

  const RigidBody& body(BodyId id) const { return bodies.at(id); }
  bool is_static(BodyId id) const { return bodies.at(id).is_static(); }

  /// Number of non-static bodies (the set A).
  std::size_t dynamic_count() const;

  /// Ids of all non-static bodies, ascending.
  std::vector<BodyId> dynamic_ids() const;

  /// Diagonal of the bounding box of all finite bodies in their initial
  /// placement. Used to normalize joint-violation metrics.
  double bounding_box_diagonal() const;
};

/// Worst anchor separation (meters) across the scene's joints, evaluated
/// against per-body states indexed by BodyId. Joints between two static
/// bodies are ignored.
double max_joint_gap(const Scene& scene, const std::vector<BodyState>& states);

/// Parses and validates a scene file (UTF-8 JSON).
/// Throws ParseError on malformed input and ValidationError on invariant
/// violations (duplicate or non-dense ids, non-unit quaternion, unknown
/// partition label, bad joint endpoints).
Scene load_scene(const std::string& path);

/// Same validation as load_scene, starting from an in-memory JSON string.
Scene parse_scene(const std::string& json_text);

/// Inverse of parse_scene: emits JSON that round-trips to an equal Scene.
std::string serialize_scene(const Scene& scene);

void save_scene(const Scene& scene, const std::string& path);

bool scenes_equal(const Scene& a, const Scene& b);

}  // namespace ovsim
