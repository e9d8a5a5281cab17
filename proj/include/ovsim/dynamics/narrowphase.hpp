#pragma once

#include <vector>

#include "ovsim/core/scene.hpp"
#include "ovsim/core/types.hpp"

namespace ovsim::dynamics {

/// Narrowphase for one canonical pair (a.id < b.id required). Appends any
/// contacts to `out` with normals pointing from b towards a. Supported
/// pairs: sphere-sphere, sphere-plane, box-plane, sphere-box; anything
/// else yields no contact.
void collide_pair(const RigidBody& a, const BodyState& sa,
                  const RigidBody& b, const BodyState& sb,
                  std::vector<Contact>& out);

/// Collision pass over the given active dynamic bodies plus every static
/// body of the scene. Output is deterministic: sorted by
/// (body_a, body_b, feature). Static-static pairs are never tested.
std::vector<Contact> detect_collisions(const Scene& scene,
                                       const std::vector<BodyState>& states,
                                       const std::vector<BodyId>& active);

}  // namespace ovsim::dynamics
