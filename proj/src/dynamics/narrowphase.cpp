#include "ovsim/dynamics/narrowphase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

namespace ovsim::dynamics {
namespace {

constexpr double kContactEps = 0.0;  // depth >= 0 counts as touching

void emit(std::vector<Contact>& out, BodyId a, BodyId b, const Vec3& point,
          const Vec3& normal_b_to_a, double depth, std::uint32_t feature) {
  Contact c;
  c.body_a = a;
  c.body_b = b;
  c.point = point;
  c.normal = normal_b_to_a;
  c.depth = depth;
  c.feature = feature;
  out.push_back(c);
}

void sphere_sphere(const RigidBody& a, const BodyState& sa,
                   const RigidBody& b, const BodyState& sb,
                   std::vector<Contact>& out) {
  const double ra = a.shape.radius;
  const double rb = b.shape.radius;
  Vec3 d = sa.position - sb.position;
  const double dist = d.norm();
  const double depth = ra + rb - dist;
  if (depth < kContactEps) return;
  Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3(0.0, 1.0, 0.0);
  Vec3 point = 0.5 * ((sa.position - n * ra) + (sb.position + n * rb));
  emit(out, a.id, b.id, point, n, depth, 0);
}

// Signed distance from a world point to the plane (positive on the
// normal side).
double plane_gap(const Shape& plane, const Vec3& p) {
  return plane.normal.dot(p) - plane.offset;
}

void sphere_plane(const RigidBody& sphere, const BodyState& ss,
                  const RigidBody& plane, bool sphere_is_a,
                  std::vector<Contact>& out) {
  const double gap = plane_gap(plane.shape, ss.position) - sphere.shape.radius;
  if (gap > 0.0) return;
  const double depth = -gap;
  const Vec3& n = plane.shape.normal;
  Vec3 point = ss.position - n * (sphere.shape.radius - 0.5 * depth);
  if (sphere_is_a) {
    emit(out, sphere.id, plane.id, point, n, depth, 0);
  } else {
    emit(out, plane.id, sphere.id, point, -n, depth, 0);
  }
}

void box_plane(const RigidBody& box, const BodyState& bs,
               const RigidBody& plane, bool box_is_a,
               std::vector<Contact>& out) {
  const Vec3 he = box.shape.half_extents;
  const Mat3 rot = bs.orientation.toRotationMatrix();
  for (std::uint32_t i = 0; i < 8; ++i) {
    Vec3 local((i & 1) ? he.x() : -he.x(),
               (i & 2) ? he.y() : -he.y(),
               (i & 4) ? he.z() : -he.z());
    Vec3 corner = rot * local + bs.position;
    const double gap = plane_gap(plane.shape, corner);
    if (gap > 0.0) continue;
    const Vec3& n = plane.shape.normal;
    if (box_is_a) {
      emit(out, box.id, plane.id, corner, n, -gap, i);
    } else {
      emit(out, plane.id, box.id, corner, -n, -gap, i);
    }
  }
}

void sphere_box(const RigidBody& sphere, const BodyState& ss,
                const RigidBody& box, const BodyState& bs, bool sphere_is_a,
                std::vector<Contact>& out) {
  const Vec3 he = box.shape.half_extents;
  const Mat3 rot = bs.orientation.toRotationMatrix();
  Vec3 local = rot.transpose() * (ss.position - bs.position);
  Vec3 clamped = local.cwiseMax(-he).cwiseMin(he);
  Vec3 n_local;
  Vec3 point_local;
  double depth;
  if ((local - clamped).squaredNorm() > 1e-24) {
    Vec3 delta = local - clamped;
    const double dist = delta.norm();
    depth = sphere.shape.radius - dist;
    if (depth < kContactEps) return;
    n_local = delta / dist;
    point_local = clamped;
  } else {
    // Center inside the box: push out along the least-penetrated face.
    int axis = 0;
    double best = he.x() - std::abs(local.x());
    for (int k = 1; k < 3; ++k) {
      const double margin = he[k] - std::abs(local[k]);
      if (margin < best) {
        best = margin;
        axis = k;
      }
    }
    n_local = Vec3::Zero();
    n_local[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
    depth = sphere.shape.radius + best;
    point_local = local;
    point_local[axis] = n_local[axis] * he[axis];
  }
  Vec3 n = rot * n_local;  // box -> sphere
  Vec3 point = rot * point_local + bs.position;
  if (sphere_is_a) {
    emit(out, sphere.id, box.id, point, n, depth, 0);
  } else {
    emit(out, box.id, sphere.id, point, -n, depth, 0);
  }
}

// Cell key for the uniform grid (20 bits per axis, biased).
std::uint64_t cell_key(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
  auto fold = [](std::int64_t v) -> std::uint64_t {
    return static_cast<std::uint64_t>(v + (1 << 19)) & 0xFFFFF;
  };
  return (fold(ix) << 40) | (fold(iy) << 20) | fold(iz);
}

constexpr std::size_t kGridThreshold = 64;

}  // namespace

void collide_pair(const RigidBody& a, const BodyState& sa,
                  const RigidBody& b, const BodyState& sb,
                  std::vector<Contact>& out) {
  const ShapeKind ka = a.shape.kind;
  const ShapeKind kb = b.shape.kind;
  if (ka == ShapeKind::Sphere && kb == ShapeKind::Sphere) {
    sphere_sphere(a, sa, b, sb, out);
  } else if (ka == ShapeKind::Sphere && kb == ShapeKind::StaticPlane) {
    sphere_plane(a, sa, b, true, out);
  } else if (ka == ShapeKind::StaticPlane && kb == ShapeKind::Sphere) {
    sphere_plane(b, sb, a, false, out);
  } else if (ka == ShapeKind::Box && kb == ShapeKind::StaticPlane) {
    box_plane(a, sa, b, true, out);
  } else if (ka == ShapeKind::StaticPlane && kb == ShapeKind::Box) {
    box_plane(b, sb, a, false, out);
  } else if (ka == ShapeKind::Sphere && kb == ShapeKind::Box) {
    sphere_box(a, sa, b, sb, true, out);
  } else if (ka == ShapeKind::Box && kb == ShapeKind::Sphere) {
    sphere_box(b, sb, a, sa, false, out);
  }
  // box-box and anything touching two planes: unsupported, no contact
}

std::vector<Contact> detect_collisions(const Scene& scene,
                                       const std::vector<BodyState>& states,
                                       const std::vector<BodyId>& active) {
  // Participants: the given active dynamic bodies plus every static body.
  std::vector<BodyId> finite;   // spheres and boxes (dynamic-active + static)
  std::vector<BodyId> planes;
  finite.reserve(active.size());
  for (BodyId id : active) finite.push_back(id);
  for (const RigidBody& b : scene.bodies) {
    if (!b.is_static()) continue;
    if (b.shape.kind == ShapeKind::StaticPlane) {
      planes.push_back(b.id);
    } else {
      finite.push_back(b.id);
    }
  }
  std::sort(finite.begin(), finite.end());

  std::vector<std::pair<BodyId, BodyId>> pairs;
  if (finite.size() <= kGridThreshold) {
    for (std::size_t i = 0; i < finite.size(); ++i) {
      for (std::size_t j = i + 1; j < finite.size(); ++j) {
        pairs.emplace_back(finite[i], finite[j]);
      }
    }
  } else {
    double max_r = 0.0;
    for (BodyId id : finite) {
      max_r = std::max(max_r, scene.body(id).shape.bounding_radius());
    }
    const double cell = std::max(2.0 * max_r, 1e-6);
    std::unordered_map<std::uint64_t, std::vector<BodyId>> grid;
    for (BodyId id : finite) {
      const double r = scene.body(id).shape.bounding_radius();
      const Vec3& p = states[id].position;
      auto lo = [&](int k) {
        return static_cast<std::int64_t>(std::floor((p[k] - r) / cell));
      };
      auto hi = [&](int k) {
        return static_cast<std::int64_t>(std::floor((p[k] + r) / cell));
      };
      for (std::int64_t ix = lo(0); ix <= hi(0); ++ix)
        for (std::int64_t iy = lo(1); iy <= hi(1); ++iy)
          for (std::int64_t iz = lo(2); iz <= hi(2); ++iz)
            grid[cell_key(ix, iy, iz)].push_back(id);
    }
    std::unordered_set<std::uint64_t> seen;
    for (auto& [key, ids] : grid) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          BodyId a = std::min(ids[i], ids[j]);
          BodyId b = std::max(ids[i], ids[j]);
          if (seen.insert(contact_pair_key(a, b)).second) {
            const double ra = scene.body(a).shape.bounding_radius();
            const double rb = scene.body(b).shape.bounding_radius();
            if ((states[a].position - states[b].position).norm() <= ra + rb) {
              pairs.emplace_back(a, b);
            }
          }
        }
      }
    }
    std::sort(pairs.begin(), pairs.end());
  }

  std::vector<Contact> contacts;
  for (auto [a, b] : pairs) {
    const RigidBody& ba = scene.body(a);
    const RigidBody& bb = scene.body(b);
    if (ba.is_static() && bb.is_static()) continue;
    collide_pair(ba, states[a], bb, states[b], contacts);
  }
  // Every active dynamic body against every plane.
  for (BodyId id : active) {
    for (BodyId pl : planes) {
      BodyId a = std::min(id, pl);
      BodyId b = std::max(id, pl);
      collide_pair(scene.body(a), states[a], scene.body(b), states[b],
                   contacts);
    }
  }
  std::sort(contacts.begin(), contacts.end(),
            [](const Contact& x, const Contact& y) {
              if (x.body_a != y.body_a) return x.body_a < y.body_a;
              if (x.body_b != y.body_b) return x.body_b < y.body_b;
              return x.feature < y.feature;
            });
  return contacts;
}

}  // namespace ovsim::dynamics
