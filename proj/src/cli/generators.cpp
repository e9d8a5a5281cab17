#include "ovsim/cli/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ovsim::cli {
namespace {

// Portable uniform double in [0, 1); distribution classes vary across
// standard libraries, raw engine output does not.
double next_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RigidBody make_body(BodyId id, Shape shape, double mass, const Vec3& pos,
                    WorkerId partition, double friction = 0.5) {
  RigidBody b;
  b.id = id;
  b.shape = shape;
  b.mass = mass;
  b.friction = friction;
  b.initial_state.position = pos;
  b.initial_partition = partition;
  b.inertia = compute_inertia(shape, mass);
  b.inv_inertia = mass > 0.0 ? Mat3(b.inertia.inverse()) : Mat3::Zero();
  return b;
}

Scene gen_chain(const GenConfig& cfg) {
  const int links = cfg.count > 0 ? cfg.count : 6;
  const double spacing = 0.25;
  Scene s;
  s.timestep = cfg.dt;
  s.num_workers = cfg.workers;
  s.bodies.push_back(
      make_body(0, Shape::sphere(0.05), 0.0, Vec3::Zero(), 0));
  for (int i = 1; i <= links; ++i) {
    const auto worker =
        static_cast<WorkerId>((i - 1) * cfg.workers / links);
    s.bodies.push_back(make_body(static_cast<BodyId>(i), Shape::sphere(0.08),
                                 1.0, Vec3(0.0, -spacing * i, 0.0), worker,
                                 0.0));
  }
  for (int i = 0; i < links; ++i) {
    JointSpec j;
    j.id = static_cast<ConstraintId>(i);
    j.body_a = static_cast<BodyId>(i);
    j.body_b = static_cast<BodyId>(i + 1);
    j.anchor_a = Vec3(0.0, -spacing / 2.0, 0.0);
    j.anchor_b = Vec3(0.0, spacing / 2.0, 0.0);
    s.joints.push_back(j);
  }
  return s;
}

Scene gen_bridge(const GenConfig& cfg) {
  const int planks = cfg.count > 0 ? cfg.count : 24;
  const double spacing = 0.25;
  Scene s;
  s.timestep = cfg.dt;
  s.num_workers = cfg.workers;
  s.bodies.push_back(
      make_body(0, Shape::sphere(0.05), 0.0, Vec3::Zero(), 0));
  for (int i = 1; i <= planks; ++i) {
    const auto worker =
        static_cast<WorkerId>((i - 1) * cfg.workers / planks);
    s.bodies.push_back(make_body(
        static_cast<BodyId>(i), Shape::box(Vec3(0.11, 0.02, 0.06)), 1.0,
        Vec3(spacing * i, 0.0, 0.0), worker, 0.3));
  }
  s.bodies.push_back(make_body(static_cast<BodyId>(planks + 1),
                               Shape::sphere(0.05), 0.0,
                               Vec3(spacing * (planks + 1), 0.0, 0.0), 0));
  for (int i = 0; i <= planks; ++i) {
    JointSpec j;
    j.id = static_cast<ConstraintId>(i);
    j.body_a = static_cast<BodyId>(i);
    j.body_b = static_cast<BodyId>(i + 1);
    j.anchor_a = Vec3(spacing / 2.0, 0.0, 0.0);
    j.anchor_b = Vec3(-spacing / 2.0, 0.0, 0.0);
    s.joints.push_back(j);
  }
  return s;
}

Scene gen_bowl(const GenConfig& cfg) {
  const int count = cfg.count > 0 ? cfg.count : 300;
  const double radius = 0.06;
  const double rim = std::max(1.2, 1.2 * std::sqrt(count / 300.0));
  std::mt19937_64 rng(cfg.seed);

  Scene s;
  s.timestep = cfg.dt;
  s.num_workers = cfg.workers;

  const double span = rim - 0.3;
  const double spacing = 0.15;
  const int per_row = std::max(1, static_cast<int>(2.0 * span / spacing));
  int placed = 0;
  for (int layer = 0; placed < count; ++layer) {
    for (int ix = 0; ix < per_row && placed < count; ++ix) {
      for (int iz = 0; iz < per_row && placed < count; ++iz) {
        // Jitter stays below the grid clearance (spacing - 2r = 0.03) so
        // no two spheres spawn interpenetrated, and the drop is shallow
        // enough that landings do not eject the pile: both would inject
        // energy through the penetration-correction term and keep the
        // basin from ever settling.
        const double x = -span + spacing * ix +
                         0.02 * (next_double(rng) - 0.5);
        const double z = -span + spacing * iz +
                         0.02 * (next_double(rng) - 0.5);
        const double y = 0.08 + 0.14 * layer + 0.01 * next_double(rng);
        const int quad = (x >= 0.0 ? 1 : 0) + (z >= 0.0 ? 2 : 0);
        const auto worker = static_cast<WorkerId>(quad % cfg.workers);
        s.bodies.push_back(make_body(static_cast<BodyId>(placed),
                                     Shape::sphere(radius), 0.5,
                                     Vec3(x, y, z), worker, 0.4));
        ++placed;
      }
    }
  }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  auto add_plane = [&](const Vec3& n, double offset) {
    const auto id = static_cast<BodyId>(s.bodies.size());
    RigidBody plane = make_body(id, Shape::static_plane(n, offset), 0.0,
                                Vec3::Zero(), 0);
    s.bodies.push_back(plane);
  };
  add_plane(Vec3(0.0, 1.0, 0.0), 0.0);
  add_plane(Vec3(-inv_sqrt2, inv_sqrt2, 0.0), -rim * inv_sqrt2);
  add_plane(Vec3(inv_sqrt2, inv_sqrt2, 0.0), -rim * inv_sqrt2);
  add_plane(Vec3(0.0, inv_sqrt2, -inv_sqrt2), -rim * inv_sqrt2);
  add_plane(Vec3(0.0, inv_sqrt2, inv_sqrt2), -rim * inv_sqrt2);
  return s;
}

Scene gen_building(const GenConfig& cfg) {
  const int count = cfg.count > 0 ? cfg.count : 64;
  const int cols = std::max(1, static_cast<int>(std::round(
                                   std::cbrt(static_cast<double>(count)))));
  const double radius = 0.1;
  const double spacing = 2.0 * radius;
  Scene s;
  s.timestep = cfg.dt;
  s.num_workers = cfg.workers;
  int placed = 0;
  for (int layer = 0; placed < count; ++layer) {
    for (int ix = 0; ix < cols && placed < count; ++ix) {
      for (int iz = 0; iz < cols && placed < count; ++iz) {
        const auto worker = static_cast<WorkerId>(ix % cfg.workers);
        s.bodies.push_back(make_body(
            static_cast<BodyId>(placed), Shape::sphere(radius), 1.0,
            Vec3(spacing * ix, radius + spacing * layer, spacing * iz),
            worker, 0.6));
        ++placed;
      }
    }
  }
  const auto id = static_cast<BodyId>(s.bodies.size());
  s.bodies.push_back(make_body(id, Shape::static_plane(Vec3(0, 1, 0), 0.0),
                               0.0, Vec3::Zero(), 0));
  return s;
}

}  // namespace

Scene generate_scene(const GenConfig& cfg) {
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (cfg.kind == "chain") return gen_chain(cfg);
  if (cfg.kind == "bridge") return gen_bridge(cfg);
  if (cfg.kind == "bowl") return gen_bowl(cfg);
  if (cfg.kind == "building") return gen_building(cfg);
  throw std::invalid_argument("unknown scene kind: " + cfg.kind);
}

}  // namespace ovsim::cli
