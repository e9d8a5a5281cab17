#include "ovsim/core/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace ovsim {

namespace {

using nlohmann::ordered_json;

Vec3 read_vec3(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(what + ": expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Shape read_shape(const ordered_json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ParseError("shape: expected an object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere") {
    const double r = j.at("radius").get<double>();
    if (!(r > 0.0)) throw ValidationError("sphere radius must be > 0");
    return Shape::sphere(r);
  }
  if (type == "box") {
    const Vec3 he = read_vec3(j.at("half_extents"), "box.half_extents");
    if (!(he.minCoeff() > 0.0))
      throw ValidationError("box half_extents must be > 0");
    return Shape::box(he);
  }
  if (type == "static_plane") {
    const Vec3 n = read_vec3(j.at("normal"), "plane.normal");
    if (n.norm() < 1e-12) throw ValidationError("plane normal must be nonzero");
    return Shape::static_plane(n, j.at("offset").get<double>());
  }
  throw ParseError("unknown shape type '" + type + "'");
}

ordered_json shape_to_json(const Shape& s) {
  ordered_json j;
  switch (s.kind) {
    case ShapeKind::Sphere:
      j["type"] = "sphere";
      j["radius"] = s.radius;
      break;
    case ShapeKind::Box:
      j["type"] = "box";
      j["half_extents"] = {s.half_extents.x(), s.half_extents.y(),
                           s.half_extents.z()};
      break;
    case ShapeKind::StaticPlane:
      j["type"] = "static_plane";
      j["normal"] = {s.normal.x(), s.normal.y(), s.normal.z()};
      j["offset"] = s.offset;
      break;
  }
  return j;
}

void validate_scene(const Scene& scene) {
  const std::size_t n = scene.bodies.size();
  for (std::size_t i = 0; i < n; ++i) {
    const RigidBody& b = scene.bodies[i];
    if (b.id != static_cast<BodyId>(i))
      throw ValidationError("body ids must be dense 0..n-1 and listed in order");
    if (b.mass < 0.0) throw ValidationError("body mass must be >= 0");
    if (b.friction < 0.0) throw ValidationError("friction must be >= 0");
    if (b.shape.kind == ShapeKind::StaticPlane && !b.is_static())
      throw ValidationError("static_plane bodies must have mass 0");
    if (!b.initial_state.all_finite())
      throw ValidationError("body state must be finite");
    const double qn = b.initial_state.orientation.norm();
    if (std::abs(qn - 1.0) > 1e-6)
      throw ValidationError("body quaternion must be unit length");
    if (!b.is_static() &&
        (b.initial_partition >= static_cast<WorkerId>(scene.num_workers)))
      throw ValidationError("partition label out of range");
  }
  std::unordered_set<ConstraintId> joint_ids;
  for (const JointSpec& j : scene.joints) {
    if (!joint_ids.insert(j.id).second)
      throw ValidationError("duplicate joint id");
    if (j.body_a == j.body_b)
      throw ValidationError("joint endpoints must differ");
    if (j.body_a >= n || j.body_b >= n)
      throw ValidationError("joint references unknown body");
    if (!j.anchor_a.allFinite() || !j.anchor_b.allFinite())
      throw ValidationError("joint anchors must be finite");
  }
  if (scene.num_workers < 1)
    throw ValidationError("num_workers must be >= 1");
  if (!(scene.timestep > 0.0))
    throw ValidationError("timestep_s must be > 0");
}

}  // namespace

std::size_t Scene::dynamic_count() const {
  std::size_t c = 0;
  for (const RigidBody& b : bodies)
    if (!b.is_static()) ++c;
  return c;
}

std::vector<BodyId> Scene::dynamic_ids() const {
  std::vector<BodyId> ids;
  ids.reserve(bodies.size());
  for (const RigidBody& b : bodies)
    if (!b.is_static()) ids.push_back(b.id);
  return ids;
}

double Scene::bounding_box_diagonal() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  bool any = false;
  for (const RigidBody& b : bodies) {
    const double r = b.shape.bounding_radius();
    if (!std::isfinite(r)) continue;  // planes do not bound the scene
    any = true;
    lo = lo.cwiseMin(b.initial_state.position - Vec3::Constant(r));
    hi = hi.cwiseMax(b.initial_state.position + Vec3::Constant(r));
  }
  if (!any) return 1.0;
  return std::max((hi - lo).norm(), 1e-9);
}

double max_joint_gap(const Scene& scene,
                     const std::vector<BodyState>& states) {
  double worst = 0.0;
  for (const JointSpec& j : scene.joints) {
    if (scene.is_static(j.body_a) && scene.is_static(j.body_b)) continue;
    const BodyState& sa = states.at(j.body_a);
    const BodyState& sb = states.at(j.body_b);
    const Vec3 pa = sa.position + sa.orientation * j.anchor_a;
    const Vec3 pb = sb.position + sb.orientation * j.anchor_b;
    worst = std::max(worst, (pa - pb).norm());
  }
  return worst;
}

Scene parse_scene(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scene JSON parse failed: ") + e.what());
  }

  Scene scene;
  try {
    if (j.contains("gravity")) scene.gravity = read_vec3(j["gravity"], "gravity");
    if (j.contains("timestep_s")) scene.timestep = j["timestep_s"].get<double>();
    if (j.contains("num_workers")) scene.num_workers = j["num_workers"].get<int>();

    std::unordered_set<BodyId> seen;
    for (const auto& jb : j.value("bodies", ordered_json::array())) {
      RigidBody b;
      b.id = jb.at("id").get<BodyId>();
      if (!seen.insert(b.id).second)
        throw ValidationError("duplicate body id");
      b.shape = read_shape(jb.at("shape"));
      b.mass = jb.at("mass").get<double>();
      b.friction = jb.value("friction", 0.5);
      b.initial_state.position = read_vec3(jb.at("position"), "position");
      if (jb.contains("quaternion")) {
        const auto& q = jb["quaternion"];
        if (!q.is_array() || q.size() != 4)
          throw ParseError("quaternion: expected an array of 4 numbers");
        b.initial_state.orientation =
            Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                 q[3].get<double>());
      }
      if (jb.contains("lin_vel"))
        b.initial_state.linear_velocity = read_vec3(jb["lin_vel"], "lin_vel");
      if (jb.contains("ang_vel"))
        b.initial_state.angular_velocity = read_vec3(jb["ang_vel"], "ang_vel");
      b.initial_partition = jb.value("partition", 0u);
      b.inertia = compute_inertia(b.shape, b.mass);
      b.inv_inertia = b.is_static() ? Mat3::Zero() : Mat3(b.inertia.inverse());
      scene.bodies.push_back(b);
    }

    for (const auto& jj : j.value("joints", ordered_json::array())) {
      JointSpec js;
      js.id = jj.at("id").get<ConstraintId>();
      js.body_a = jj.at("body_a").get<BodyId>();
      js.body_b = jj.at("body_b").get<BodyId>();
      js.anchor_a = read_vec3(jj.at("anchor_a"), "anchor_a");
      js.anchor_b = read_vec3(jj.at("anchor_b"), "anchor_b");
      scene.joints.push_back(js);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scene JSON field error: ") + e.what());
  }

  // Stable order regardless of file order.
  std::sort(scene.bodies.begin(), scene.bodies.end(),
            [](const RigidBody& a, const RigidBody& b) { return a.id < b.id; });
  std::sort(scene.joints.begin(), scene.joints.end(),
            [](const JointSpec& a, const JointSpec& b) { return a.id < b.id; });

  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string serialize_scene(const Scene& scene) {
  ordered_json j;
  j["gravity"] = {scene.gravity.x(), scene.gravity.y(), scene.gravity.z()};
  j["timestep_s"] = scene.timestep;
  j["num_workers"] = scene.num_workers;
  j["bodies"] = ordered_json::array();
  for (const RigidBody& b : scene.bodies) {
    ordered_json jb;
    jb["id"] = b.id;
    jb["shape"] = shape_to_json(b.shape);
    jb["mass"] = b.mass;
    jb["friction"] = b.friction;
    const BodyState& s = b.initial_state;
    jb["position"] = {s.position.x(), s.position.y(), s.position.z()};
    jb["quaternion"] = {s.orientation.w(), s.orientation.x(),
                        s.orientation.y(), s.orientation.z()};
    jb["lin_vel"] = {s.linear_velocity.x(), s.linear_velocity.y(),
                     s.linear_velocity.z()};
    jb["ang_vel"] = {s.angular_velocity.x(), s.angular_velocity.y(),
                     s.angular_velocity.z()};
    jb["partition"] = b.initial_partition;
    j["bodies"].push_back(jb);
  }
  j["joints"] = ordered_json::array();
  for (const JointSpec& js : scene.joints) {
    ordered_json jj;
    jj["id"] = js.id;
    jj["body_a"] = js.body_a;
    jj["body_b"] = js.body_b;
    jj["anchor_a"] = {js.anchor_a.x(), js.anchor_a.y(), js.anchor_a.z()};
    jj["anchor_b"] = {js.anchor_b.x(), js.anchor_b.y(), js.anchor_b.z()};
    j["joints"].push_back(jj);
  }
  return j.dump(2);
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scene file: " + path);
  out << serialize_scene(scene) << "\n";
}

bool scenes_equal(const Scene& a, const Scene& b) {
  if (a.gravity != b.gravity || a.timestep != b.timestep ||
      a.num_workers != b.num_workers || a.bodies.size() != b.bodies.size() ||
      a.joints.size() != b.joints.size())
    return false;
  for (std::size_t i = 0; i < a.bodies.size(); ++i) {
    const RigidBody& x = a.bodies[i];
    const RigidBody& y = b.bodies[i];
    if (x.id != y.id || x.shape.kind != y.shape.kind || x.mass != y.mass ||
        x.friction != y.friction || x.initial_partition != y.initial_partition)
      return false;
    if (x.shape.kind == ShapeKind::Sphere && x.shape.radius != y.shape.radius)
      return false;
    if (x.shape.kind == ShapeKind::Box &&
        x.shape.half_extents != y.shape.half_extents)
      return false;
    if (x.shape.kind == ShapeKind::StaticPlane &&
        (x.shape.normal != y.shape.normal || x.shape.offset != y.shape.offset))
      return false;
    if (!(x.initial_state == y.initial_state)) return false;
  }
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    const JointSpec& x = a.joints[i];
    const JointSpec& y = b.joints[i];
    if (x.id != y.id || x.body_a != y.body_a || x.body_b != y.body_b ||
        x.anchor_a != y.anchor_a || x.anchor_b != y.anchor_b)
      return false;
  }
  return true;
}

}  // namespace ovsim
