#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovsim {

using BodyId = std::uint32_t;
using WorkerId = std::uint32_t;
using ConstraintId = std::uint32_t;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

constexpr BodyId kInvalidBody = static_cast<BodyId>(-1);

/// Thrown on malformed input files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an input violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generalized state of a rigid body: position, orientation quaternion,
/// linear velocity and world-frame angular velocity. 13 scalars total.
struct BodyState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();

  /// Flatten to (x, y, z, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz).
  std::array<double, 13> to_scalars() const {
    return {position.x(),         position.y(),         position.z(),
            orientation.w(),      orientation.x(),      orientation.y(),
            orientation.z(),      linear_velocity.x(),  linear_velocity.y(),
            linear_velocity.z(),  angular_velocity.x(), angular_velocity.y(),
            angular_velocity.z()};
  }

  static BodyState from_scalars(const std::array<double, 13>& s) {
    BodyState st;
    st.position = Vec3(s[0], s[1], s[2]);
    st.orientation = Quat(s[3], s[4], s[5], s[6]);
    st.linear_velocity = Vec3(s[7], s[8], s[9]);
    st.angular_velocity = Vec3(s[10], s[11], s[12]);
    return st;
  }

  bool all_finite() const {
    return position.allFinite() && orientation.coeffs().allFinite() &&
           linear_velocity.allFinite() && angular_velocity.allFinite();
  }

  bool operator==(const BodyState& o) const {
    return position == o.position &&
           orientation.coeffs() == o.orientation.coeffs() &&
           linear_velocity == o.linear_velocity &&
           angular_velocity == o.angular_velocity;
  }
};

enum class ShapeKind { Sphere, Box, StaticPlane };

/// Collision shape. Only the fields of the active kind are meaningful.
struct Shape {
  ShapeKind kind = ShapeKind::Sphere;
  double radius = 0.5;                     // Sphere
  Vec3 half_extents = Vec3(0.5, 0.5, 0.5); // Box
  Vec3 normal = Vec3::UnitY();             // StaticPlane, unit
  double offset = 0.0;                     // StaticPlane: n.x = offset

  static Shape sphere(double r) {
    Shape s;
    s.kind = ShapeKind::Sphere;
    s.radius = r;
    return s;
  }
  static Shape box(const Vec3& he) {
    Shape s;
    s.kind = ShapeKind::Box;
    s.half_extents = he;
    return s;
  }
  static Shape static_plane(const Vec3& n, double offset) {
    Shape s;
    s.kind = ShapeKind::StaticPlane;
    s.normal = n.normalized();
    s.offset = offset;
    return s;
  }

  /// Radius of a bounding sphere centered on the body origin
  /// (infinite for planes).
  double bounding_radius() const;
};

struct RigidBody {
  BodyId id = kInvalidBody;
  Shape shape;
  double mass = 1.0;  // 0 encodes static (infinite mass)
  Mat3 inertia = Mat3::Identity();       // body frame
  Mat3 inv_inertia = Mat3::Identity();   // body frame
  double friction = 0.5;
  BodyState initial_state;
  WorkerId initial_partition = 0;

  bool is_static() const { return mass == 0.0; }
  double inv_mass() const { return is_static() ? 0.0 : 1.0 / mass; }
};

/// Ball-and-socket joint: world anchors of the two bodies coincide.
struct JointSpec {
  ConstraintId id = 0;
  BodyId body_a = kInvalidBody;
  BodyId body_b = kInvalidBody;
  Vec3 anchor_a = Vec3::Zero();  // body frame of A
  Vec3 anchor_b = Vec3::Zero();  // body frame of B
};

struct Contact {
  BodyId body_a = kInvalidBody;  // body_a < body_b always
  BodyId body_b = kInvalidBody;
  Vec3 point = Vec3::Zero();     // world
  Vec3 normal = Vec3::UnitY();   // unit, from B towards A
  double depth = 0.0;            // penetration, >= 0
  std::uint32_t feature = 0;     // disambiguates multi-point manifolds
};

/// Unordered body-pair key used for contact "newness" tracking.
inline std::uint64_t contact_pair_key(BodyId a, BodyId b) {
  const std::uint64_t lo = std::min(a, b);
  const std::uint64_t hi = std::max(a, b);
  return (hi << 32) | lo;
}

/// Analytic inertia tensors for the primitive shapes.
Mat3 compute_inertia(const Shape& shape, double mass);

}  // namespace ovsim
