#include "ovsim/core/types.hpp"

#include <limits>

namespace ovsim {

double Shape::bounding_radius() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return radius;
    case ShapeKind::Box:
      return half_extents.norm();
    case ShapeKind::StaticPlane:
      return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Mat3 compute_inertia(const Shape& shape, double mass) {
  if (mass == 0.0) return Mat3::Zero();
  Mat3 inertia = Mat3::Zero();
  switch (shape.kind) {
    case ShapeKind::Sphere: {
      const double i = 0.4 * mass * shape.radius * shape.radius;
      inertia = Mat3::Identity() * i;
      break;
    }
    case ShapeKind::Box: {
      const Vec3 d = 2.0 * shape.half_extents;
      const double k = mass / 12.0;
      inertia(0, 0) = k * (d.y() * d.y() + d.z() * d.z());
      inertia(1, 1) = k * (d.x() * d.x() + d.z() * d.z());
      inertia(2, 2) = k * (d.x() * d.x() + d.y() * d.y());
      break;
    }
    case ShapeKind::StaticPlane:
      // planes are always static; a dynamic plane is rejected at load
      break;
  }
  return inertia;
}

}  // namespace ovsim
