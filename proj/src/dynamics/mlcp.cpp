#include "ovsim/dynamics/mlcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ovsim/core/log.hpp"

namespace ovsim::dynamics {
namespace {

constexpr double kPenetrationSlop = 0.005;  // meters tolerated before bias
constexpr double kInf = std::numeric_limits<double>::infinity();

// Orthonormal tangent basis for a unit normal; deterministic axis choice.
void tangent_basis(const Vec3& n, Vec3& u, Vec3& v) {
  int k = 0;
  double best = std::abs(n.x());
  if (std::abs(n.y()) < best) {
    best = std::abs(n.y());
    k = 1;
  }
  if (std::abs(n.z()) < best) k = 2;
  Vec3 axis = Vec3::Zero();
  axis[k] = 1.0;
  u = n.cross(axis).normalized();
  v = n.cross(u);
}

double pair_friction(const RigidBody& a, const RigidBody& b) {
  return std::sqrt(a.friction * b.friction);
}

}  // namespace

bool MlcpProblem::has_friction() const {
  for (const MlcpRow& r : rows) {
    if (r.kind == RowKind::Friction) return true;
  }
  return false;
}

Eigen::MatrixXd MlcpProblem::dense_matrix() const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto nb = static_cast<Eigen::Index>(body_ids.size());
  // A = J M^-1 J^T + C via explicit J (m x 6n) for small systems.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, 6 * nb);
  for (Eigen::Index i = 0; i < m; ++i) {
    const MlcpRow& r = rows[static_cast<std::size_t>(i)];
    if (r.local_a >= 0) {
      jac.block<1, 3>(i, 6 * r.local_a) = r.ja_lin.transpose();
      jac.block<1, 3>(i, 6 * r.local_a + 3) = r.ja_ang.transpose();
    }
    if (r.local_b >= 0) {
      jac.block<1, 3>(i, 6 * r.local_b) = r.jb_lin.transpose();
      jac.block<1, 3>(i, 6 * r.local_b + 3) = r.jb_ang.transpose();
    }
  }
  Eigen::MatrixXd minv = Eigen::MatrixXd::Zero(6 * nb, 6 * nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    const auto k = static_cast<std::size_t>(j);
    minv.block<3, 3>(6 * j, 6 * j) = Mat3::Identity() * inv_mass[k];
    minv.block<3, 3>(6 * j + 3, 6 * j + 3) = inv_inertia_world[k];
  }
  Eigen::MatrixXd a = jac * minv * jac.transpose();
  a += compliance * Eigen::MatrixXd::Identity(m, m);
  return a;
}

Eigen::VectorXd MlcpProblem::rhs_vector() const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b[static_cast<Eigen::Index>(i)] = rows[i].rhs;
  }
  return b;
}

Eigen::VectorXd MlcpProblem::lower_bounds() const {
  Eigen::VectorXd lo(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lo[static_cast<Eigen::Index>(i)] = rows[i].lo;
  }
  return lo;
}

Eigen::VectorXd MlcpProblem::upper_bounds() const {
  Eigen::VectorXd hi(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    hi[static_cast<Eigen::Index>(i)] = rows[i].hi;
  }
  return hi;
}

std::uint64_t joint_group_key(ConstraintId joint_id) {
  return (1ULL << 63) | joint_id;
}

std::uint64_t contact_group_key(BodyId a, BodyId b, std::uint32_t feature) {
  // ids fit in 24 bits for any scene this engine targets
  return (static_cast<std::uint64_t>(a) << 40) |
         (static_cast<std::uint64_t>(b) << 16) |
         (feature & 0xFFFFU);
}

MlcpProblem assemble_mlcp(const Scene& scene,
                          const std::vector<BodyState>& states,
                          const std::vector<const JointSpec*>& joints,
                          const std::vector<Contact>& contacts,
                          double h, const Vec3& gravity,
                          const std::vector<BodyId>& active,
                          const WarmStartCache* cache) {
  MlcpProblem p;
  p.body_ids = active;
  std::sort(p.body_ids.begin(), p.body_ids.end());
  std::vector<int> local(scene.bodies.size(), -1);
  p.inv_mass.resize(p.body_ids.size());
  p.inv_inertia_world.resize(p.body_ids.size());
  std::vector<Vec3> vfree_lin(p.body_ids.size());
  std::vector<Vec3> vfree_ang(p.body_ids.size());
  for (std::size_t i = 0; i < p.body_ids.size(); ++i) {
    const BodyId id = p.body_ids[i];
    const RigidBody& body = scene.body(id);
    local[id] = static_cast<int>(i);
    p.inv_mass[i] = body.inv_mass();
    const Mat3 rot = states[id].orientation.toRotationMatrix();
    p.inv_inertia_world[i] = rot * body.inv_inertia * rot.transpose();
    vfree_lin[i] = states[id].linear_velocity + h * gravity;
    vfree_ang[i] = states[id].angular_velocity;
  }

  auto local_of = [&](BodyId id) -> int {
    return scene.body(id).is_static() ? -1 : local[id];
  };
  auto vfree_of = [&](int l, Vec3& lin, Vec3& ang) {
    if (l >= 0) {
      lin = vfree_lin[static_cast<std::size_t>(l)];
      ang = vfree_ang[static_cast<std::size_t>(l)];
    } else {
      lin = Vec3::Zero();
      ang = Vec3::Zero();
    }
  };
  auto row_diag = [&](const MlcpRow& r) {
    double d = p.compliance;
    if (r.local_a >= 0) {
      const auto i = static_cast<std::size_t>(r.local_a);
      d += r.ja_lin.dot(r.ja_lin) * p.inv_mass[i] +
           r.ja_ang.dot(p.inv_inertia_world[i] * r.ja_ang);
    }
    if (r.local_b >= 0) {
      const auto i = static_cast<std::size_t>(r.local_b);
      d += r.jb_lin.dot(r.jb_lin) * p.inv_mass[i] +
           r.jb_ang.dot(p.inv_inertia_world[i] * r.jb_ang);
    }
    return d;
  };
  auto warm = [&](std::uint64_t group, int sub) -> double {
    if (!cache) return 0.0;
    auto it = cache->find(group);
    return it == cache->end() ? 0.0 : it->second[static_cast<std::size_t>(sub)];
  };

  for (const JointSpec* joint : joints) {
    const RigidBody& ba = scene.body(joint->body_a);
    const RigidBody& bb = scene.body(joint->body_b);
    if (ba.is_static() && bb.is_static()) {
      OVSIM_WARN("joint %u connects two static bodies, dropped",
                 joint->id);
      continue;
    }
    const BodyState& sa = states[joint->body_a];
    const BodyState& sb = states[joint->body_b];
    const Vec3 ra = sa.orientation * joint->anchor_a;
    const Vec3 rb = sb.orientation * joint->anchor_b;
    const Vec3 phi = (sa.position + ra) - (sb.position + rb);
    const std::uint64_t group = joint_group_key(joint->id);
    for (int axis = 0; axis < 3; ++axis) {
      MlcpRow r;
      r.kind = RowKind::Bilateral;
      r.local_a = local_of(joint->body_a);
      r.local_b = local_of(joint->body_b);
      Vec3 e = Vec3::Zero();
      e[axis] = 1.0;
      r.ja_lin = e;
      r.ja_ang = ra.cross(e);
      r.jb_lin = -e;
      r.jb_ang = -rb.cross(e);
      Vec3 la, aa, lb, ab;
      vfree_of(r.local_a, la, aa);
      vfree_of(r.local_b, lb, ab);
      const double jv = r.ja_lin.dot(la) + r.ja_ang.dot(aa) +
                        r.jb_lin.dot(lb) + r.jb_ang.dot(ab);
      r.rhs = -jv - phi[axis] / h;
      r.lo = -kInf;
      r.hi = kInf;
      r.diag = row_diag(r);
      r.group = group;
      r.sub = static_cast<std::uint8_t>(axis);
      r.lambda0 = warm(group, axis);
      p.rows.push_back(r);
    }
  }

  for (const Contact& c : contacts) {
    const RigidBody& ba = scene.body(c.body_a);
    const RigidBody& bb = scene.body(c.body_b);
    const int la = local_of(c.body_a);
    const int lb = local_of(c.body_b);
    const Vec3 ra = c.point - states[c.body_a].position;
    const Vec3 rb = c.point - states[c.body_b].position;
    const std::uint64_t group = contact_group_key(c.body_a, c.body_b,
                                                  c.feature);
    const double mu = pair_friction(ba, bb);
    const double lambda_n_prev = warm(group, 0);

    MlcpRow n;
    n.kind = RowKind::ContactNormal;
    n.local_a = la;
    n.local_b = lb;
    n.ja_lin = c.normal;
    n.ja_ang = ra.cross(c.normal);
    n.jb_lin = -c.normal;
    n.jb_ang = -rb.cross(c.normal);
    {
      Vec3 lva, ava, lvb, avb;
      vfree_of(la, lva, ava);
      vfree_of(lb, lvb, avb);
      const double jv = n.ja_lin.dot(lva) + n.ja_ang.dot(ava) +
                        n.jb_lin.dot(lvb) + n.jb_ang.dot(avb);
      n.rhs = -jv + std::max(c.depth - kPenetrationSlop, 0.0) / h;
    }
    n.lo = 0.0;
    n.hi = kInf;
    n.diag = row_diag(n);
    n.group = group;
    n.sub = 0;
    n.lambda0 = lambda_n_prev;
    const int normal_index = static_cast<int>(p.rows.size());
    p.rows.push_back(n);

    if (mu > 0.0) {
      Vec3 u, v;
      tangent_basis(c.normal, u, v);
      const Vec3 tangents[2] = {u, v};
      for (int t = 0; t < 2; ++t) {
        MlcpRow f;
        f.kind = RowKind::Friction;
        f.local_a = la;
        f.local_b = lb;
        f.ja_lin = tangents[t];
        f.ja_ang = ra.cross(tangents[t]);
        f.jb_lin = -tangents[t];
        f.jb_ang = -rb.cross(tangents[t]);
        Vec3 lva, ava, lvb, avb;
        vfree_of(la, lva, ava);
        vfree_of(lb, lvb, avb);
        f.rhs = -(f.ja_lin.dot(lva) + f.ja_ang.dot(ava) +
                  f.jb_lin.dot(lvb) + f.jb_ang.dot(avb));
        f.lo = -mu * lambda_n_prev;
        f.hi = mu * lambda_n_prev;
        f.diag = row_diag(f);
        f.normal_row = normal_index;
        f.mu = mu;
        f.group = group;
        f.sub = static_cast<std::uint8_t>(1 + t);
        f.lambda0 = std::clamp(warm(group, 1 + t), f.lo, f.hi);
        p.rows.push_back(f);
      }
    }
  }
  return p;
}

}  // namespace ovsim::dynamics
