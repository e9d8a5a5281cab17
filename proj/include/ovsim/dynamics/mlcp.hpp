#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ovsim/core/scene.hpp"
#include "ovsim/core/types.hpp"

namespace ovsim::dynamics {

enum class RowKind : std::uint8_t { Bilateral, ContactNormal, Friction };

/// One scalar constraint row. Jacobian blocks are stored per endpoint;
/// `local_a` / `local_b` index the problem's body table, -1 for a static
/// endpoint (zero inverse mass, no velocity update).
struct MlcpRow {
  RowKind kind = RowKind::Bilateral;
  int local_a = -1;
  int local_b = -1;
  Vec3 ja_lin = Vec3::Zero();
  Vec3 ja_ang = Vec3::Zero();
  Vec3 jb_lin = Vec3::Zero();
  Vec3 jb_ang = Vec3::Zero();
  double rhs = 0.0;   // b_i of  w = A lambda - b
  double lo = 0.0;
  double hi = 0.0;
  double diag = 0.0;  // J M^-1 J^T + compliance
  int normal_row = -1;  // friction rows: index of their normal row
  double mu = 0.0;      // friction rows: Coulomb coefficient
  std::uint64_t group = 0;  // warm-start group key
  std::uint8_t sub = 0;     // row index within the group (0..2)
  double lambda0 = 0.0;     // warm-start value
};

/// Boxed LCP  w = A lambda - b,  lo <= lambda <= hi, built over the active
/// bodies of one step. A is never stored; rows carry sparse Jacobian
/// blocks and the solver works matrix-free. dense_matrix() materializes A
/// for small problems (tests, direct cross-checks).
struct MlcpProblem {
  std::vector<MlcpRow> rows;
  std::vector<BodyId> body_ids;         // local index -> body id (sorted)
  std::vector<double> inv_mass;         // per local body
  std::vector<Mat3> inv_inertia_world;  // per local body
  double compliance = 1e-9;

  std::size_t size() const { return rows.size(); }
  bool has_friction() const;

  Eigen::MatrixXd dense_matrix() const;
  Eigen::VectorXd rhs_vector() const;
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
};

/// Cached impulses keyed by constraint group (joint id or contact pair +
/// feature), three scalars per group.
using WarmStartCache = std::unordered_map<std::uint64_t, std::array<double, 3>>;

std::uint64_t joint_group_key(ConstraintId joint_id);
std::uint64_t contact_group_key(BodyId a, BodyId b, std::uint32_t feature);

/// Builds the step problem: three bilateral rows per joint (in ascending
/// joint id), then per contact a unilateral normal row followed, when the
/// pair friction coefficient is positive, by two tangential friction rows.
/// Contacts must already be in canonical sorted order. Joints whose
/// endpoints are all static are dropped with a warning. `cache` (optional)
/// provides warm-start impulses and the previous normal impulse used for
/// the friction boxes.
MlcpProblem assemble_mlcp(const Scene& scene,
                          const std::vector<BodyState>& states,
                          const std::vector<const JointSpec*>& joints,
                          const std::vector<Contact>& contacts,
                          double h, const Vec3& gravity,
                          const std::vector<BodyId>& active,
                          const WarmStartCache* cache = nullptr);

}  // namespace ovsim::dynamics
