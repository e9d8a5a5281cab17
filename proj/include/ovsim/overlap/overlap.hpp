#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ovsim/core/assignment.hpp"
#include "ovsim/core/scene.hpp"
#include "ovsim/graph/constraint_graph.hpp"

namespace ovsim::overlap {

struct OverlapParams {
  int gamma = 0;  // overlap growth radius (graph hops)
  int beta = 4;   // weight search depth
};

/// Activates every vertex within `gamma` hops of `root` in all of root's
/// workers, skipping vertices that are already shared by several workers.
void grow_overlap(WorkerAssignment& assignment,
                  const graph::ConstraintGraph& graph, BodyId root,
                  int gamma);

/// Initial refinement for articulated structures: for every joint whose
/// two endpoints live in exactly one distinct worker each, both endpoints
/// are mirrored into the opposite worker and the overlap is grown from
/// each of them. Joints are visited in ascending constraint id; the
/// condition is evaluated against the current assignment.
void partition_articulated(WorkerAssignment& assignment,
                           const graph::ConstraintGraph& graph,
                           const Scene& scene, int gamma);

struct BlendWeights {
  std::vector<WorkerId> workers;  // ascending, equals the body's worker set
  std::vector<double> weights;    // same order, sums to 1
};

/// Distance-based blend weights for an overlap body `o`: a breadth-first
/// search from `o` up to depth `beta` looks, per worker of `o`, for the
/// nearest vertex owned by that worker alone; its weight is the inverse
/// of that distance. Workers with no such vertex within `beta` hops get
/// weight 1/beta. Weights are normalized to sum to one. Throws
/// std::invalid_argument if `o` is not shared by at least two workers.
BlendWeights compute_weights(const WorkerAssignment& assignment,
                             const graph::ConstraintGraph& graph, BodyId o,
                             int beta);

/// Convex combination of rigid body states. Positions and velocities are
/// averaged componentwise; orientations are accumulated in R^4 with a
/// sign flip whenever a quaternion opposes the running sum, then
/// normalized. Throws std::runtime_error if the accumulated quaternion
/// vanishes. `accum_norm_out` (optional) reports the accumulated
/// quaternion's norm before renormalization, a gauge of how far the
/// workers' rotations disagree.
BodyState blend_states(const std::vector<BodyState>& states,
                       const std::vector<double>& weights,
                       double* accum_norm_out = nullptr);

/// True when the vertices adjacent to `b` span more than one worker in
/// total, i.e. removing b's duplication could split a constraint across
/// workers. Optionally reports the neighbor worker sets it inspected.
bool is_bridge(const WorkerAssignment& assignment,
               const graph::ConstraintGraph& graph, BodyId b,
               std::vector<std::pair<BodyId, WorkerSet>>* neighbors_out =
                   nullptr);

/// Which rule fired for one new contact.
enum class BalanceBranch : int {
  None = 0,
  Merge = 1,           // disjoint worker sets: duplicate one body across
  ShrinkA = 2,         // A was shared, B single-homed, A not a bridge
  ShrinkB = 3,
  DuplicateShrink = 4  // identical multi-worker sets collapse to one
};

struct BridgeEval {
  BodyId body = kInvalidBody;
  bool result = false;
  std::vector<std::pair<BodyId, WorkerSet>> neighbor_sets;
};

/// Full record of one new-contact decision, sufficient to replay the
/// branch choice and every mutation against an independent copy of the
/// assignment.
struct ContactDecision {
  BodyId a = kInvalidBody;
  BodyId b = kInvalidBody;
  WorkerSet wa_before;
  WorkerSet wb_before;
  double load_a = 0.0;  // summed load over wa_before
  double load_b = 0.0;
  BalanceBranch branch = BalanceBranch::None;
  std::optional<BridgeEval> bridge_a;
  std::optional<BridgeEval> bridge_b;
  std::vector<BodyId> grow_sequence;  // bfs order used by Merge
  std::vector<std::pair<BodyId, WorkerId>> activations;
  std::vector<std::pair<BodyId, WorkerId>> deactivations;
};

/// Rebalances worker assignments for contacts that appeared this step.
/// Pairs must be canonical (a < b, ascending), both endpoints dynamic,
/// and are processed in order; every decision sees the mutations of the
/// previous ones. `load` maps a
/// worker to its current load; by default the number of active bodies in
/// the assignment (queried live).
std::vector<ContactDecision> load_balance(
    WorkerAssignment& assignment, const graph::ConstraintGraph& graph,
    const std::vector<std::pair<BodyId, BodyId>>& new_pairs, int gamma,
    const std::function<double(WorkerId)>& load = {});

}  // namespace ovsim::overlap
