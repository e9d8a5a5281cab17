#pragma once

#include <chrono>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ovsim/coord/event_log.hpp"
#include "ovsim/core/assignment.hpp"
#include "ovsim/core/scene.hpp"
#include "ovsim/dynamics/solver.hpp"
#include "ovsim/graph/constraint_graph.hpp"
#include "ovsim/overlap/overlap.hpp"
#include "ovsim/transport/connection.hpp"

namespace ovsim::coord {

struct CoordinatorParams {
  int gamma = 0;
  int beta = 4;
  dynamics::SolverConfig solver;
  bool no_overlap = false;       // ablation: no mirroring, no rebalancing
  bool full_weight_recompute = false;
  std::string balance_metric = "bodies";  // "bodies" | "contacts"
  std::chrono::milliseconds barrier_timeout{30000};
};

struct StepRecord {
  std::uint32_t step = 0;
  double wall_ms = 0.0;
  std::size_t contact_points = 0;   // global collision pass
  double residual_total = 0.0;      // summed worker solver residuals
  double joint_violation_max_rel = 0.0;  // vs scene bbox diagonal
  std::vector<std::size_t> worker_active;
  std::vector<std::size_t> worker_contacts;
  std::size_t overlap_size = 0;
};

struct RunStats {
  std::size_t weight_recomputes = 0;
  double max_weight_sum_error = 0.0;
  double min_weight = std::numeric_limits<double>::infinity();
  std::size_t blend_count = 0;
  double max_blend_quat_norm_error = 0.0;
  std::size_t balance_decisions = 0;
  std::size_t branch_counts[5] = {0, 0, 0, 0, 0};
  std::size_t max_overlap_size = 0;
};

/// Main server: owns the authoritative states, the assignment and the
/// constraint graph, and drives all workers through one synchronous
/// pipeline per step: reset overlap copies, global collision pass, graph
/// update, load balance, weight recomputation, parallel worker step,
/// barrier, blend.
class Coordinator {
 public:
  Coordinator(Scene scene, std::vector<transport::ConnectionPtr> workers,
              CoordinatorParams params);

  /// Handshake with every worker, apply the initial partition (plus the
  /// joint-interface mirroring unless the ablation is on), push initial
  /// activations and compute weights for the initial overlap set.
  void initialize();

  StepRecord step();

  /// Closes all worker connections (workers then exit their loops).
  void shutdown();

  const Scene& scene() const { return scene_; }
  const WorkerAssignment& assignment() const { return assignment_; }
  const graph::ConstraintGraph& graph() const { return graph_; }
  /// Authoritative state of every body (blended for overlap bodies).
  const std::vector<BodyState>& states() const { return blended_; }
  const RunStats& stats() const { return stats_; }
  std::uint32_t step_index() const { return step_index_; }

  void set_event_log(EventLog* log) { event_log_ = log; }

 private:
  void push_reset_batches();
  void apply_balance_messages(
      const std::vector<overlap::ContactDecision>& decisions);
  void recompute_weights(
      const std::vector<overlap::ContactDecision>& decisions,
      const std::vector<std::pair<BodyId, BodyId>>& added_pairs,
      const std::vector<std::pair<BodyId, BodyId>>& removed_pairs,
      const std::vector<std::vector<BodyId>>& prev_adjacency);
  void note_weights(const overlap::BlendWeights& w);
  std::vector<std::size_t> contact_participation(
      const std::vector<Contact>& contacts) const;
  double max_joint_violation() const;
  void barrier(std::vector<std::unordered_map<BodyId, BodyState>>& states,
               double& residual_total);

  Scene scene_;
  std::vector<transport::ConnectionPtr> workers_;
  CoordinatorParams params_;
  WorkerAssignment assignment_;
  graph::ConstraintGraph graph_;
  std::vector<BodyState> blended_;
  std::set<std::uint64_t> prev_pairs_;  // contact pair keys of last step
  std::unordered_map<BodyId, overlap::BlendWeights> weights_;
  RunStats stats_;
  std::uint32_t step_index_ = 0;
  double bbox_diag_ = 1.0;
  EventLog* event_log_ = nullptr;
  bool initialized_ = false;
};

}  // namespace ovsim::coord
