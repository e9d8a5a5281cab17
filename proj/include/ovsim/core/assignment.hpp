#pragma once

#include <set>
#include <vector>

#include "ovsim/core/scene.hpp"
#include "ovsim/core/types.hpp"
#include "ovsim/core/worker_set.hpp"

namespace ovsim {

/// Global body-to-worker map: W_x for every non-static body, per-worker
/// active counts, and the overlap set O = { x : |W_x| > 1 }.
///
/// Mutated only by the coordinator thread.
class WorkerAssignment {
 public:
  WorkerAssignment() = default;
  WorkerAssignment(std::size_t body_count, int num_workers);

  /// Build the initial assignment from the scene's per-body partition
  /// labels. Static bodies get empty worker sets.
  static WorkerAssignment from_scene(const Scene& scene);

  int num_workers() const { return num_workers_; }
  std::size_t body_count() const { return workers_of_.size(); }

  const WorkerSet& workers_of(BodyId b) const { return workers_of_.at(b); }

  bool is_active_in(BodyId b, WorkerId w) const {
    return workers_of_.at(b).contains(w);
  }

  /// Returns true if membership changed.
  bool activate(BodyId b, WorkerId w);

  /// Removes b from w. Throws if b is not active in w or if this would
  /// leave b with no worker at all.
  void deactivate(BodyId b, WorkerId w);

  /// Active body count of a single worker, |P_i|.
  std::size_t worker_load(WorkerId w) const { return counts_.at(w); }

  /// Load metric <W> over a set of workers: sum of their active counts.
  std::size_t load_of(const WorkerSet& ws) const;

  /// Bodies active in more than one worker, ascending.
  const std::set<BodyId>& overlap_set() const { return overlap_; }

  bool in_overlap(BodyId b) const { return workers_of_.at(b).size() > 1; }

  /// Ascending list of bodies active in worker w.
  std::vector<BodyId> bodies_of(WorkerId w) const;

 private:
  int num_workers_ = 0;
  std::vector<WorkerSet> workers_of_;
  std::vector<std::size_t> counts_;
  std::set<BodyId> overlap_;
};

/// The overlap set of an assignment: exactly { x in A : |W_x| > 1 }.
std::set<BodyId> overlap_set(const WorkerAssignment& assignment);

}  // namespace ovsim
