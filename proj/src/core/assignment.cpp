#include "ovsim/core/assignment.hpp"

#include <stdexcept>
#include <string>

namespace ovsim {

WorkerAssignment::WorkerAssignment(std::size_t body_count, int num_workers)
    : num_workers_(num_workers),
      workers_of_(body_count),
      counts_(static_cast<std::size_t>(num_workers), 0) {}

WorkerAssignment WorkerAssignment::from_scene(const Scene& scene) {
  WorkerAssignment a(scene.bodies.size(), scene.num_workers);
  for (const RigidBody& b : scene.bodies) {
    if (b.is_static()) continue;
    a.activate(b.id, b.initial_partition);
  }
  return a;
}

bool WorkerAssignment::activate(BodyId b, WorkerId w) {
  if (b >= workers_of_.size())
    throw std::out_of_range("activate: unknown body " + std::to_string(b));
  if (w >= static_cast<WorkerId>(num_workers_))
    throw std::out_of_range("activate: unknown worker " + std::to_string(w));
  WorkerSet& ws = workers_of_[b];
  if (!ws.insert(w)) return false;
  ++counts_[w];
  if (ws.size() > 1) overlap_.insert(b);
  return true;
}

void WorkerAssignment::deactivate(BodyId b, WorkerId w) {
  if (b >= workers_of_.size())
    throw std::out_of_range("deactivate: unknown body " + std::to_string(b));
  WorkerSet& ws = workers_of_[b];
  if (!ws.contains(w))
    throw std::logic_error("deactivate: body " + std::to_string(b) +
                           " not active in worker " + std::to_string(w));
  if (ws.size() == 1)
    throw std::logic_error("deactivate: would leave body " +
                           std::to_string(b) + " with no worker");
  ws.erase(w);
  --counts_[w];
  if (ws.size() <= 1) overlap_.erase(b);
}

std::size_t WorkerAssignment::load_of(const WorkerSet& ws) const {
  std::size_t total = 0;
  for (WorkerId w : ws) total += counts_.at(w);
  return total;
}

std::vector<BodyId> WorkerAssignment::bodies_of(WorkerId w) const {
  std::vector<BodyId> out;
  for (BodyId b = 0; b < workers_of_.size(); ++b)
    if (workers_of_[b].contains(w)) out.push_back(b);
  return out;
}

std::set<BodyId> overlap_set(const WorkerAssignment& assignment) {
  return assignment.overlap_set();
}

}  // namespace ovsim
