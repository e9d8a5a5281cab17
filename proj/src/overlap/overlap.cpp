#include "ovsim/overlap/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace ovsim::overlap {

void grow_overlap(WorkerAssignment& assignment,
                  const graph::ConstraintGraph& graph, BodyId root,
                  int gamma) {
  if (gamma <= 0) return;
  const WorkerSet root_workers = assignment.workers_of(root);
  for (BodyId n : graph.bfs_vertices(root, gamma)) {
    if (assignment.in_overlap(n)) continue;
    for (WorkerId w : root_workers) {
      if (!assignment.is_active_in(n, w)) assignment.activate(n, w);
    }
  }
}

void partition_articulated(WorkerAssignment& assignment,
                           const graph::ConstraintGraph& graph,
                           const Scene& scene, int gamma) {
  for (const JointSpec& j : scene.joints) {
    if (scene.is_static(j.body_a) || scene.is_static(j.body_b)) continue;
    const WorkerSet& wa = assignment.workers_of(j.body_a);
    const WorkerSet& wb = assignment.workers_of(j.body_b);
    if (wa.size() != 1 || wb.size() != 1 || wa == wb) continue;
    const WorkerId worker_a = wa.front();
    const WorkerId worker_b = wb.front();
    assignment.activate(j.body_a, worker_b);
    grow_overlap(assignment, graph, j.body_a, gamma);
    if (!assignment.is_active_in(j.body_b, worker_a)) {
      assignment.activate(j.body_b, worker_a);
    }
    grow_overlap(assignment, graph, j.body_b, gamma);
  }
}

BlendWeights compute_weights(const WorkerAssignment& assignment,
                             const graph::ConstraintGraph& graph, BodyId o,
                             int beta) {
  if (beta < 1) throw std::invalid_argument("weight depth must be >= 1");
  if (!assignment.in_overlap(o)) {
    throw std::invalid_argument("body " + std::to_string(o) +
                                " is not in the overlap set");
  }
  const WorkerSet wo = assignment.workers_of(o);
  std::vector<double> dist(wo.size(), 0.0);
  std::size_t found = 0;

  std::vector<char> visited(assignment.body_count(), 0);
  visited[o] = 1;
  std::vector<BodyId> frontier{o};
  for (int depth = 1; depth <= beta && found < wo.size() && !frontier.empty();
       ++depth) {
    std::vector<BodyId> next;
    for (BodyId v : frontier) {
      for (BodyId n : graph.neighbors(v)) {
        if (visited[n]) continue;
        visited[n] = 1;
        next.push_back(n);
      }
    }
    std::sort(next.begin(), next.end());
    for (BodyId n : next) {
      const WorkerSet& wn = assignment.workers_of(n);
      if (wn.size() != 1) continue;
      const WorkerId w = wn.front();
      auto it = std::find(wo.begin(), wo.end(), w);
      if (it == wo.end()) continue;
      const auto idx = static_cast<std::size_t>(it - wo.begin());
      if (dist[idx] != 0.0) continue;  // nearest vertex wins
      dist[idx] = 1.0 / static_cast<double>(depth);
      ++found;
    }
    frontier = std::move(next);
  }

  BlendWeights out;
  out.workers.assign(wo.begin(), wo.end());
  out.weights.resize(wo.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < wo.size(); ++i) {
    out.weights[i] =
        dist[i] != 0.0 ? dist[i] : 1.0 / static_cast<double>(beta);
    sum += out.weights[i];
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

BodyState blend_states(const std::vector<BodyState>& states,
                       const std::vector<double>& weights,
                       double* accum_norm_out) {
  if (states.empty() || states.size() != weights.size()) {
    throw std::invalid_argument("blend needs matching non-empty inputs");
  }
  BodyState out;
  out.position = Vec3::Zero();
  out.linear_velocity = Vec3::Zero();
  out.angular_velocity = Vec3::Zero();
  Eigen::Vector4d q_acc = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double w = weights[i];
    out.position += w * states[i].position;
    out.linear_velocity += w * states[i].linear_velocity;
    out.angular_velocity += w * states[i].angular_velocity;
    Eigen::Vector4d q = states[i].orientation.coeffs();
    if (i > 0 && q_acc.dot(q) < 0.0) q = -q;
    q_acc += w * q;
  }
  const double norm = q_acc.norm();
  if (accum_norm_out) *accum_norm_out = norm;
  if (!(norm > 1e-12)) {
    throw std::runtime_error("blend produced a degenerate quaternion");
  }
  out.orientation = Quat(q_acc / norm);
  return out;
}

bool is_bridge(const WorkerAssignment& assignment,
               const graph::ConstraintGraph& graph, BodyId b,
               std::vector<std::pair<BodyId, WorkerSet>>* neighbors_out) {
  WorkerSet all;
  for (BodyId n : graph.neighbors(b)) {
    const WorkerSet& wn = assignment.workers_of(n);
    if (neighbors_out) neighbors_out->emplace_back(n, wn);
    all = all.set_union(wn);
  }
  return all.size() > 1;
}

std::vector<ContactDecision> load_balance(
    WorkerAssignment& assignment, const graph::ConstraintGraph& graph,
    const std::vector<std::pair<BodyId, BodyId>>& new_pairs, int gamma,
    const std::function<double(WorkerId)>& load) {
  auto worker_load = [&](WorkerId w) -> double {
    return load ? load(w)
                : static_cast<double>(assignment.worker_load(w));
  };
  auto set_load = [&](const WorkerSet& ws) {
    double sum = 0.0;
    for (WorkerId w : ws) sum += worker_load(w);
    return sum;
  };

  std::vector<ContactDecision> decisions;
  decisions.reserve(new_pairs.size());
  for (auto [a, b] : new_pairs) {
    ContactDecision d;
    d.a = a;
    d.b = b;
    d.wa_before = assignment.workers_of(a);
    d.wb_before = assignment.workers_of(b);
    d.load_a = set_load(d.wa_before);
    d.load_b = set_load(d.wb_before);

    if (!d.wa_before.intersects(d.wb_before)) {
      d.branch = BalanceBranch::Merge;
      BodyId root;
      WorkerSet into;
      if (d.load_a <= d.load_b) {
        root = b;
        into = d.wa_before;
      } else {
        root = a;
        into = d.wb_before;
      }
      for (WorkerId w : into) {
        assignment.activate(root, w);
        d.activations.emplace_back(root, w);
      }
      const WorkerSet target = d.wa_before.set_union(d.wb_before);
      for (BodyId n : graph.bfs_vertices(root, gamma)) {
        d.grow_sequence.push_back(n);
        for (WorkerId w : target) {
          if (!assignment.is_active_in(n, w)) {
            assignment.activate(n, w);
            d.activations.emplace_back(n, w);
          }
        }
      }
    } else if (d.wa_before.size() > 1 && d.wb_before.size() == 1) {
      BridgeEval eval;
      eval.body = a;
      eval.result = is_bridge(assignment, graph, a, &eval.neighbor_sets);
      d.bridge_a = eval;
      if (!eval.result) {
        d.branch = BalanceBranch::ShrinkA;
        for (WorkerId w : d.wa_before.set_difference(d.wb_before)) {
          assignment.deactivate(a, w);
          d.deactivations.emplace_back(a, w);
        }
      }
    } else if (d.wb_before.size() > 1 && d.wa_before.size() == 1) {
      BridgeEval eval;
      eval.body = b;
      eval.result = is_bridge(assignment, graph, b, &eval.neighbor_sets);
      d.bridge_b = eval;
      if (!eval.result) {
        d.branch = BalanceBranch::ShrinkB;
        for (WorkerId w : d.wb_before.set_difference(d.wa_before)) {
          assignment.deactivate(b, w);
          d.deactivations.emplace_back(b, w);
        }
      }
    } else if (d.wa_before == d.wb_before && d.wa_before.size() > 1) {
      d.branch = BalanceBranch::DuplicateShrink;
      WorkerId best = d.wa_before.front();
      double best_load = worker_load(best);
      for (WorkerId w : d.wa_before) {
        const double l = worker_load(w);
        if (l < best_load) {
          best = w;
          best_load = l;
        }
      }
      for (WorkerId w : d.wa_before) {
        if (w == best) continue;
        assignment.deactivate(a, w);
        d.deactivations.emplace_back(a, w);
        assignment.deactivate(b, w);
        d.deactivations.emplace_back(b, w);
      }
    }
    decisions.push_back(std::move(d));
  }
  return decisions;
}

}  // namespace ovsim::overlap
