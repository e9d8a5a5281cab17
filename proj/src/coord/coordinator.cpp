#include "ovsim/coord/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ovsim/core/log.hpp"
#include "ovsim/dynamics/narrowphase.hpp"

namespace ovsim::coord {
namespace {

using Clock = std::chrono::steady_clock;

/// Marks everything within `depth` hops of any source (sources included).
void mark_within(const std::vector<std::vector<BodyId>>& adj,
                 const std::vector<BodyId>& sources, int depth,
                 std::vector<char>& mark) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<BodyId> frontier;
  for (BodyId s : sources) {
    if (s < adj.size() && dist[s] < 0) {
      dist[s] = 0;
      mark[s] = 1;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const BodyId v = frontier.front();
    frontier.pop_front();
    if (dist[v] == depth) continue;
    for (BodyId n : adj[v]) {
      if (dist[n] >= 0) continue;
      dist[n] = dist[v] + 1;
      mark[n] = 1;
      frontier.push_back(n);
    }
  }
}

}  // namespace

Coordinator::Coordinator(Scene scene,
                         std::vector<transport::ConnectionPtr> workers,
                         CoordinatorParams params)
    : scene_(std::move(scene)),
      workers_(std::move(workers)),
      params_(std::move(params)) {
  if (static_cast<int>(workers_.size()) != scene_.num_workers) {
    throw ValidationError("scene expects " +
                          std::to_string(scene_.num_workers) +
                          " workers, got " + std::to_string(workers_.size()));
  }
}

void Coordinator::initialize() {
  assignment_ = WorkerAssignment::from_scene(scene_);
  graph_ = graph::ConstraintGraph(scene_);
  blended_.clear();
  for (const RigidBody& b : scene_.bodies) blended_.push_back(b.initial_state);
  bbox_diag_ = scene_.bounding_box_diagonal();

  if (!params_.no_overlap) {
    overlap::partition_articulated(assignment_, graph_, scene_,
                                   params_.gamma);
  }

  const std::string scene_json = serialize_scene(scene_);
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    transport::HelloMsg hello;
    hello.worker_id = static_cast<WorkerId>(w);
    hello.max_iterations =
        static_cast<std::uint32_t>(params_.solver.max_iterations);
    hello.tolerance = params_.solver.tolerance;
    hello.scene_json = scene_json;
    workers_[w]->send(transport::make_hello(hello));
  }
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    auto reply = workers_[w]->receive_for(params_.barrier_timeout);
    if (!reply) {
      throw std::runtime_error("worker " + std::to_string(w) +
                               ": no handshake ack");
    }
    if (reply->type == transport::MsgType::Error) {
      const auto err = transport::parse_error(*reply);
      throw std::runtime_error("worker " + std::to_string(w) +
                               " rejected handshake: " + err.text);
    }
    if (reply->type != transport::MsgType::HelloAck) {
      throw std::runtime_error("worker " + std::to_string(w) +
                               ": unexpected handshake reply");
    }
  }

  for (BodyId b : scene_.dynamic_ids()) {
    for (WorkerId w : assignment_.workers_of(b)) {
      workers_[w]->send(transport::make_activate(b));
    }
  }

  weights_.clear();
  for (BodyId o : assignment_.overlap_set()) {
    overlap::BlendWeights bw =
        overlap::compute_weights(assignment_, graph_, o, params_.beta);
    note_weights(bw);
    weights_[o] = std::move(bw);
  }
  stats_.max_overlap_size =
      std::max(stats_.max_overlap_size, assignment_.overlap_set().size());

  if (event_log_) {
    event_log_->write_init(assignment_record(assignment_, scene_,
                                             params_.gamma, params_.beta,
                                             params_.balance_metric));
  }
  initialized_ = true;
}

void Coordinator::push_reset_batches() {
  std::vector<std::vector<transport::ResetEntry>> batches(workers_.size());
  for (BodyId o : assignment_.overlap_set()) {
    for (WorkerId w : assignment_.workers_of(o)) {
      batches[w].push_back({o, blended_[o]});
    }
  }
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    if (!batches[w].empty()) {
      workers_[w]->send(transport::make_reset_batch(batches[w]));
    }
  }
}

void Coordinator::apply_balance_messages(
    const std::vector<overlap::ContactDecision>& decisions) {
  for (const auto& d : decisions) {
    ++stats_.balance_decisions;
    ++stats_.branch_counts[static_cast<int>(d.branch)];
    for (const auto& [b, w] : d.activations) {
      workers_[w]->send(transport::make_activate(b));
      workers_[w]->send(transport::make_reset_state(b, blended_[b]));
    }
    for (const auto& [b, w] : d.deactivations) {
      workers_[w]->send(transport::make_deactivate(b));
    }
    if (event_log_) event_log_->write_contact(step_index_, d);
  }
}

void Coordinator::note_weights(const overlap::BlendWeights& w) {
  ++stats_.weight_recomputes;
  double sum = 0.0;
  for (double v : w.weights) {
    sum += v;
    stats_.min_weight = std::min(stats_.min_weight, v);
  }
  stats_.max_weight_sum_error =
      std::max(stats_.max_weight_sum_error, std::abs(sum - 1.0));
}

void Coordinator::recompute_weights(
    const std::vector<overlap::ContactDecision>& decisions,
    const std::vector<std::pair<BodyId, BodyId>>& added_pairs,
    const std::vector<std::pair<BodyId, BodyId>>& removed_pairs,
    const std::vector<std::vector<BodyId>>& prev_adjacency) {
  const auto& overlap_now = assignment_.overlap_set();

  std::vector<char> dirty(scene_.bodies.size(), 0);
  if (params_.full_weight_recompute) {
    for (BodyId o : overlap_now) dirty[o] = 1;
  } else {
    std::vector<BodyId> changed;
    for (const auto& d : decisions) {
      for (const auto& [b, w] : d.activations) changed.push_back(b);
      for (const auto& [b, w] : d.deactivations) changed.push_back(b);
    }
    for (const auto& [a, b] : added_pairs) {
      changed.push_back(a);
      changed.push_back(b);
    }
    for (const auto& [a, b] : removed_pairs) {
      changed.push_back(a);
      changed.push_back(b);
    }
    if (!changed.empty()) {
      mark_within(prev_adjacency, changed, params_.beta, dirty);
      mark_within(graph_.adjacency(), changed, params_.beta, dirty);
    }
  }

  for (BodyId o : overlap_now) {
    if (dirty[o] || !weights_.count(o)) {
      overlap::BlendWeights bw =
          overlap::compute_weights(assignment_, graph_, o, params_.beta);
      note_weights(bw);
      weights_[o] = std::move(bw);
    }
  }
  for (auto it = weights_.begin(); it != weights_.end();) {
    if (!overlap_now.count(it->first)) {
      it = weights_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<std::size_t> Coordinator::contact_participation(
    const std::vector<Contact>& contacts) const {
  std::vector<std::size_t> counts(workers_.size(), 0);
  for (const Contact& c : contacts) {
    const bool a_static = scene_.is_static(c.body_a);
    const bool b_static = scene_.is_static(c.body_b);
    if (a_static && b_static) continue;
    if (a_static || b_static) {
      const BodyId dyn = a_static ? c.body_b : c.body_a;
      for (WorkerId w : assignment_.workers_of(dyn)) ++counts[w];
    } else {
      const WorkerSet& wa = assignment_.workers_of(c.body_a);
      const WorkerSet& wb = assignment_.workers_of(c.body_b);
      for (WorkerId w : wa) {
        if (wb.contains(w)) ++counts[w];
      }
    }
  }
  return counts;
}

double Coordinator::max_joint_violation() const {
  return max_joint_gap(scene_, blended_) / bbox_diag_;
}

void Coordinator::barrier(
    std::vector<std::unordered_map<BodyId, BodyState>>& states,
    double& residual_total) {
  const auto deadline = Clock::now() + params_.barrier_timeout;
  states.assign(workers_.size(), {});
  residual_total = 0.0;
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    auto reply = workers_[w]->receive_for(
        left.count() > 0 ? left : std::chrono::milliseconds(0));
    if (!reply) {
      throw std::runtime_error(
          "barrier timeout at step " + std::to_string(step_index_) +
          " waiting for worker " + std::to_string(w));
    }
    if (reply->type == transport::MsgType::Error) {
      const auto err = transport::parse_error(*reply);
      throw std::runtime_error("worker " + std::to_string(w) +
                               " failed at step " +
                               std::to_string(step_index_) + ": " + err.text);
    }
    const auto ack = transport::parse_step_ack(*reply);
    if (ack.states.size() != assignment_.worker_load(w)) {
      throw std::runtime_error(
          "worker " + std::to_string(w) + " acked " +
          std::to_string(ack.states.size()) + " bodies, expected " +
          std::to_string(assignment_.worker_load(w)));
    }
    residual_total += ack.residual;
    auto& map = states[w];
    map.reserve(ack.states.size());
    for (const auto& e : ack.states) map.emplace(e.body, e.state);
  }
}

StepRecord Coordinator::step() {
  if (!initialized_) throw std::logic_error("coordinator not initialized");
  const auto t0 = Clock::now();
  ++step_index_;

  push_reset_batches();

  const std::vector<BodyId> all_dynamic = scene_.dynamic_ids();
  const std::vector<Contact> contacts =
      dynamics::detect_collisions(scene_, blended_, all_dynamic);

  // Diff the contact pair set before replacing the graph edges.
  std::set<std::uint64_t> pair_keys;
  for (const Contact& c : contacts) {
    if (scene_.is_static(c.body_a) || scene_.is_static(c.body_b)) continue;
    pair_keys.insert(contact_pair_key(c.body_a, c.body_b));
  }
  std::vector<std::pair<BodyId, BodyId>> added;
  std::vector<std::pair<BodyId, BodyId>> removed;
  for (std::uint64_t key : pair_keys) {
    if (!prev_pairs_.count(key)) {
      added.emplace_back(static_cast<BodyId>(key & 0xFFFFFFFFu),
                         static_cast<BodyId>(key >> 32));
    }
  }
  for (std::uint64_t key : prev_pairs_) {
    if (!pair_keys.count(key)) {
      removed.emplace_back(static_cast<BodyId>(key & 0xFFFFFFFFu),
                           static_cast<BodyId>(key >> 32));
    }
  }
  // Balance processes new pairs in ascending (min id, max id) order.
  std::sort(added.begin(), added.end());

  const std::vector<std::vector<BodyId>> prev_adjacency = graph_.adjacency();
  graph_.update_contacts(contacts);

  std::vector<overlap::ContactDecision> decisions;
  if (!params_.no_overlap) {
    std::function<double(WorkerId)> load_fn;
    if (params_.balance_metric == "contacts") {
      const std::vector<std::size_t> snapshot =
          contact_participation(contacts);
      load_fn = [snapshot](WorkerId w) {
        return static_cast<double>(snapshot.at(w));
      };
    }
    decisions =
        overlap::load_balance(assignment_, graph_, added, params_.gamma,
                              load_fn);
    apply_balance_messages(decisions);

    // A collapse can deactivate an endpoint of a persisting contact out
    // of every worker it shares with its partner. No engine simulates
    // such a pair any more, so the bodies sink into each other until a
    // later merge exposes the accumulated depth as a huge velocity kick.
    // Re-run the balancer on every touching pair left without a common
    // worker, one pair at a time with a fresh coverage check: a pair that
    // is still uncovered has disjoint sets and takes the merge rule,
    // which only activates and therefore cannot orphan further pairs.
    std::vector<std::pair<BodyId, BodyId>> uncovered;
    for (std::uint64_t key : pair_keys) {
      const auto a = static_cast<BodyId>(key & 0xFFFFFFFFu);
      const auto b = static_cast<BodyId>(key >> 32);
      if (!assignment_.workers_of(a).intersects(assignment_.workers_of(b))) {
        uncovered.emplace_back(a, b);
      }
    }
    std::sort(uncovered.begin(), uncovered.end());
    for (const auto& [a, b] : uncovered) {
      if (assignment_.workers_of(a).intersects(assignment_.workers_of(b))) {
        continue;  // covered by an earlier repair merge
      }
      auto repairs = overlap::load_balance(assignment_, graph_, {{a, b}},
                                           params_.gamma, load_fn);
      apply_balance_messages(repairs);
      decisions.insert(decisions.end(),
                       std::make_move_iterator(repairs.begin()),
                       std::make_move_iterator(repairs.end()));
    }
  }

  recompute_weights(decisions, added, removed, prev_adjacency);

  for (auto& worker : workers_) worker->send(transport::make_step());

  std::vector<std::unordered_map<BodyId, BodyState>> ack_states;
  double residual_total = 0.0;
  barrier(ack_states, residual_total);

  for (BodyId b : all_dynamic) {
    const WorkerSet& wb = assignment_.workers_of(b);
    if (wb.size() == 1) {
      const auto& map = ack_states[wb.front()];
      const auto it = map.find(b);
      if (it == map.end()) {
        throw std::runtime_error("worker " + std::to_string(wb.front()) +
                                 " ack missing body " + std::to_string(b));
      }
      blended_[b] = it->second;
    }
  }
  std::vector<BodyState> samples;
  for (BodyId o : assignment_.overlap_set()) {
    const overlap::BlendWeights& bw = weights_.at(o);
    samples.clear();
    for (WorkerId w : assignment_.workers_of(o)) {
      const auto it = ack_states[w].find(o);
      if (it == ack_states[w].end()) {
        throw std::runtime_error("worker " + std::to_string(w) +
                                 " ack missing overlap body " +
                                 std::to_string(o));
      }
      samples.push_back(it->second);
    }
    double accum_norm = 0.0;
    blended_[o] = overlap::blend_states(samples, bw.weights, &accum_norm);
    ++stats_.blend_count;
    stats_.max_blend_quat_norm_error = std::max(
        stats_.max_blend_quat_norm_error, std::abs(accum_norm - 1.0));
  }

  prev_pairs_ = std::move(pair_keys);
  stats_.max_overlap_size =
      std::max(stats_.max_overlap_size, assignment_.overlap_set().size());

  StepRecord rec;
  rec.step = step_index_;
  rec.contact_points = contacts.size();
  rec.residual_total = residual_total;
  rec.joint_violation_max_rel = max_joint_violation();
  rec.worker_active.resize(workers_.size());
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    rec.worker_active[w] = assignment_.worker_load(w);
  }
  rec.worker_contacts = contact_participation(contacts);
  rec.overlap_size = assignment_.overlap_set().size();
  rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0)
                    .count();
  return rec;
}

void Coordinator::shutdown() {
  for (auto& worker : workers_) {
    if (worker) worker->close();
  }
}

}  // namespace ovsim::coord
