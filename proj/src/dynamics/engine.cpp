#include "ovsim/dynamics/engine.hpp"

#include <stdexcept>

#include "ovsim/dynamics/mlcp.hpp"

namespace ovsim::dynamics {

Engine::Engine(Scene scene, SolverConfig cfg)
    : scene_(std::move(scene)), cfg_(cfg) {
  states_.reserve(scene_.bodies.size());
  active_.assign(scene_.bodies.size(), 0);
  for (const RigidBody& b : scene_.bodies) {
    states_.push_back(b.initial_state);
  }
}

bool Engine::is_active(BodyId id) const {
  if (id >= active_.size()) throw std::logic_error("unknown body");
  return active_[id] != 0;
}

void Engine::set_active(BodyId id, bool active) {
  if (id >= active_.size()) throw std::logic_error("unknown body");
  if (scene_.bodies[id].is_static()) {
    throw std::logic_error("static bodies have no active flag");
  }
  active_[id] = active ? 1 : 0;
}

std::vector<BodyId> Engine::active_ids() const {
  std::vector<BodyId> ids;
  for (BodyId id = 0; id < active_.size(); ++id) {
    if (active_[id]) ids.push_back(id);
  }
  return ids;
}

void Engine::set_state(BodyId id, const BodyState& s) {
  if (id >= states_.size()) throw std::logic_error("unknown body");
  states_[id] = s;
}

StepOutput Engine::step() {
  const std::vector<BodyId> active = active_ids();
  StepOutput out;
  out.contacts = detect_collisions(scene_, states_, active);

  std::vector<const JointSpec*> joints;
  for (const JointSpec& j : scene_.joints) {
    const bool a_ok = scene_.bodies[j.body_a].is_static() || active_[j.body_a];
    const bool b_ok = scene_.bodies[j.body_b].is_static() || active_[j.body_b];
    if (a_ok && b_ok) joints.push_back(&j);
  }

  MlcpProblem problem =
      assemble_mlcp(scene_, states_, joints, out.contacts, scene_.timestep,
                    scene_.gravity, active, &cache_);
  out.solve = solve_pgs(problem, cfg_);

  cache_.clear();
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    const MlcpRow& r = problem.rows[i];
    cache_[r.group][r.sub] = out.solve.lambda[i];
  }

  for (std::size_t i = 0; i < problem.body_ids.size(); ++i) {
    const BodyId id = problem.body_ids[i];
    integrate_body(states_[id], scene_.timestep, scene_.gravity,
                   out.solve.delta_lin[i], out.solve.delta_ang[i]);
  }
  return out;
}

void integrate_body(BodyState& s, double h, const Vec3& gravity,
                    const Vec3& delta_lin, const Vec3& delta_ang) {
  s.linear_velocity += h * gravity + delta_lin;
  s.angular_velocity += delta_ang;
  s.position += h * s.linear_velocity;
  const Vec3& w = s.angular_velocity;
  Quat omega(0.0, w.x(), w.y(), w.z());
  Quat dot = omega * s.orientation;
  s.orientation.coeffs() += 0.5 * h * dot.coeffs();
  const double norm = s.orientation.norm();
  if (!(norm > 1e-12)) {
    throw std::runtime_error("integration produced a degenerate quaternion");
  }
  s.orientation.coeffs() /= norm;
}

}  // namespace ovsim::dynamics
