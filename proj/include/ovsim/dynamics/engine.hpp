#pragma once

#include <vector>

#include "ovsim/core/scene.hpp"
#include "ovsim/dynamics/narrowphase.hpp"
#include "ovsim/dynamics/solver.hpp"

namespace ovsim::dynamics {

struct StepOutput {
  std::vector<Contact> contacts;
  SolveResult solve;
};

/// Full physics engine over one scene with a mutable active set. Inactive
/// dynamic bodies keep their last state and are excluded from collision,
/// constraints and integration. Static bodies always participate in
/// collision and constraints. The same engine drives both the standalone
/// single-process simulation and every worker, so a one-worker run is
/// bitwise identical to the standalone result.
class Engine {
 public:
  explicit Engine(Scene scene, SolverConfig cfg = {});

  const Scene& scene() const { return scene_; }
  const SolverConfig& config() const { return cfg_; }

  bool is_active(BodyId id) const;
  /// Activating a static or unknown body throws std::logic_error.
  void set_active(BodyId id, bool active);
  std::vector<BodyId> active_ids() const;  // ascending

  const BodyState& state(BodyId id) const { return states_.at(id); }
  void set_state(BodyId id, const BodyState& s);
  const std::vector<BodyState>& states() const { return states_; }

  /// One timestep of the active set: collision pass, constraint assembly
  /// with warm starting, projected Gauss-Seidel, semi-implicit Euler.
  StepOutput step();

 private:
  Scene scene_;
  SolverConfig cfg_;
  std::vector<BodyState> states_;
  std::vector<char> active_;
  WarmStartCache cache_;
};

/// Semi-implicit Euler update of one body state:
/// v += h g + dv, w += dw, x += h v, q += (h/2) (0,w) q then normalize.
void integrate_body(BodyState& s, double h, const Vec3& gravity,
                    const Vec3& delta_lin, const Vec3& delta_ang);

}  // namespace ovsim::dynamics
