#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "ovsim/dynamics/mlcp.hpp"

namespace ovsim::dynamics {

struct SolverConfig {
  int max_iterations = 1000;
  double tolerance = 1e-10;
};

/// Thrown when the iteration produces non-finite values.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveResult {
  std::vector<double> lambda;  // per row
  int iterations = 0;          // sweeps actually run
  double residual = 0.0;       // max complementarity violation
  // velocity corrections M^-1 J^T lambda, per local body of the problem
  std::vector<Vec3> delta_lin;
  std::vector<Vec3> delta_ang;
  // diagnostics accumulated across sweeps
  int bound_violations = 0;     // rows ever caught outside their box
  int residual_increases = 0;   // sweeps where the residual grew
  double max_residual_increase = 0.0;
};

/// Called after every sweep with the sweep number (1-based) and the
/// current impulse vector.
using SweepObserver =
    std::function<void(int, const MlcpProblem&, const std::vector<double>&)>;

/// Projected Gauss-Seidel over the boxed LCP, matrix-free. Rows are swept
/// in index order; friction boxes are refreshed from the current normal
/// impulse at the start of each row visit. Terminates when the
/// complementarity residual drops below the tolerance or after
/// max_iterations sweeps.
SolveResult solve_pgs(const MlcpProblem& problem, const SolverConfig& cfg,
                      const SweepObserver& observer = {});

}  // namespace ovsim::dynamics
