#include "ovsim/dynamics/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ovsim::dynamics {
namespace {

double row_w(const MlcpProblem& p, const MlcpRow& r, double lambda,
             const std::vector<Vec3>& dlin, const std::vector<Vec3>& dang) {
  double w = p.compliance * lambda - r.rhs;
  if (r.local_a >= 0) {
    const auto i = static_cast<std::size_t>(r.local_a);
    w += r.ja_lin.dot(dlin[i]) + r.ja_ang.dot(dang[i]);
  }
  if (r.local_b >= 0) {
    const auto i = static_cast<std::size_t>(r.local_b);
    w += r.jb_lin.dot(dlin[i]) + r.jb_ang.dot(dang[i]);
  }
  return w;
}

}  // namespace

SolveResult solve_pgs(const MlcpProblem& p, const SolverConfig& cfg,
                      const SweepObserver& observer) {
  const std::size_t m = p.rows.size();
  const std::size_t nb = p.body_ids.size();
  SolveResult res;
  res.lambda.assign(m, 0.0);
  res.delta_lin.assign(nb, Vec3::Zero());
  res.delta_ang.assign(nb, Vec3::Zero());
  if (m == 0) return res;

  std::vector<Vec3>& dlin = res.delta_lin;
  std::vector<Vec3>& dang = res.delta_ang;
  auto apply = [&](const MlcpRow& r, double delta) {
    if (r.local_a >= 0) {
      const auto i = static_cast<std::size_t>(r.local_a);
      dlin[i] += p.inv_mass[i] * r.ja_lin * delta;
      dang[i] += p.inv_inertia_world[i] * (r.ja_ang * delta);
    }
    if (r.local_b >= 0) {
      const auto i = static_cast<std::size_t>(r.local_b);
      dlin[i] += p.inv_mass[i] * r.jb_lin * delta;
      dang[i] += p.inv_inertia_world[i] * (r.jb_ang * delta);
    }
  };

  for (std::size_t i = 0; i < m; ++i) {
    const MlcpRow& r = p.rows[i];
    const double l0 = std::clamp(r.lambda0, r.lo, r.hi);
    res.lambda[i] = l0;
    if (l0 != 0.0) apply(r, l0);
  }

  auto bounds_of = [&](const MlcpRow& r, double& lo, double& hi) {
    if (r.kind == RowKind::Friction) {
      const double ln = res.lambda[static_cast<std::size_t>(r.normal_row)];
      lo = -r.mu * ln;
      hi = r.mu * ln;
    } else {
      lo = r.lo;
      hi = r.hi;
    }
  };

  double prev_residual = -1.0;
  for (int sweep = 1; sweep <= cfg.max_iterations; ++sweep) {
    for (std::size_t i = 0; i < m; ++i) {
      const MlcpRow& r = p.rows[i];
      double lo, hi;
      bounds_of(r, lo, hi);
      const double w = row_w(p, r, res.lambda[i], dlin, dang);
      double next = res.lambda[i] - w / r.diag;
      next = std::clamp(next, lo, hi);
      const double delta = next - res.lambda[i];
      if (delta != 0.0) {
        res.lambda[i] = next;
        apply(r, delta);
      }
    }

    double residual = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const MlcpRow& r = p.rows[i];
      double lo, hi;
      bounds_of(r, lo, hi);
      const double lambda = res.lambda[i];
      if (lambda < lo || lambda > hi) ++res.bound_violations;
      const double w = row_w(p, r, lambda, dlin, dang);
      // std::max drops NaN operands, so a poisoned impulse would read as
      // residual zero; catch it before it folds into the aggregate.
      if (!std::isfinite(lambda) || !std::isfinite(w)) {
        throw SolverFailure("pgs diverged: non-finite impulse in row " +
                            std::to_string(i) + " at sweep " +
                            std::to_string(sweep));
      }
      double viol;
      if (lo == hi) {
        viol = 0.0;
      } else if (lambda <= lo) {
        viol = std::max(0.0, -w);
      } else if (lambda >= hi) {
        viol = std::max(0.0, w);
      } else {
        viol = std::abs(w);
      }
      residual = std::max(residual, viol);
    }
    if (!std::isfinite(residual)) {
      throw SolverFailure("pgs diverged: non-finite residual at sweep " +
                          std::to_string(sweep) + " (" +
                          std::to_string(m) + " rows)");
    }
    if (prev_residual >= 0.0 && residual > prev_residual + 1e-12) {
      ++res.residual_increases;
      res.max_residual_increase =
          std::max(res.max_residual_increase, residual - prev_residual);
    }
    prev_residual = residual;
    res.residual = residual;
    res.iterations = sweep;
    if (observer) observer(sweep, p, res.lambda);
    if (residual < cfg.tolerance) break;
  }
  return res;
}

}  // namespace ovsim::dynamics
