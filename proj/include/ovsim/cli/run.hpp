#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ovsim::cli {

struct RunConfig {
  std::string scene_path;
  int workers = 0;      // 0: use the scene's worker count
  int gamma = 0;
  int beta = 4;
  double dt = 0.0;      // 0: use the scene's timestep
  int steps = 1000;
  std::string transport = "inproc";  // inproc | tcp | none
  std::vector<std::string> worker_addrs;  // host:port per worker (tcp)
  int solver_iters = 1000;
  double solver_tol = 1e-10;
  std::uint64_t seed = 0;  // recorded in the report; runs are deterministic
  std::string out_dir = "out";
  std::string balance_metric = "bodies";
  bool no_overlap = false;
  bool full_weight_recompute = false;
  int barrier_timeout_ms = 30000;
};

/// Runs one simulation and writes trajectory.bin, trajectory.meta.json,
/// frames.csv, per_worker.csv, errors.csv, events.jsonl and report.json
/// into out_dir. Returns 0 on success, 1 on configuration problems, 2 on
/// a run abort (worker failure, barrier timeout, solver divergence).
int run_simulation(const RunConfig& cfg);

/// Worker executable body: listen, accept exactly one coordinator, serve
/// until disconnect. Prints "LISTENING <port>" once the socket is bound.
int worker_serve(const std::string& listen_addr, int step_delay_ms);

}  // namespace ovsim::cli
