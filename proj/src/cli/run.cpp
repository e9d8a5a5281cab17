#include "ovsim/cli/run.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>
#include <utility>

#include <json.hpp>

#include "ovsim/cli/metrics.hpp"
#include "ovsim/coord/coordinator.hpp"
#include "ovsim/coord/event_log.hpp"
#include "ovsim/coord/trajectory.hpp"
#include "ovsim/core/log.hpp"
#include "ovsim/core/scene.hpp"
#include "ovsim/dynamics/engine.hpp"
#include "ovsim/transport/connection.hpp"
#include "ovsim/worker/runtime.hpp"

namespace ovsim::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nlohmann::ordered_json;

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos)
    throw ValidationError("address '" + s + "': expected host:port");
  Endpoint ep;
  ep.host = s.substr(0, colon);
  if (ep.host.empty()) ep.host = "127.0.0.1";
  const std::string port_text = s.substr(colon + 1);
  int port = -1;
  try {
    port = std::stoi(port_text);
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535)
    throw ValidationError("address '" + s + "': bad port '" + port_text + "'");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Mean of a per-record value over records with lo < step <= hi.
template <typename F>
ordered_json range_mean(const std::vector<coord::StepRecord>& recs,
                        std::uint32_t lo, std::uint32_t hi, F&& value) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : recs) {
    if (r.step > lo && r.step <= hi) {
      sum += value(r);
      ++n;
    }
  }
  if (n == 0) return nullptr;
  return sum / static_cast<double>(n);
}

ordered_json assignment_json(const WorkerAssignment& assignment,
                             const Scene& scene) {
  ordered_json out = ordered_json::object();
  for (BodyId id : scene.dynamic_ids()) {
    out[std::to_string(id)] = assignment.workers_of(id).values();
  }
  return out;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["scene"] = cfg.scene_path;
  j["workers"] = cfg.workers;
  j["gamma"] = cfg.gamma;
  j["beta"] = cfg.beta;
  j["dt"] = cfg.dt;
  j["steps"] = cfg.steps;
  j["transport"] = cfg.transport;
  j["worker_addrs"] = cfg.worker_addrs;
  j["solver_iters"] = cfg.solver_iters;
  j["solver_tol"] = cfg.solver_tol;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["balance_metric"] = cfg.balance_metric;
  j["no_overlap"] = cfg.no_overlap;
  j["full_weight_recompute"] = cfg.full_weight_recompute;
  j["barrier_timeout_ms"] = cfg.barrier_timeout_ms;
  return j;
}

void add_load_summary(ordered_json& j,
                      const std::vector<coord::StepRecord>& recs,
                      const std::string& metric) {
  j["metric"] = metric;
  if (recs.empty()) {
    j["final_ratio"] = nullptr;
    j["last500_mean_ratio"] = nullptr;
    j["last500_max_ratio"] = nullptr;
    return;
  }
  j["final_ratio"] = load_ratio(recs.back().worker_active);
  const std::size_t window = std::min<std::size_t>(500, recs.size());
  double sum = 0.0, worst = 0.0;
  for (std::size_t i = recs.size() - window; i < recs.size(); ++i) {
    const double r = load_ratio(recs[i].worker_active);
    sum += r;
    worst = std::max(worst, r);
  }
  j["last500_mean_ratio"] = sum / static_cast<double>(window);
  j["last500_max_ratio"] = worst;
}

void write_report(const RunConfig& cfg, const Scene& scene,
                  const std::vector<coord::StepRecord>& recs,
                  const coord::RunStats& stats,
                  const ordered_json& initial_assignment,
                  const ordered_json& final_assignment, double total_wall_ms,
                  std::size_t final_overlap_size) {
  ordered_json j;
  j["config"] = config_json(cfg);
  j["scene_summary"] = {
      {"bodies", scene.bodies.size()},
      {"dynamic_bodies", scene.dynamic_count()},
      {"joints", scene.joints.size()},
      {"effective_workers", scene.num_workers},
      {"timestep_s", scene.timestep},
  };

  const auto n = static_cast<double>(std::max<std::size_t>(recs.size(), 1));
  j["timing"] = {
      {"steps", recs.size()},
      {"total_wall_ms", total_wall_ms},
      {"mean_step_ms",
       std::accumulate(recs.begin(), recs.end(), 0.0,
                       [](double a, const coord::StepRecord& r) {
                         return a + r.wall_ms;
                       }) /
           n},
  };

  ordered_json ov;
  ov["weight_recomputes"] = stats.weight_recomputes;
  ov["max_weight_sum_error"] = stats.max_weight_sum_error;
  ov["min_weight"] =
      stats.blend_count > 0 ? ordered_json(stats.min_weight) : nullptr;
  ov["blend_count"] = stats.blend_count;
  ov["max_blend_quat_norm_error"] = stats.max_blend_quat_norm_error;
  ov["max_overlap_size"] = stats.max_overlap_size;
  ov["final_overlap_size"] = final_overlap_size;
  j["overlap"] = ov;

  j["balance"] = {
      {"decisions", stats.balance_decisions},
      {"branch_counts",
       {{"none", stats.branch_counts[0]},
        {"merge", stats.branch_counts[1]},
        {"shrink_a", stats.branch_counts[2]},
        {"shrink_b", stats.branch_counts[3]},
        {"duplicate_shrink", stats.branch_counts[4]}}},
  };

  ordered_json load;
  add_load_summary(load, recs, cfg.balance_metric);
  j["load"] = load;

  const auto steps = static_cast<std::uint32_t>(recs.size());
  ordered_json solver;
  solver["residual_mean_steps_501_1000"] = range_mean(
      recs, 500, 1000, [](const coord::StepRecord& r) { return r.residual_total; });
  solver["residual_mean_last_500"] =
      range_mean(recs, steps > 500 ? steps - 500 : 0, steps,
                 [](const coord::StepRecord& r) { return r.residual_total; });
  solver["residual_final"] = recs.empty() ? ordered_json(nullptr)
                                          : ordered_json(recs.back().residual_total);
  j["solver"] = solver;

  ordered_json joints;
  joints["violation_mean_rel"] = range_mean(
      recs, 0, steps,
      [](const coord::StepRecord& r) { return r.joint_violation_max_rel; });
  double worst = 0.0;
  for (const auto& r : recs) worst = std::max(worst, r.joint_violation_max_rel);
  joints["violation_max_rel"] = worst;
  joints["violation_final_rel"] =
      recs.empty() ? ordered_json(nullptr)
                   : ordered_json(recs.back().joint_violation_max_rel);
  j["joints"] = joints;

  j["assignment"] = {{"initial", initial_assignment},
                     {"final", final_assignment}};
  j["files"] = {{"trajectory", "trajectory.bin"},
                {"trajectory_meta", "trajectory.meta.json"},
                {"frames", "frames.csv"},
                {"per_worker", "per_worker.csv"},
                {"errors", "errors.csv"},
                {"events", "events.jsonl"}};

  std::ofstream out(fs::path(cfg.out_dir) / "report.json");
  out << j.dump(2) << "\n";
}

int run_standalone(const RunConfig& cfg, Scene scene) {
  dynamics::SolverConfig solver;
  solver.max_iterations = cfg.solver_iters;
  solver.tolerance = cfg.solver_tol;

  dynamics::Engine engine(std::move(scene), solver);
  const Scene& sc = engine.scene();
  for (BodyId id : sc.dynamic_ids()) engine.set_active(id, true);
  const double diag = sc.bounding_box_diagonal();

  MetricsWriter metrics(cfg.out_dir);
  coord::TrajectoryWriter traj(
      (fs::path(cfg.out_dir) / "trajectory.bin").string(),
      (fs::path(cfg.out_dir) / "trajectory.meta.json").string(),
      sc.dynamic_ids());
  traj.write_frame(0, engine.states());

  const auto t0 = Clock::now();
  for (int i = 1; i <= cfg.steps; ++i) {
    const auto s0 = Clock::now();
    dynamics::StepOutput out = engine.step();

    coord::StepRecord rec;
    rec.step = static_cast<std::uint32_t>(i);
    rec.wall_ms = ms_since(s0);
    rec.contact_points = out.contacts.size();
    rec.residual_total = out.solve.residual;
    rec.joint_violation_max_rel = max_joint_gap(sc, engine.states()) / diag;
    rec.worker_active = {engine.active_ids().size()};
    rec.worker_contacts = {out.contacts.size()};
    rec.overlap_size = 0;
    metrics.add(rec);
    traj.write_frame(rec.step, engine.states());
    if (i % 500 == 0)
      OVSIM_INFO("standalone step %d/%d (%.1f ms elapsed)", i, cfg.steps,
                 ms_since(t0));
  }
  const double total_ms = ms_since(t0);
  metrics.close();
  traj.close();

  write_report(cfg, sc, metrics.records(), coord::RunStats{}, nullptr, nullptr,
               total_ms, 0);
  std::printf("standalone run: %d steps in %.1f ms, results in %s\n",
              cfg.steps, total_ms, cfg.out_dir.c_str());
  return 0;
}

int run_coordinated(const RunConfig& cfg, Scene scene) {
  const int workers = scene.num_workers;
  std::vector<transport::ConnectionPtr> conns;
  std::vector<std::jthread> worker_threads;

  if (cfg.transport == "inproc") {
    for (int w = 0; w < workers; ++w) {
      auto [coord_end, worker_end] = transport::make_inproc_pair();
      conns.push_back(std::move(coord_end));
      worker_threads.emplace_back(
          [end = std::move(worker_end)]() mutable {
            try {
              worker::WorkerRuntime runtime(std::move(end));
              runtime.run();
            } catch (const std::exception& e) {
              OVSIM_ERROR("in-process worker exited abnormally: %s", e.what());
            }
          });
    }
  } else {  // tcp
    if (cfg.worker_addrs.size() != static_cast<std::size_t>(workers)) {
      OVSIM_ERROR("tcp transport needs exactly %d --worker-addr values, got %zu",
                  workers, cfg.worker_addrs.size());
      return 1;
    }
    for (const std::string& addr : cfg.worker_addrs) {
      const Endpoint ep = parse_endpoint(addr);
      conns.push_back(transport::connect_tcp(ep.host, ep.port));
    }
  }

  coord::CoordinatorParams params;
  params.gamma = cfg.gamma;
  params.beta = cfg.beta;
  params.solver.max_iterations = cfg.solver_iters;
  params.solver.tolerance = cfg.solver_tol;
  params.no_overlap = cfg.no_overlap;
  params.full_weight_recompute = cfg.full_weight_recompute;
  params.balance_metric = cfg.balance_metric;
  params.barrier_timeout = std::chrono::milliseconds(cfg.barrier_timeout_ms);

  coord::Coordinator coordinator(std::move(scene), std::move(conns), params);
  const Scene& sc = coordinator.scene();

  coord::EventLog events((fs::path(cfg.out_dir) / "events.jsonl").string());
  coordinator.set_event_log(&events);

  MetricsWriter metrics(cfg.out_dir);
  coord::TrajectoryWriter traj(
      (fs::path(cfg.out_dir) / "trajectory.bin").string(),
      (fs::path(cfg.out_dir) / "trajectory.meta.json").string(),
      sc.dynamic_ids());

  int exit_code = 0;
  double total_ms = 0.0;
  ordered_json initial_assignment, final_assignment;
  try {
    coordinator.initialize();
    initial_assignment = assignment_json(coordinator.assignment(), sc);
    traj.write_frame(0, coordinator.states());

    const auto t0 = Clock::now();
    for (int i = 1; i <= cfg.steps; ++i) {
      coord::StepRecord rec = coordinator.step();
      metrics.add(rec);
      traj.write_frame(rec.step, coordinator.states());
      if (i % 500 == 0)
        OVSIM_INFO("step %d/%d (%.1f ms elapsed, overlap %zu)", i, cfg.steps,
                   ms_since(t0), rec.overlap_size);
    }
    total_ms = ms_since(t0);
    final_assignment = assignment_json(coordinator.assignment(), sc);
  } catch (const std::exception& e) {
    OVSIM_ERROR("run aborted: %s", e.what());
    exit_code = 2;
  }

  const std::size_t final_overlap =
      coordinator.assignment().overlap_set().size();
  coordinator.shutdown();
  worker_threads.clear();  // joins the in-process workers
  events.close();
  metrics.close();
  traj.close();

  write_report(cfg, sc, metrics.records(), coordinator.stats(),
               initial_assignment, final_assignment, total_ms, final_overlap);
  if (exit_code == 0)
    std::printf("%s run: %d steps, %d workers in %.1f ms, results in %s\n",
                cfg.transport.c_str(), cfg.steps, workers, total_ms,
                cfg.out_dir.c_str());
  return exit_code;
}

}  // namespace

int run_simulation(const RunConfig& cfg) {
  try {
    if (cfg.transport != "inproc" && cfg.transport != "tcp" &&
        cfg.transport != "none") {
      OVSIM_ERROR("unknown transport '%s' (expected inproc, tcp or none)",
                  cfg.transport.c_str());
      return 1;
    }
    if (cfg.steps < 0 || cfg.gamma < 0 || cfg.beta < 1) {
      OVSIM_ERROR("invalid run parameters (steps >= 0, gamma >= 0, beta >= 1)");
      return 1;
    }
    if (cfg.balance_metric != "bodies" && cfg.balance_metric != "contacts") {
      OVSIM_ERROR("unknown balance metric '%s'", cfg.balance_metric.c_str());
      return 1;
    }

    Scene scene = load_scene(cfg.scene_path);
    if (cfg.workers > 0) {
      scene.num_workers = cfg.workers;
      for (RigidBody& b : scene.bodies)
        b.initial_partition =
            b.initial_partition % static_cast<WorkerId>(cfg.workers);
    }
    if (cfg.dt > 0.0) scene.timestep = cfg.dt;

    fs::create_directories(cfg.out_dir);

    if (cfg.transport == "none") return run_standalone(cfg, std::move(scene));
    return run_coordinated(cfg, std::move(scene));
  } catch (const ParseError& e) {
    OVSIM_ERROR("%s", e.what());
    return 1;
  } catch (const ValidationError& e) {
    OVSIM_ERROR("%s", e.what());
    return 1;
  } catch (const std::exception& e) {
    OVSIM_ERROR("run failed: %s", e.what());
    return 2;
  }
}

int worker_serve(const std::string& listen_addr, int step_delay_ms) {
  try {
    const Endpoint ep = parse_endpoint(listen_addr);
    transport::TcpListener listener(ep.host, ep.port);
    std::printf("LISTENING %u\n", listener.port());
    std::fflush(stdout);
    auto conn = listener.accept_one();

    worker::WorkerOptions opts;
    opts.step_delay = std::chrono::milliseconds(step_delay_ms);
    worker::WorkerRuntime runtime(std::move(conn), opts);
    runtime.run();
    return 0;
  } catch (const std::exception& e) {
    OVSIM_ERROR("worker failed: %s", e.what());
    return 1;
  }
}

}  // namespace ovsim::cli
