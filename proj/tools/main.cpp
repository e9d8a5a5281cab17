#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ovsim/cli/generators.hpp"
#include "ovsim/cli/run.hpp"
#include "ovsim/core/scene.hpp"

int main(int argc, char** argv) {
  CLI::App app{"overlap-set distributed rigid body simulator"};
  app.require_subcommand(1);

  ovsim::cli::RunConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "simulate a scene file");
  run->add_option("--scene", run_cfg.scene_path, "scene JSON file")
      ->required();
  run->add_option("--workers", run_cfg.workers,
                  "worker count override (0 = scene value)");
  run->add_option("--gamma", run_cfg.gamma, "overlap growth radius");
  run->add_option("--beta", run_cfg.beta, "blend weight search depth");
  run->add_option("--dt", run_cfg.dt, "timestep override in seconds");
  run->add_option("--steps", run_cfg.steps, "number of steps");
  run->add_option("--transport", run_cfg.transport,
                  "inproc, tcp or none (single-process baseline)");
  run->add_option("--worker-addr", run_cfg.worker_addrs,
                  "host:port of one worker (repeat per worker, tcp only)");
  run->add_option("--solver-iters", run_cfg.solver_iters,
                  "max Gauss-Seidel sweeps");
  run->add_option("--solver-tol", run_cfg.solver_tol,
                  "solver residual tolerance");
  run->add_option("--seed", run_cfg.seed, "recorded in the report");
  run->add_option("--out-dir", run_cfg.out_dir, "output directory");
  run->add_option("--balance-metric", run_cfg.balance_metric,
                  "load metric: bodies or contacts");
  run->add_flag("--no-overlap", run_cfg.no_overlap,
                "ablation: disjoint partitions, no blending");
  run->add_flag("--full-weight-recompute", run_cfg.full_weight_recompute,
                "recompute every overlap weight each step");
  run->add_option("--barrier-timeout-ms", run_cfg.barrier_timeout_ms,
                  "per-step worker reply deadline");

  ovsim::cli::GenConfig gen_cfg;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "write a generated scene file");
  gen->add_option("--kind", gen_cfg.kind, "chain, bridge, bowl or building")
      ->required();
  gen->add_option("--out", gen_out, "output scene path")->required();
  gen->add_option("--workers", gen_cfg.workers, "partition count");
  gen->add_option("--bodies,--links,--count", gen_cfg.count,
                  "body count (0 = kind default)");
  gen->add_option("--seed", gen_cfg.seed, "placement jitter seed");
  gen->add_option("--dt", gen_cfg.dt, "scene timestep in seconds");

  std::string listen_addr = "127.0.0.1:7401";
  int step_delay_ms = 0;
  CLI::App* worker = app.add_subcommand("worker", "serve one coordinator");
  worker->add_option("--listen", listen_addr, "host:port (port 0 = ephemeral)");
  worker->add_option("--step-delay-ms", step_delay_ms,
                     "artificial pause before each step");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return ovsim::cli::run_simulation(run_cfg);

  if (gen->parsed()) {
    try {
      ovsim::save_scene(ovsim::cli::generate_scene(gen_cfg), gen_out);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "gen failed: %s\n", e.what());
      return 1;
    }
    std::printf("wrote %s\n", gen_out.c_str());
    return 0;
  }

  return ovsim::cli::worker_serve(listen_addr, step_delay_ms);
}
