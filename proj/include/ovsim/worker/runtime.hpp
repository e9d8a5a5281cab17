#pragma once

#include <chrono>
#include <optional>

#include "ovsim/dynamics/engine.hpp"
#include "ovsim/transport/connection.hpp"

namespace ovsim::worker {

struct WorkerOptions {
  /// Artificial delay before each step, for barrier fault-injection tests.
  std::chrono::milliseconds step_delay{0};
};

/// Serves one coordinator over one connection: handshake, activation
/// bookkeeping, state resets, stepping. Commands are processed strictly
/// in arrival order; malformed or illegal commands get an Error reply and
/// the loop keeps serving.
class WorkerRuntime {
 public:
  explicit WorkerRuntime(transport::ConnectionPtr conn,
                         WorkerOptions opts = {});

  /// Runs until the peer disconnects. Returns normally on orderly close.
  void run();

  WorkerId id() const { return id_; }

 private:
  void dispatch(const transport::Message& m);
  void handle_activate(BodyId b, bool active);
  void handle_reset(const transport::ResetEntry& e);
  void handle_step();
  bool check_reset(const transport::ResetEntry& e);

  transport::ConnectionPtr conn_;
  WorkerOptions opts_;
  std::optional<dynamics::Engine> engine_;
  WorkerId id_ = 0;
  std::uint64_t step_count_ = 0;
};

}  // namespace ovsim::worker
