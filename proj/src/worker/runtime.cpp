#include "ovsim/worker/runtime.hpp"

#include <cmath>
#include <thread>

#include "ovsim/core/log.hpp"

namespace ovsim::worker {

using transport::ErrorCode;
using transport::Message;
using transport::MsgType;

WorkerRuntime::WorkerRuntime(transport::ConnectionPtr conn, WorkerOptions opts)
    : conn_(std::move(conn)), opts_(opts) {}

void WorkerRuntime::run() {
  try {
    while (true) {
      const Message m = conn_->receive();
      dispatch(m);
    }
  } catch (const transport::TransportError& e) {
    OVSIM_INFO("worker %u: connection ended (%s)", id_, e.what());
  }
}

void WorkerRuntime::dispatch(const Message& m) {
  if (!engine_) {
    if (m.type != MsgType::Hello) {
      conn_->send(transport::make_error(ErrorCode::Protocol,
                                        "expected hello first"));
      return;
    }
    const transport::HelloMsg hello = transport::parse_hello(m);
    Scene scene;
    try {
      scene = parse_scene(hello.scene_json);
    } catch (const std::exception& e) {
      conn_->send(transport::make_error(
          ErrorCode::Protocol, std::string("bad scene: ") + e.what()));
      return;
    }
    id_ = hello.worker_id;
    dynamics::SolverConfig cfg;
    cfg.max_iterations = static_cast<int>(hello.max_iterations);
    cfg.tolerance = hello.tolerance;
    engine_.emplace(std::move(scene), cfg);
    conn_->send(transport::make_hello_ack());
    OVSIM_INFO("worker %u: ready, %zu bodies", id_,
               engine_->scene().bodies.size());
    return;
  }

  switch (m.type) {
    case MsgType::Hello:
      conn_->send(transport::make_error(ErrorCode::Protocol,
                                        "duplicate hello"));
      break;
    case MsgType::Activate:
      handle_activate(transport::parse_body_ref(m), true);
      break;
    case MsgType::Deactivate:
      handle_activate(transport::parse_body_ref(m), false);
      break;
    case MsgType::ResetState:
      handle_reset(transport::parse_reset_state(m));
      break;
    case MsgType::ResetBatch: {
      const auto entries = transport::parse_reset_batch(m);
      for (const auto& e : entries) {
        if (!check_reset(e)) return;
      }
      for (const auto& e : entries) engine_->set_state(e.body, e.state);
      break;
    }
    case MsgType::Step:
      handle_step();
      break;
    case MsgType::GetState: {
      const BodyId b = transport::parse_body_ref(m);
      if (b >= engine_->scene().bodies.size()) {
        conn_->send(transport::make_error(
            ErrorCode::UnknownBody, "get_state: unknown body " +
                                        std::to_string(b)));
      } else {
        conn_->send(transport::make_state_reply(b, engine_->state(b)));
      }
      break;
    }
    case MsgType::Error: {
      const auto err = transport::parse_error(m);
      OVSIM_WARN("worker %u: peer error %u: %s", id_,
                 static_cast<unsigned>(err.code), err.text.c_str());
      break;
    }
    default:
      conn_->send(transport::make_error(ErrorCode::Protocol,
                                        "unexpected message type"));
      break;
  }
}

void WorkerRuntime::handle_activate(BodyId b, bool active) {
  if (b >= engine_->scene().bodies.size()) {
    conn_->send(transport::make_error(
        ErrorCode::UnknownBody,
        (active ? "activate" : "deactivate") +
            std::string(": unknown body ") + std::to_string(b)));
    return;
  }
  if (engine_->scene().bodies[b].is_static()) {
    conn_->send(transport::make_error(
        ErrorCode::Protocol,
        "body " + std::to_string(b) + " is static"));
    return;
  }
  if (!active && !engine_->is_active(b)) {
    conn_->send(transport::make_error(
        ErrorCode::Protocol,
        "deactivate: body " + std::to_string(b) + " is not active"));
    return;
  }
  engine_->set_active(b, active);
}

bool WorkerRuntime::check_reset(const transport::ResetEntry& e) {
  if (e.body >= engine_->scene().bodies.size()) {
    conn_->send(transport::make_error(
        ErrorCode::UnknownBody,
        "reset: unknown body " + std::to_string(e.body)));
    return false;
  }
  if (engine_->scene().bodies[e.body].is_static() ||
      !engine_->is_active(e.body)) {
    conn_->send(transport::make_error(
        ErrorCode::Protocol,
        "reset: body " + std::to_string(e.body) + " is not active"));
    return false;
  }
  if (!e.state.all_finite() ||
      std::abs(e.state.orientation.norm() - 1.0) > 1e-6) {
    conn_->send(transport::make_error(
        ErrorCode::Protocol,
        "reset: invalid state for body " + std::to_string(e.body)));
    return false;
  }
  return true;
}

void WorkerRuntime::handle_reset(const transport::ResetEntry& e) {
  if (!check_reset(e)) return;
  engine_->set_state(e.body, e.state);
}

void WorkerRuntime::handle_step() {
  if (opts_.step_delay.count() > 0) {
    std::this_thread::sleep_for(opts_.step_delay);
  }
  dynamics::StepOutput out;
  try {
    out = engine_->step();
  } catch (const std::exception& e) {
    conn_->send(transport::make_error(
        ErrorCode::Internal,
        "step " + std::to_string(step_count_) + " failed: " + e.what()));
    return;
  }
  ++step_count_;
  transport::StepAckMsg ack;
  ack.residual = out.solve.residual;
  for (BodyId b : engine_->active_ids()) {
    ack.states.push_back({b, engine_->state(b)});
  }
  conn_->send(transport::make_step_ack(ack));
}

}  // namespace ovsim::worker
