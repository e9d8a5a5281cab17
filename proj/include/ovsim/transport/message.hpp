#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ovsim/core/types.hpp"

namespace ovsim::transport {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MsgType : std::uint16_t {
  Hello = 1,       // worker handshake: id, solver params, scene JSON
  HelloAck = 2,
  Activate = 3,    // body id
  Deactivate = 4,  // body id
  ResetState = 5,  // body id + 13 scalars
  ResetBatch = 6,  // count + entries
  Step = 7,        // empty payload
  StepAck = 8,     // residual + active body states
  GetState = 9,    // body id
  StateReply = 10,
  Error = 11,
};

enum class ErrorCode : std::uint32_t {
  UnknownBody = 1,
  Protocol = 2,
  Internal = 3,
};

struct Message {
  MsgType type = MsgType::Error;
  std::vector<std::uint8_t> payload;
};

constexpr std::uint16_t kProtocolVersion = 1;
constexpr std::size_t kFrameHeaderSize = 12;  // magic + version + type + len
constexpr std::uint32_t kMaxPayload = 64u << 20;

/// Serializes one message into a self-delimiting frame:
/// "OVSM" magic, u16 version, u16 type, u32 payload length, payload.
/// All integers and doubles little-endian.
std::vector<std::uint8_t> encode_frame(const Message& m);

/// Incremental frame decoder: feed bytes, take complete messages out.
/// Throws TransportError on bad magic, version mismatch or oversized
/// payloads.
class FrameDecoder {
 public:
  void feed(const std::uint8_t* data, std::size_t len);
  /// Extracts the next complete message, if any.
  bool next(Message& out);
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Typed payloads ------------------------------------------------------

struct HelloMsg {
  WorkerId worker_id = 0;
  std::uint32_t max_iterations = 0;
  double tolerance = 0.0;
  std::string scene_json;
};

struct ResetEntry {
  BodyId body = kInvalidBody;
  BodyState state;
};

struct StepAckMsg {
  double residual = 0.0;
  std::vector<ResetEntry> states;  // every active body, ascending id
};

struct ErrorMsg {
  ErrorCode code = ErrorCode::Internal;
  std::string text;
};

Message make_hello(const HelloMsg& h);
Message make_hello_ack();
Message make_activate(BodyId b);
Message make_deactivate(BodyId b);
Message make_reset_state(BodyId b, const BodyState& s);
Message make_reset_batch(const std::vector<ResetEntry>& entries);
Message make_step();
Message make_step_ack(const StepAckMsg& ack);
Message make_get_state(BodyId b);
Message make_state_reply(BodyId b, const BodyState& s);
Message make_error(ErrorCode code, const std::string& text);

// Decoders throw TransportError on malformed payloads.
HelloMsg parse_hello(const Message& m);
BodyId parse_body_ref(const Message& m);  // Activate/Deactivate/GetState
ResetEntry parse_reset_state(const Message& m);  // ResetState/StateReply
std::vector<ResetEntry> parse_reset_batch(const Message& m);
StepAckMsg parse_step_ack(const Message& m);
ErrorMsg parse_error(const Message& m);

}  // namespace ovsim::transport
