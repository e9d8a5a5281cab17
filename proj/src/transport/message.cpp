#include "ovsim/transport/message.hpp"

#include <bit>
#include <cstring>

namespace ovsim::transport {
namespace {

constexpr std::uint8_t kMagic[4] = {'O', 'V', 'S', 'M'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void state(const BodyState& s) {
    for (double v : s.to_scalars()) f64(v);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& buf, const char* what)
      : buf_(buf), what_(what) {}
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_]) |
                      static_cast<std::uint16_t>(buf_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  BodyState state() {
    std::array<double, 13> s;
    for (double& v : s) v = f64();
    return BodyState::from_scalars(s);
  }
  void done() const {
    if (pos_ != buf_.size()) {
      throw TransportError(std::string(what_) + ": trailing payload bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) {
      throw TransportError(std::string(what_) + ": truncated payload");
    }
  }
  const std::vector<std::uint8_t>& buf_;
  const char* what_;
  std::size_t pos_ = 0;
};

void expect_type(const Message& m, MsgType t, const char* what) {
  if (m.type != t) {
    throw TransportError(std::string(what) + ": unexpected message type " +
                         std::to_string(static_cast<int>(m.type)));
  }
}

Message body_ref_message(MsgType t, BodyId b) {
  Message m;
  m.type = t;
  Writer w(m.payload);
  w.u32(b);
  return m;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Message& m) {
  if (m.payload.size() > kMaxPayload) {
    throw TransportError("payload exceeds frame limit");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + m.payload.size());
  Writer w(out);
  w.bytes(kMagic, 4);
  w.u16(kProtocolVersion);
  w.u16(static_cast<std::uint16_t>(m.type));
  w.u32(static_cast<std::uint32_t>(m.payload.size()));
  w.bytes(m.payload.data(), m.payload.size());
  return out;
}

void FrameDecoder::feed(const std::uint8_t* data, std::size_t len) {
  buf_.insert(buf_.end(), data, data + len);
}

bool FrameDecoder::next(Message& out) {
  if (buf_.size() < kFrameHeaderSize) return false;
  if (std::memcmp(buf_.data(), kMagic, 4) != 0) {
    throw TransportError("bad frame magic");
  }
  const std::uint16_t version =
      static_cast<std::uint16_t>(buf_[4]) |
      static_cast<std::uint16_t>(buf_[5]) << 8;
  if (version != kProtocolVersion) {
    throw TransportError("unsupported protocol version " +
                         std::to_string(version));
  }
  const std::uint16_t type = static_cast<std::uint16_t>(buf_[6]) |
                             static_cast<std::uint16_t>(buf_[7]) << 8;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= static_cast<std::uint32_t>(buf_[8 + i]) << (8 * i);
  }
  if (len > kMaxPayload) throw TransportError("oversized frame payload");
  if (buf_.size() < kFrameHeaderSize + len) return false;
  out.type = static_cast<MsgType>(type);
  out.payload.assign(buf_.begin() + kFrameHeaderSize,
                     buf_.begin() + static_cast<long>(kFrameHeaderSize + len));
  buf_.erase(buf_.begin(),
             buf_.begin() + static_cast<long>(kFrameHeaderSize + len));
  return true;
}

Message make_hello(const HelloMsg& h) {
  Message m;
  m.type = MsgType::Hello;
  Writer w(m.payload);
  w.u32(h.worker_id);
  w.u32(h.max_iterations);
  w.f64(h.tolerance);
  w.u32(static_cast<std::uint32_t>(h.scene_json.size()));
  w.bytes(h.scene_json.data(), h.scene_json.size());
  return m;
}

Message make_hello_ack() { return Message{MsgType::HelloAck, {}}; }

Message make_activate(BodyId b) {
  return body_ref_message(MsgType::Activate, b);
}

Message make_deactivate(BodyId b) {
  return body_ref_message(MsgType::Deactivate, b);
}

Message make_reset_state(BodyId b, const BodyState& s) {
  Message m;
  m.type = MsgType::ResetState;
  Writer w(m.payload);
  w.u32(b);
  w.state(s);
  return m;
}

Message make_reset_batch(const std::vector<ResetEntry>& entries) {
  Message m;
  m.type = MsgType::ResetBatch;
  Writer w(m.payload);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const ResetEntry& e : entries) {
    w.u32(e.body);
    w.state(e.state);
  }
  return m;
}

Message make_step() { return Message{MsgType::Step, {}}; }

Message make_step_ack(const StepAckMsg& ack) {
  Message m;
  m.type = MsgType::StepAck;
  Writer w(m.payload);
  w.f64(ack.residual);
  w.u32(static_cast<std::uint32_t>(ack.states.size()));
  for (const ResetEntry& e : ack.states) {
    w.u32(e.body);
    w.state(e.state);
  }
  return m;
}

Message make_get_state(BodyId b) {
  return body_ref_message(MsgType::GetState, b);
}

Message make_state_reply(BodyId b, const BodyState& s) {
  Message m = make_reset_state(b, s);
  m.type = MsgType::StateReply;
  return m;
}

Message make_error(ErrorCode code, const std::string& text) {
  Message m;
  m.type = MsgType::Error;
  Writer w(m.payload);
  w.u32(static_cast<std::uint32_t>(code));
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  return m;
}

HelloMsg parse_hello(const Message& m) {
  expect_type(m, MsgType::Hello, "hello");
  Reader r(m.payload, "hello");
  HelloMsg h;
  h.worker_id = r.u32();
  h.max_iterations = r.u32();
  h.tolerance = r.f64();
  const std::uint32_t len = r.u32();
  h.scene_json = r.str(len);
  r.done();
  return h;
}

BodyId parse_body_ref(const Message& m) {
  if (m.type != MsgType::Activate && m.type != MsgType::Deactivate &&
      m.type != MsgType::GetState) {
    throw TransportError("body ref: unexpected message type");
  }
  Reader r(m.payload, "body ref");
  const BodyId b = r.u32();
  r.done();
  return b;
}

ResetEntry parse_reset_state(const Message& m) {
  if (m.type != MsgType::ResetState && m.type != MsgType::StateReply) {
    throw TransportError("reset state: unexpected message type");
  }
  Reader r(m.payload, "reset state");
  ResetEntry e;
  e.body = r.u32();
  e.state = r.state();
  r.done();
  return e;
}

std::vector<ResetEntry> parse_reset_batch(const Message& m) {
  expect_type(m, MsgType::ResetBatch, "reset batch");
  Reader r(m.payload, "reset batch");
  const std::uint32_t count = r.u32();
  std::vector<ResetEntry> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ResetEntry e;
    e.body = r.u32();
    e.state = r.state();
    entries.push_back(e);
  }
  r.done();
  return entries;
}

StepAckMsg parse_step_ack(const Message& m) {
  expect_type(m, MsgType::StepAck, "step ack");
  Reader r(m.payload, "step ack");
  StepAckMsg ack;
  ack.residual = r.f64();
  const std::uint32_t count = r.u32();
  ack.states.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ResetEntry e;
    e.body = r.u32();
    e.state = r.state();
    ack.states.push_back(e);
  }
  r.done();
  return ack;
}

ErrorMsg parse_error(const Message& m) {
  expect_type(m, MsgType::Error, "error");
  Reader r(m.payload, "error");
  ErrorMsg e;
  e.code = static_cast<ErrorCode>(r.u32());
  const std::uint32_t len = r.u32();
  e.text = r.str(len);
  r.done();
  return e;
}

}  // namespace ovsim::transport
