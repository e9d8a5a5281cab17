#include <condition_variable>
#include <deque>
#include <mutex>

#include "ovsim/transport/connection.hpp"

namespace ovsim::transport {
namespace {

/// One direction of an in-process channel: a FIFO of encoded frames.
class ByteQueue {
 public:
  void push(std::vector<std::uint8_t> frame) {
    {
      std::lock_guard lock(m_);
      if (closed_) throw TransportError("connection closed");
      q_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  std::optional<std::vector<std::uint8_t>> pop(
      std::optional<std::chrono::milliseconds> timeout) {
    std::unique_lock lock(m_);
    auto ready = [&] { return !q_.empty() || closed_; };
    if (timeout) {
      if (!cv_.wait_for(lock, *timeout, ready)) return std::nullopt;
    } else {
      cv_.wait(lock, ready);
    }
    if (q_.empty()) throw TransportError("connection closed");
    auto frame = std::move(q_.front());
    q_.pop_front();
    return frame;
  }

  void close() {
    {
      std::lock_guard lock(m_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<std::vector<std::uint8_t>> q_;
  bool closed_ = false;
};

class InprocConnection final : public Connection {
 public:
  InprocConnection(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~InprocConnection() override { close(); }

  void send(const Message& m) override { out_->push(encode_frame(m)); }

  Message receive() override {
    auto msg = take(std::nullopt);
    return *msg;
  }

  std::optional<Message> receive_for(
      std::chrono::milliseconds timeout) override {
    return take(timeout);
  }

  void close() override {
    in_->close();
    out_->close();
  }

 private:
  std::optional<Message> take(
      std::optional<std::chrono::milliseconds> timeout) {
    // Frames arrive whole, but run them through the decoder anyway so
    // both transports share the parsing path.
    Message m;
    while (!decoder_.next(m)) {
      auto frame = in_->pop(timeout);
      if (!frame) return std::nullopt;
      decoder_.feed(frame->data(), frame->size());
    }
    return m;
  }

  std::shared_ptr<ByteQueue> in_;
  std::shared_ptr<ByteQueue> out_;
  FrameDecoder decoder_;
};

}  // namespace

std::pair<ConnectionPtr, ConnectionPtr> make_inproc_pair() {
  auto a_to_b = std::make_shared<ByteQueue>();
  auto b_to_a = std::make_shared<ByteQueue>();
  return {std::make_unique<InprocConnection>(b_to_a, a_to_b),
          std::make_unique<InprocConnection>(a_to_b, b_to_a)};
}

}  // namespace ovsim::transport
