#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "ovsim/transport/message.hpp"

namespace ovsim::transport {

/// Bidirectional, ordered, reliable message channel. All implementations
/// move fully encoded frames, so in-process and TCP runs exercise the
/// identical serialization path.
class Connection {
 public:
  virtual ~Connection() = default;

  virtual void send(const Message& m) = 0;

  /// Blocks until a message arrives. Throws TransportError when the peer
  /// closed or the stream is corrupt.
  virtual Message receive() = 0;

  /// Like receive(), but returns nullopt after `timeout`.
  virtual std::optional<Message> receive_for(
      std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
};

using ConnectionPtr = std::unique_ptr<Connection>;

/// In-process channel backed by two byte queues.
std::pair<ConnectionPtr, ConnectionPtr> make_inproc_pair();

/// TCP listener bound to host:port (port 0 picks an ephemeral port).
class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts exactly one peer and closes the listening socket, so any
  /// later connection attempt is refused.
  ConnectionPtr accept_one();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

ConnectionPtr connect_tcp(const std::string& host, std::uint16_t port,
                          std::chrono::milliseconds timeout =
                              std::chrono::milliseconds(10000));

}  // namespace ovsim::transport
