#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ovsim/transport/connection.hpp"

namespace ovsim::transport {
namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

class TcpConnection final : public Connection {
 public:
  explicit TcpConnection(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpConnection() override { close(); }

  void send(const Message& m) override {
    const std::vector<std::uint8_t> frame = encode_frame(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off,
                               MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("send");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  Message receive() override {
    auto m = wait_message(std::nullopt);
    return *m;
  }

  std::optional<Message> receive_for(
      std::chrono::milliseconds timeout) override {
    return wait_message(timeout);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  std::optional<Message> wait_message(
      std::optional<std::chrono::milliseconds> timeout) {
    Message m;
    if (decoder_.next(m)) return m;
    const auto deadline = timeout
        ? std::optional(std::chrono::steady_clock::now() + *timeout)
        : std::nullopt;
    while (true) {
      int wait_ms = -1;
      if (deadline) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            *deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        wait_ms = static_cast<int>(left.count());
      }
      if (fd_ < 0) throw TransportError("connection closed");
      pollfd pfd{fd_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, wait_ms);
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw_errno("poll");
      }
      if (pr == 0) return std::nullopt;
      std::uint8_t chunk[65536];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("recv");
      }
      if (n == 0) throw TransportError("connection closed");
      decoder_.feed(chunk, static_cast<std::size_t>(n));
      if (decoder_.next(m)) return m;
    }
  }

  int fd_ = -1;
  FrameDecoder decoder_;
};

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = passive ? AI_PASSIVE : 0;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                               service.c_str(), &hints, &res);
  if (rc != 0) {
    throw TransportError("resolve " + host + ": " + gai_strerror(rc));
  }
  return res;
}

}  // namespace

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  addrinfo* res = resolve(host, port, true);
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(fd, 4) != 0) {
      last_error = std::strerror(errno);
      ::close(fd);
      continue;
    }
    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
      last_error = std::strerror(errno);
      ::close(fd);
      continue;
    }
    fd_ = fd;
    if (bound.ss_family == AF_INET) {
      port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else {
      port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
    break;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) {
    throw TransportError("listen on " + host + ":" + std::to_string(port) +
                         ": " + last_error);
  }
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

ConnectionPtr TcpListener::accept_one() {
  while (true) {
    const int peer = ::accept(fd_, nullptr, nullptr);
    if (peer < 0) {
      if (errno == EINTR) continue;
      throw_errno("accept");
    }
    // Single-owner policy: no further peers, refuse later connects.
    ::close(fd_);
    fd_ = -1;
    return std::make_unique<TcpConnection>(peer);
  }
}

ConnectionPtr connect_tcp(const std::string& host, std::uint16_t port,
                          std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error = "no addresses";
  while (true) {
    addrinfo* res = resolve(host, port, false);
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) {
        last_error = std::strerror(errno);
        continue;
      }
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        ::freeaddrinfo(res);
        return std::make_unique<TcpConnection>(fd);
      }
      last_error = std::strerror(errno);
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TransportError("connect " + host + ":" + std::to_string(port) +
                           ": " + last_error);
    }
    // Worker may still be starting up; retry shortly.
    ::usleep(20000);
  }
}

}  // namespace ovsim::transport
