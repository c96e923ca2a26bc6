#include "qoelab/net/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <optional>
#include <vector>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::net {

namespace {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const { return fd_; }

 private:
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int fd_ = -1;
};

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError(fmt::format("not an IPv4 address: '{}'", host));
  }
  return addr;
}

Socket bind_udp(const std::string& host, std::uint16_t port, int rcvbuf) {
  Socket s(::socket(AF_INET, SOCK_DGRAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0));
  if (s.fd() < 0) {
    throw TransportError(fmt::format("socket() for port {}: {}", port, std::strerror(errno)));
  }
  // Best effort; the kernel caps it at rmem_max.
  ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
  const sockaddr_in addr = make_address(host, port);
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError(
        fmt::format("cannot bind UDP port {} on {}: {}", port, host, std::strerror(errno)));
  }
  return s;
}

struct Binding {
  Socket socket;
  MediaKind session;
  Plane plane;
  std::uint16_t port;
};

class UdpTransport final : public Transport {
 public:
  UdpTransport(UdpRole role, const UdpOptions& options, const std::vector<Binding>& bindings)
      : role_(role), options_(options), bindings_(bindings) {}

  void send(MediaKind session, Plane plane, ByteView datagram) override {
    const rtp::SessionTopology& t = options_.topology;
    std::uint16_t port = 0;
    if (role_ == UdpRole::Sender) {
      port = plane == Plane::Rtp ? t.rtp_port(session) : t.rtcp_send_port(session);
    } else {
      if (plane != Plane::Rtcp) throw TransportError("receiver cannot send RTP");
      port = t.rtcp_return_port(session);
    }
    const sockaddr_in to = make_address(options_.peer, port);
    const int fd = outbound_fd(session);
    const ssize_t n = ::sendto(fd, datagram.data(), datagram.size(), 0,
                               reinterpret_cast<const sockaddr*>(&to), sizeof(to));
    if (n < 0) {
      // A refused earlier datagram can surface on a later send; nobody
      // listening is not an error for a datagram sender.
      if (errno == ECONNREFUSED) return;
      throw TransportError(fmt::format("sendto {}:{} failed: {}", options_.peer, port,
                                       std::strerror(errno)));
    }
    ++sent_;
  }

  std::uint64_t sent() const { return sent_; }

 private:
  // The sender writes from its return-port socket, the receiver from its RTCP
  // socket; either way one per session.
  int outbound_fd(MediaKind session) const {
    for (const Binding& b : bindings_) {
      if (b.session == session && b.plane == Plane::Rtcp) return b.socket.fd();
    }
    throw TransportError("no socket bound for session");
  }

  UdpRole role_;
  const UdpOptions& options_;
  const std::vector<Binding>& bindings_;
  std::uint64_t sent_ = 0;
};

}  // namespace

UdpResult udp_run(Actor& actor, UdpRole role, const UdpOptions& options,
                  const std::atomic<bool>* stop) {
  rtp::validate(options.topology);
  make_address(options.peer, 1);
  const rtp::SessionTopology& t = options.topology;

  std::vector<Binding> bindings;
  for (MediaKind k : kAllMedia) {
    if (role == UdpRole::Sender) {
      const std::uint16_t port = t.rtcp_return_port(k);
      bindings.push_back({bind_udp(options.bind_address, port, options.receive_buffer_bytes), k,
                          Plane::Rtcp, port});
    } else {
      for (Plane p : {Plane::Rtp, Plane::Rtcp}) {
        const std::uint16_t port = p == Plane::Rtp ? t.rtp_port(k) : t.rtcp_send_port(k);
        bindings.push_back(
            {bind_udp(options.bind_address, port, options.receive_buffer_bytes), k, p, port});
      }
    }
  }

  if (options.on_ready) options.on_ready();
  UdpTransport transport(role, options, bindings);
  std::vector<pollfd> fds;
  for (const Binding& b : bindings) fds.push_back(pollfd{b.socket.fd(), POLLIN, 0});

  const auto origin = std::chrono::steady_clock::now();
  const auto now = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count();
  };

  UdpResult result;
  std::vector<std::uint8_t> buffer(65536);
  actor.start(now(), transport);
  while (!actor.finished()) {
    if (stop && stop->load()) {
      result.stopped = true;
      break;
    }
    // Wake at least every 50 ms so the stop flag is noticed.
    double wait = 0.050;
    if (const auto due = actor.next_timer()) wait = std::min(wait, std::max(0.0, *due - now()));
    timespec ts{};
    ts.tv_sec = static_cast<time_t>(wait);
    ts.tv_nsec = static_cast<long>((wait - std::floor(wait)) * 1e9);
    const int ready = ::ppoll(fds.data(), fds.size(), &ts, nullptr);
    if (ready < 0 && errno != EINTR) {
      throw TransportError(fmt::format("ppoll failed: {}", std::strerror(errno)));
    }
    if (ready > 0) {
      for (std::size_t i = 0; i < fds.size() && !actor.finished(); ++i) {
        if (!(fds[i].revents & POLLIN)) continue;
        for (;;) {
          const ssize_t n = ::recv(fds[i].fd, buffer.data(), buffer.size(), 0);
          if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ECONNREFUSED) break;
            throw TransportError(fmt::format("recv on port {} failed: {}", bindings[i].port,
                                             std::strerror(errno)));
          }
          ++result.datagrams_in;
          actor.on_datagram(bindings[i].session, bindings[i].plane,
                            ByteView(buffer.data(), static_cast<std::size_t>(n)), now());
          if (actor.finished()) break;
        }
      }
    }
    if (actor.finished()) break;
    if (const auto due = actor.next_timer(); due && *due <= now()) actor.on_timer(now());
  }
  result.end_time = now();
  result.datagrams_out = transport.sent();
  return result;
}

}  // namespace qoelab::net
