#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "qoelab/net/actor.hpp"
#include "qoelab/rtp/topology.hpp"

namespace qoelab::net {

enum class UdpRole { Sender, Receiver };

struct UdpOptions {
  // IPv4 address of the other side.
  std::string peer = "127.0.0.1";
  std::string bind_address = "0.0.0.0";
  rtp::SessionTopology topology;
  int receive_buffer_bytes = 4 << 20;
  // Called once all ports are bound, before the actor starts.
  std::function<void()> on_ready;
};

struct UdpResult {
  Seconds end_time = 0;
  std::uint64_t datagrams_in = 0;
  std::uint64_t datagrams_out = 0;
  bool stopped = false;
};

// Drives one actor over real sockets and the wall clock. The sender binds the
// RTCP return ports; the receiver binds the RTP and RTCP send ports. Traffic is
// not impaired here. Throws TransportError naming the port on bind failure;
// send failures reach the actor as TransportError. A set `stop` flag ends
// the loop early.
UdpResult udp_run(Actor& actor, UdpRole role, const UdpOptions& options,
                  const std::atomic<bool>* stop = nullptr);

}  // namespace qoelab::net
