#pragma once

#include <optional>
#include <string>

#include "qoelab/common/bytes.hpp"
#include "qoelab/common/types.hpp"

namespace qoelab::net {

// Outbound side of a substrate, as seen by one actor. A (session, plane)
// pair names a port of the session topology.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws TransportError on socket failure.
  virtual void send(MediaKind session, Plane plane, ByteView datagram) = 0;
};

// Sans-IO protocol endpoint. Substrates (virtual clock or UDP sockets) feed
// it datagrams and timer ticks; the actor never reads a clock itself.
class Actor {
 public:
  virtual ~Actor() = default;

  virtual void start(Seconds now, Transport& transport) = 0;
  virtual void on_datagram(MediaKind session, Plane plane, ByteView datagram,
                           Seconds now) = 0;
  virtual void on_timer(Seconds now) = 0;
  virtual std::optional<Seconds> next_timer() const = 0;
  virtual bool finished() const = 0;
  // One-line state description for diagnostics.
  virtual std::string status() const = 0;
};

}  // namespace qoelab::net
