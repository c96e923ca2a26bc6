#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "qoelab/impair/channel.hpp"
#include "qoelab/impair/config.hpp"
#include "qoelab/net/actor.hpp"
#include "qoelab/net/virtual_clock.hpp"

namespace qoelab::net {

// One channel per direction and session. RTP and RTCP of a session share
// the session's channel.
struct ChannelSet {
  std::array<impair::Channel, 2> forward;  // sender -> receiver
  std::array<impair::Channel, 2> reverse;  // receiver -> sender

  impair::Channel& forward_for(MediaKind k) { return forward[index_of(k)]; }
  impair::Channel& reverse_for(MediaKind k) { return reverse[index_of(k)]; }
  const impair::Channel& forward_for(MediaKind k) const { return forward[index_of(k)]; }

  void enable_trace(bool on);

  // All four channels, forward video/audio then reverse video/audio.
  void write_trace(std::ostream& out) const;
};

// Forward channels follow `forward`; reverse channels are identity unless
// `reverse` is given. Each channel draws from its own seed derived from the
// config seed.
ChannelSet make_channel_set(const impair::ImpairmentConfig& forward,
                            const std::optional<impair::ImpairmentConfig>& reverse = std::nullopt);

class SimulationDeadlock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimOptions {
  // One line per fired event when set.
  std::ostream* event_log = nullptr;
};

struct SimResult {
  Seconds end_time = 0;
  std::uint64_t events = 0;
};

// Runs both actors over the virtual clock until both report finished.
// Single-threaded; identical inputs give identical event sequences. Throws
// SimulationDeadlock if the event queue drains first.
SimResult sim_run(Actor& sender, Actor& receiver, ChannelSet& channels, VirtualClock& clock,
                  const SimOptions& options = {});

}  // namespace qoelab::net
