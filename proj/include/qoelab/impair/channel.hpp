#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qoelab/common/random.hpp"
#include "qoelab/common/types.hpp"
#include "qoelab/impair/config.hpp"
#include "qoelab/impair/stages.hpp"

namespace qoelab::impair {

// Identification attached to trace records; the channel itself never looks
// inside packets.
struct PacketLabel {
  std::string flow;
  std::optional<std::uint16_t> seq;
  std::optional<std::uint32_t> timestamp;
};

struct TraceRecord {
  std::size_t id = 0;
  PacketLabel label;
  std::size_t size = 0;
  Seconds inject_time = 0;
  DropReason drop = DropReason::None;
  std::optional<Seconds> shaper_arrival;
  std::optional<Seconds> deliver_time;
  bool finished = false;
};

struct FlowCounters {
  std::size_t injected = 0;
  std::size_t delivered = 0;
  std::size_t lost = 0;
  std::size_t tail_dropped = 0;

  std::size_t dropped() const { return lost + tail_dropped; }
};

// First-phase result: the packet either ended in the delay/loss stages or
// needs the shaper at `hop.time`.
struct Ticket {
  std::size_t id = 0;
  Hop hop;
  bool needs_shaping = false;
};

// Ordered stage chain: delay/jitter -> loss -> bandwidth (pipe or token
// bucket). Single owner; not thread-safe.
class Channel {
 public:
  // Identity channel.
  Channel();

  bool has_shaper() const { return !std::holds_alternative<std::monostate>(shaper_); }

  // Runs the delay and loss stages at injection time.
  Ticket enter(std::size_t size_bytes, Seconds now, PacketLabel label = {});

  // Runs the bandwidth stage for a packet that left `enter` with
  // needs_shaping. Calls must come in non-decreasing `arrival` order.
  Hop shape(const Ticket& ticket, std::size_t size_bytes);

  // Both phases back to back. Exact whenever shaper arrivals are already
  // time-ordered (no jitter, or no shaper).
  Hop transmit(std::size_t size_bytes, Seconds now, PacketLabel label = {});

  void enable_trace(bool on) { tracing_ = on; }
  bool tracing() const { return tracing_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }

  const FlowCounters& totals() const { return totals_; }
  FlowCounters flow(std::string_view name) const;
  const std::map<std::string, FlowCounters, std::less<>>& flows() const { return flows_; }

  // JSON Lines, one record per packet in injection order:
  //   {"channel","id","flow","seq","ts","size","inject","stage","deliver"}
  // where "stage" is "delivered", "loss" or "tail_drop" and "deliver" is
  // present only for delivered packets.
  void write_trace(std::ostream& out, std::string_view channel_name) const;

 private:
  friend Channel compose_channel(std::span<const StageConfig>, std::uint64_t);

  void finish(std::size_t id, const Hop& hop);
  FlowCounters& counters_for(const std::string& flow);

  std::optional<NetemParams> netem_;
  std::variant<std::monostate, PipeState, TokenBucket> shaper_;
  Rng rng_;
  bool tracing_ = false;
  std::size_t next_id_ = 0;
  std::vector<TraceRecord> trace_;
  std::vector<std::string> pending_flow_;  // flow per id, only while untraced
  FlowCounters totals_;
  std::map<std::string, FlowCounters, std::less<>> flows_;
};

// Throws ConfigError on a second bandwidth stage (pipe or token bucket) or a
// repeated delay or loss stage. Stage order in the list does not matter; the
// chain order is fixed.
Channel compose_channel(std::span<const StageConfig> stages, std::uint64_t seed);

Channel make_channel(const ImpairmentConfig& config);

}  // namespace qoelab::impair
