#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "qoelab/common/types.hpp"
#include "qoelab/rtp/packet.hpp"

namespace qoelab::rtp {

// Time-based reorder buffer. A packet leaves as soon as it continues the
// released sequence, and at the latest when first_arrival(timestamp) +
// latency passes; anything older than what has been released is discarded.
class JitterBuffer {
 public:
  explicit JitterBuffer(Seconds latency);

  // Returns false when the packet was late-discarded or duplicated.
  bool push(RtpPacket packet, Seconds arrival);

  // Releases in sequence order everything that is due at `now`.
  std::vector<RtpPacket> drain(Seconds now);

  // Releases everything still held, in sequence order.
  std::vector<RtpPacket> flush();

  std::optional<Seconds> next_deadline() const;
  std::size_t size() const { return held_.size(); }
  std::size_t late_discards() const { return late_; }
  std::size_t duplicates() const { return duplicates_; }
  Seconds latency() const { return latency_; }

 private:
  struct Held {
    RtpPacket packet;
    Seconds deadline;
  };

  std::int64_t extend(std::uint16_t seq);
  void release_head(std::vector<RtpPacket>& out);

  Seconds latency_;
  std::optional<std::int64_t> reference_;  // extended seq of the newest packet
  std::optional<std::int64_t> last_released_;
  std::map<std::int64_t, Held> held_;
  std::multiset<Seconds> deadlines_;
  std::map<std::uint32_t, Seconds> first_arrival_;
  std::deque<std::pair<Seconds, std::uint32_t>> arrival_order_;
  std::size_t late_ = 0;
  std::size_t duplicates_ = 0;
};

}  // namespace qoelab::rtp
