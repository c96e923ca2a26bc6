#pragma once

#include <cstdint>
#include <optional>

#include "qoelab/common/types.hpp"
#include "qoelab/rtp/rtcp.hpp"

namespace qoelab::rtp {

// Per-source receive statistics: extended sequence tracking, interarrival
// jitter and loss accounting for reception report blocks.
class ReceptionStatistics {
 public:
  explicit ReceptionStatistics(double clock_rate);

  // track_sequence + update_jitter + counters.
  void on_packet(std::uint16_t seq, std::uint32_t rtp_timestamp, Seconds arrival,
                 std::size_t payload_bytes);

  void track_sequence(std::uint16_t seq);

  // J += (|D| - J) / 16 with D the transit difference in clock units. The
  // first call only primes the transit reference.
  void update_jitter(std::uint32_t rtp_timestamp, Seconds arrival);

  void on_sender_report(std::uint64_t ntp_time, Seconds arrival);

  // nullopt until a packet has been seen. Resets the interval counters.
  std::optional<ReceptionReport> build_report(Seconds now, std::uint32_t source_ssrc);

  // End-of-stream report. When the sender's final packet count is known,
  // expected = that count, which also accounts for losses before the first
  // and after the last received packet.
  std::optional<ReceptionReport> build_final_report(
      Seconds now, std::uint32_t source_ssrc,
      std::optional<std::uint32_t> sender_packet_count);

  bool initialized() const { return initialized_; }
  std::uint16_t base_seq() const { return base_seq_; }
  std::uint16_t max_seq() const { return max_seq_; }
  std::uint32_t cycles() const { return cycles_; }
  std::uint32_t extended_highest() const {
    return (cycles_ << 16) | max_seq_;
  }
  std::int64_t expected() const;
  std::uint64_t received() const { return received_; }
  std::int64_t cumulative_lost() const { return expected() - static_cast<std::int64_t>(received_); }
  std::uint64_t payload_bytes() const { return payload_bytes_; }

  // Q16.16 internal estimate and its truncation to whole clock units.
  std::int64_t jitter_q16() const { return jitter_q16_; }
  std::uint32_t jitter() const { return static_cast<std::uint32_t>(jitter_q16_ >> 16); }

 private:
  ReceptionReport fill(Seconds now, std::uint32_t source_ssrc, std::int64_t lost);

  double clock_rate_;
  bool initialized_ = false;
  std::uint16_t base_seq_ = 0;
  std::uint16_t max_seq_ = 0;
  std::uint32_t cycles_ = 0;
  std::uint64_t received_ = 0;
  std::uint64_t payload_bytes_ = 0;

  bool have_transit_ = false;
  Seconds last_arrival_ = 0;
  std::uint32_t last_timestamp_ = 0;
  std::int64_t jitter_q16_ = 0;

  std::int64_t expected_prior_ = 0;
  std::uint64_t received_prior_ = 0;

  std::optional<std::uint32_t> last_sr_;
  Seconds last_sr_arrival_ = 0;
};

// fraction = floor(256 * lost / expected) for the interval, 0 when the
// interval saw no net loss, saturating at 255.
std::uint8_t fraction_lost(std::int64_t interval_expected, std::int64_t interval_received);

}  // namespace qoelab::rtp
