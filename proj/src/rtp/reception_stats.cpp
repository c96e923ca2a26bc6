#include "qoelab/rtp/reception_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace qoelab::rtp {

ReceptionStatistics::ReceptionStatistics(double clock_rate) : clock_rate_(clock_rate) {}

void ReceptionStatistics::on_packet(std::uint16_t seq, std::uint32_t rtp_timestamp,
                                    Seconds arrival, std::size_t payload_bytes) {
  track_sequence(seq);
  update_jitter(rtp_timestamp, arrival);
  ++received_;
  payload_bytes_ += payload_bytes;
}

void ReceptionStatistics::track_sequence(std::uint16_t seq) {
  if (!initialized_) {
    initialized_ = true;
    base_seq_ = seq;
    max_seq_ = seq;
    return;
  }
  const auto delta = static_cast<std::uint16_t>(seq - max_seq_);
  if (delta == 0 || delta >= 0x8000) return;  // duplicate or late
  if (seq < max_seq_) ++cycles_;
  max_seq_ = seq;
}

void ReceptionStatistics::update_jitter(std::uint32_t rtp_timestamp, Seconds arrival) {
  if (!have_transit_) {
    have_transit_ = true;
    last_arrival_ = arrival;
    last_timestamp_ = rtp_timestamp;
    return;
  }
  // Transit difference: arrival spacing minus timestamp spacing, wrap-safe.
  const auto ts_delta = static_cast<std::int32_t>(rtp_timestamp - last_timestamp_);
  const double d = (arrival - last_arrival_) * clock_rate_ - static_cast<double>(ts_delta);
  const auto d_q16 = static_cast<std::int64_t>(std::llround(std::fabs(d) * 65536.0));
  jitter_q16_ += (d_q16 - jitter_q16_) / 16;
  last_arrival_ = arrival;
  last_timestamp_ = rtp_timestamp;
}

void ReceptionStatistics::on_sender_report(std::uint64_t ntp_time, Seconds arrival) {
  last_sr_ = ntp_middle32(ntp_time);
  last_sr_arrival_ = arrival;
}

std::int64_t ReceptionStatistics::expected() const {
  if (!initialized_) return 0;
  return static_cast<std::int64_t>(extended_highest()) - base_seq_ + 1;
}

std::uint8_t fraction_lost(std::int64_t interval_expected, std::int64_t interval_received) {
  const std::int64_t lost = interval_expected - interval_received;
  if (interval_expected <= 0 || lost <= 0) return 0;
  return static_cast<std::uint8_t>(std::min<std::int64_t>(255, (lost << 8) / interval_expected));
}

ReceptionReport ReceptionStatistics::fill(Seconds now, std::uint32_t source_ssrc,
                                          std::int64_t lost) {
  ReceptionReport r;
  r.source_ssrc = source_ssrc;
  const std::int64_t exp = expected();
  r.fraction_lost = rtp::fraction_lost(exp - expected_prior_,
                                       static_cast<std::int64_t>(received_ - received_prior_));
  expected_prior_ = exp;
  received_prior_ = received_;
  r.cumulative_lost = static_cast<std::int32_t>(
      std::clamp<std::int64_t>(lost, -(1 << 23), (1 << 23) - 1));
  r.extended_highest_seq = extended_highest();
  r.interarrival_jitter = jitter();
  if (last_sr_) {
    r.last_sr = *last_sr_;
    r.delay_since_last_sr =
        static_cast<std::uint32_t>(std::max(0.0, now - last_sr_arrival_) * 65536.0);
  }
  return r;
}

std::optional<ReceptionReport> ReceptionStatistics::build_report(Seconds now,
                                                                 std::uint32_t source_ssrc) {
  if (!initialized_) return std::nullopt;
  return fill(now, source_ssrc, cumulative_lost());
}

std::optional<ReceptionReport> ReceptionStatistics::build_final_report(
    Seconds now, std::uint32_t source_ssrc,
    std::optional<std::uint32_t> sender_packet_count) {
  if (!initialized_) return std::nullopt;
  std::int64_t lost = cumulative_lost();
  if (sender_packet_count) {
    lost = std::max(lost, static_cast<std::int64_t>(*sender_packet_count) -
                              static_cast<std::int64_t>(received_));
  }
  return fill(now, source_ssrc, lost);
}

}  // namespace qoelab::rtp
