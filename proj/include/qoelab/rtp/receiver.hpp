#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qoelab/media/manifest.hpp"
#include "qoelab/net/actor.hpp"
#include "qoelab/rtp/jitter_buffer.hpp"
#include "qoelab/rtp/reception_stats.hpp"
#include "qoelab/rtp/sender.hpp"
#include "qoelab/rtp/stats_sink.hpp"

namespace qoelab::rtp {

inline constexpr Seconds kDefaultLatency = 0.200;
inline constexpr Seconds kSilenceTimeout = 10.0;

struct ReceiverOptions {
  Seconds latency = kDefaultLatency;
  Seconds report_interval = kReportInterval;
  Seconds silence_timeout = kSilenceTimeout;
  std::uint64_t seed = 0;  // receiver SSRCs
};

enum class EosKind { Bye, Timeout };

std::string_view to_string(EosKind kind);

struct SessionReceiveStats {
  std::uint32_t source_ssrc = 0;
  std::uint32_t receiver_ssrc = 0;
  std::uint64_t packets_received = 0;
  std::int64_t packets_expected = 0;
  std::int64_t packets_lost = 0;
  std::uint32_t final_jitter = 0;  // clock units
  std::uint64_t payload_bytes = 0;
  std::uint64_t late_discards = 0;
  std::uint64_t frames_complete = 0;
  std::uint64_t frames_partial = 0;
  std::uint64_t frames_missing = 0;
  std::uint64_t digest_failures = 0;
  std::uint64_t malformed = 0;
  std::uint32_t sender_reports = 0;
  std::uint32_t receiver_reports = 0;
  bool bye_seen = false;

  double loss_fraction() const {
    return packets_expected > 0 ? static_cast<double>(packets_lost) / packets_expected : 0.0;
  }
};

struct ReceiverSummary {
  std::array<SessionReceiveStats, 2> sessions;
  EosKind eos = EosKind::Timeout;
  Seconds end_time = 0;

  const SessionReceiveStats& session(MediaKind k) const { return sessions[index_of(k)]; }
  bool eos_seen() const {
    return sessions[0].bye_seen && sessions[1].bye_seen;
  }
};

// Ingests both sessions: statistics on arrival, jitter buffer, frame
// reassembly, periodic receiver reports, and end-of-stream handling. Finishes
// `latency` after BYE was seen on both sessions, or after `silence_timeout`
// without media.
class Receiver final : public net::Actor {
 public:
  explicit Receiver(ReceiverOptions options = {}, StatsSink* sink = nullptr);

  void start(Seconds now, net::Transport& transport) override;
  void on_datagram(MediaKind session, Plane plane, ByteView datagram, Seconds now) override;
  void on_timer(Seconds now) override;
  std::optional<Seconds> next_timer() const override;
  bool finished() const override { return finished_; }
  std::string status() const override;

  const ReceiverSummary& summary() const { return summary_; }

  // Reconstructed frames ordered by (kind, index), gaps filled as Missing.
  // Complete once the receiver has finished.
  const std::vector<media::ReceivedFrame>& received_frames() const { return manifest_; }

 private:
  struct Session {
    explicit Session(double clock_rate, Seconds latency)
        : stats(clock_rate), buffer(latency) {}

    ReceptionStatistics stats;
    JitterBuffer buffer;
    std::optional<std::uint32_t> source_ssrc;
    std::vector<RtpPacket> group;
    std::map<std::uint32_t, media::ReceivedFrame> frames;
    std::optional<std::uint32_t> sender_packet_count;
    bool bye_seen = false;
  };

  void on_rtp(MediaKind kind, ByteView datagram, Seconds now);
  void on_rtcp(MediaKind kind, ByteView datagram, Seconds now);
  void absorb(MediaKind kind, std::vector<RtpPacket> released);
  void close_group(MediaKind kind);
  void send_reports(Seconds now);
  void finish(EosKind kind, Seconds now);

  ReceiverOptions options_;
  StatsSink* sink_;
  net::Transport* transport_ = nullptr;
  std::array<Session, 2> sessions_;
  std::array<std::uint32_t, 2> own_ssrc_{};
  bool started_ = false;
  bool finished_ = false;
  Seconds last_media_ = 0;
  Seconds next_report_ = 0;
  std::optional<Seconds> eos_deadline_;
  ReceiverSummary summary_;
  std::vector<media::ReceivedFrame> manifest_;
};

}  // namespace qoelab::rtp
