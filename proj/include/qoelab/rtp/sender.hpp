#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "qoelab/media/packetizer.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/net/actor.hpp"
#include "qoelab/rtp/rtcp.hpp"
#include "qoelab/rtp/stats_sink.hpp"

namespace qoelab::rtp {

inline constexpr Seconds kReportInterval = 5.0;

struct SenderOptions {
  std::size_t mtu = media::kDefaultMtu;
  Seconds report_interval = kReportInterval;
  // The closing SR+BYE compound is repeated so a lossy path still carries it.
  int bye_repeats = 3;
  Seconds bye_spacing = 0.020;
  // Seconds added to actor time when filling NTP timestamps.
  double ntp_origin = 0;
};

struct SessionSendStats {
  std::uint32_t ssrc = 0;
  std::uint16_t first_sequence = 0;
  std::uint64_t packets = 0;
  std::uint64_t octets = 0;  // RTP payload bytes
  std::uint64_t frames = 0;
  std::uint32_t sender_reports = 0;
  std::uint32_t byes_sent = 0;
  std::uint32_t receiver_reports = 0;
  std::optional<ReceptionReport> last_receiver_report;
};

struct SenderSummary {
  std::array<SessionSendStats, 2> sessions;
  bool aborted = false;
  std::string abort_reason;
  Seconds end_time = 0;

  const SessionSendStats& session(MediaKind k) const { return sessions[index_of(k)]; }
};

// Streams both sessions of a timeline at capture-time pacing, emits periodic
// sender reports, and closes each session with SR+BYE.
class Sender final : public net::Actor {
 public:
  Sender(const media::MediaTimeline& timeline, SenderOptions options = {},
         StatsSink* sink = nullptr);

  void start(Seconds now, net::Transport& transport) override;
  void on_datagram(MediaKind session, Plane plane, ByteView datagram, Seconds now) override;
  void on_timer(Seconds now) override;
  std::optional<Seconds> next_timer() const override;
  bool finished() const override;
  std::string status() const override;

  // Records a transport failure; the actor stops and keeps partial counts.
  void abort(std::string reason);

  const SenderSummary& summary() const { return summary_; }

 private:
  struct Stream {
    const std::vector<media::Frame>* frames = nullptr;
    std::size_t next = 0;
    media::SequenceCursor cursor;
    double clock_rate = 0;
  };

  void tick(Seconds now);
  bool media_remaining() const;
  std::optional<Seconds> next_capture() const;
  void send_frame(MediaKind kind, const media::Frame& frame);
  SenderReport make_sender_report(MediaKind kind, Seconds now) const;
  void send_sender_report(MediaKind kind, Seconds now);
  void send_bye(MediaKind kind, Seconds now);

  const media::MediaTimeline& timeline_;
  SenderOptions options_;
  StatsSink* sink_;
  net::Transport* transport_ = nullptr;
  std::array<Stream, 2> streams_;
  Seconds origin_ = 0;
  bool started_ = false;
  Seconds next_report_ = 0;
  int byes_done_ = 0;
  Seconds next_bye_ = 0;
  SenderSummary summary_;
};

}  // namespace qoelab::rtp
