#include "qoelab/rtp/sender.hpp"

#include <fmt/format.h>

#include "qoelab/common/error.hpp"
#include "qoelab/common/random.hpp"

namespace qoelab::rtp {

Sender::Sender(const media::MediaTimeline& timeline, SenderOptions options, StatsSink* sink)
    : timeline_(timeline), options_(options), sink_(sink) {
  for (MediaKind kind : kAllMedia) {
    Stream& s = streams_[index_of(kind)];
    s.frames = &timeline_.frames(kind);
    s.clock_rate = kind == MediaKind::Video ? timeline_.profile.video_clock_rate
                                            : timeline_.profile.audio_clock_rate;
    const std::uint64_t seed =
        combine_seed(timeline_.seed, fmt::format("sender/{}", to_string(kind)));
    SessionSendStats& st = summary_.sessions[index_of(kind)];
    st.ssrc = static_cast<std::uint32_t>(mix64(seed));
    st.first_sequence = static_cast<std::uint16_t>(mix64(seed + 1));
    s.cursor = media::SequenceCursor(st.first_sequence);
  }
}

void Sender::start(Seconds now, net::Transport& transport) {
  transport_ = &transport;
  origin_ = now;
  started_ = true;
  next_report_ = now;
  next_bye_ = now;
}

bool Sender::media_remaining() const {
  for (const auto& s : streams_) {
    if (s.next < s.frames->size()) return true;
  }
  return false;
}

std::optional<Seconds> Sender::next_capture() const {
  std::optional<Seconds> t;
  for (const auto& s : streams_) {
    if (s.next < s.frames->size()) {
      const Seconds c = origin_ + (*s.frames)[s.next].capture_time;
      if (!t || c < *t) t = c;
    }
  }
  return t;
}

std::optional<Seconds> Sender::next_timer() const {
  if (finished()) return std::nullopt;
  if (auto capture = next_capture()) return std::min(*capture, next_report_);
  return next_bye_;
}

bool Sender::finished() const {
  return summary_.aborted || (started_ && byes_done_ >= options_.bye_repeats);
}

void Sender::send_frame(MediaKind kind, const media::Frame& frame) {
  Stream& s = streams_[index_of(kind)];
  SessionSendStats& st = summary_.sessions[index_of(kind)];
  const Bytes payload = media::synthetic_payload(timeline_.seed, timeline_.profile.source_id,
                                                 kind, frame.index, frame.size);
  for (const auto& packet : media::packetize_frame(frame, payload, options_.mtu, st.ssrc, s.cursor)) {
    transport_->send(kind, Plane::Rtp, encode_rtp(packet));
    ++st.packets;
    st.octets += packet.payload.size();
  }
  ++st.frames;
}

SenderReport Sender::make_sender_report(MediaKind kind, Seconds now) const {
  const Stream& s = streams_[index_of(kind)];
  const SessionSendStats& st = summary_.sessions[index_of(kind)];
  SenderReport sr;
  sr.ssrc = st.ssrc;
  sr.info.ntp_time = ntp_from_seconds(options_.ntp_origin + now);
  sr.info.rtp_time = media::rtp_timestamp_at(now - origin_, s.clock_rate);
  sr.info.packet_count = static_cast<std::uint32_t>(st.packets);
  sr.info.octet_count = static_cast<std::uint32_t>(st.octets);
  return sr;
}

void Sender::send_sender_report(MediaKind kind, Seconds now) {
  const SenderReport sr = make_sender_report(kind, now);
  transport_->send(kind, Plane::Rtcp, encode_rtcp({sr}));
  ++summary_.sessions[index_of(kind)].sender_reports;
  if (sink_) sink_->record(StatsRecord{now, kind, ReportDirection::SR, sr.ssrc, sr.info, {}, false});
}

void Sender::send_bye(MediaKind kind, Seconds now) {
  const SenderReport sr = make_sender_report(kind, now);
  SessionSendStats& st = summary_.sessions[index_of(kind)];
  transport_->send(kind, Plane::Rtcp, encode_rtcp({sr, Bye{{st.ssrc}}}));
  ++st.sender_reports;
  ++st.byes_sent;
  if (sink_ && st.byes_sent == 1) {
    sink_->record(StatsRecord{now, kind, ReportDirection::BYE, st.ssrc, sr.info, {}, false});
  }
}

void Sender::on_timer(Seconds now) {
  if (finished() || !started_) return;
  try {
    tick(now);
  } catch (const TransportError& e) {
    abort(e.what());
    summary_.end_time = now;
  }
}

void Sender::tick(Seconds now) {
  // Media due now, in capture order; video first on equal capture times.
  while (true) {
    std::optional<MediaKind> pick;
    Seconds best = 0;
    for (MediaKind kind : kAllMedia) {
      const Stream& s = streams_[index_of(kind)];
      if (s.next >= s.frames->size()) continue;
      const Seconds c = origin_ + (*s.frames)[s.next].capture_time;
      if (c <= now && (!pick || c < best)) {
        pick = kind;
        best = c;
      }
    }
    if (!pick) break;
    Stream& s = streams_[index_of(*pick)];
    send_frame(*pick, (*s.frames)[s.next++]);
  }

  if (media_remaining()) {
    if (now >= next_report_) {
      for (MediaKind kind : kAllMedia) send_sender_report(kind, now);
      while (next_report_ <= now) next_report_ += options_.report_interval;
    }
    return;
  }

  if (byes_done_ < options_.bye_repeats && now >= next_bye_) {
    for (MediaKind kind : kAllMedia) send_bye(kind, now);
    ++byes_done_;
    next_bye_ = now + options_.bye_spacing;
    if (byes_done_ >= options_.bye_repeats) summary_.end_time = now;
  }
}

void Sender::on_datagram(MediaKind session, Plane plane, ByteView datagram, Seconds now) {
  if (plane != Plane::Rtcp) return;
  std::vector<RtcpPacket> packets;
  try {
    packets = decode_rtcp(datagram);
  } catch (const std::exception&) {
    return;
  }
  SessionSendStats& st = summary_.sessions[index_of(session)];
  for (const auto& p : packets) {
    const auto* rr = std::get_if<ReceiverReport>(&p);
    if (!rr) continue;
    for (const auto& block : rr->blocks) {
      if (block.source_ssrc != st.ssrc) continue;
      ++st.receiver_reports;
      st.last_receiver_report = block;
      if (sink_) sink_->record(StatsRecord{now, session, ReportDirection::RR, rr->ssrc, {}, block, false});
    }
  }
}

void Sender::abort(std::string reason) {
  summary_.aborted = true;
  summary_.abort_reason = std::move(reason);
}

std::string Sender::status() const {
  const auto& v = summary_.session(MediaKind::Video);
  const auto& a = summary_.session(MediaKind::Audio);
  return fmt::format("sender: video {}/{} frames, audio {}/{} frames, byes {}/{}{}", v.frames,
                     timeline_.video_frames.size(), a.frames, timeline_.audio_frames.size(),
                     byes_done_, options_.bye_repeats, summary_.aborted ? " (aborted)" : "");
}

}  // namespace qoelab::rtp
