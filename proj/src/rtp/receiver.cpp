#include "qoelab/rtp/receiver.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"
#include "qoelab/common/random.hpp"
#include "qoelab/media/packetizer.hpp"
#include "qoelab/media/profile.hpp"

namespace qoelab::rtp {

std::string_view to_string(EosKind kind) { return kind == EosKind::Bye ? "BYE" : "timeout"; }

Receiver::Receiver(ReceiverOptions options, StatsSink* sink)
    : options_(options),
      sink_(sink),
      sessions_{Session(media::kVideoClockRate, options.latency),
                Session(media::kAudioClockRate, options.latency)} {
  for (MediaKind kind : kAllMedia) {
    own_ssrc_[index_of(kind)] = static_cast<std::uint32_t>(
        mix64(combine_seed(options_.seed, fmt::format("receiver/{}", to_string(kind)))));
  }
}

void Receiver::start(Seconds now, net::Transport& transport) {
  transport_ = &transport;
  started_ = true;
  last_media_ = now;
  next_report_ = now + options_.report_interval;
}

void Receiver::on_datagram(MediaKind session, Plane plane, ByteView datagram, Seconds now) {
  if (finished_ || !started_) return;
  if (plane == Plane::Rtp) {
    on_rtp(session, datagram, now);
  } else {
    on_rtcp(session, datagram, now);
  }
}

void Receiver::on_rtp(MediaKind kind, ByteView datagram, Seconds now) {
  Session& s = sessions_[index_of(kind)];
  SessionReceiveStats& st = summary_.sessions[index_of(kind)];
  RtpPacket packet;
  try {
    packet = decode_rtp(datagram);
  } catch (const ProtocolError&) {
    ++st.malformed;
    return;
  }
  if (!s.source_ssrc) s.source_ssrc = packet.ssrc;
  if (packet.ssrc != *s.source_ssrc) return;

  last_media_ = now;
  s.stats.on_packet(packet.sequence, packet.timestamp, now, packet.payload.size());
  s.buffer.push(std::move(packet), now);
  absorb(kind, s.buffer.drain(now));
}

void Receiver::on_rtcp(MediaKind kind, ByteView datagram, Seconds now) {
  Session& s = sessions_[index_of(kind)];
  SessionReceiveStats& st = summary_.sessions[index_of(kind)];
  std::vector<RtcpPacket> packets;
  try {
    packets = decode_rtcp(datagram);
  } catch (const ProtocolError&) {
    ++st.malformed;
    return;
  }
  for (const auto& p : packets) {
    if (const auto* sr = std::get_if<SenderReport>(&p)) {
      if (s.source_ssrc && sr->ssrc != *s.source_ssrc) continue;
      s.stats.on_sender_report(sr->info.ntp_time, now);
      s.sender_packet_count = std::max(s.sender_packet_count.value_or(0), sr->info.packet_count);
      ++st.sender_reports;
      if (sink_) sink_->record(StatsRecord{now, kind, ReportDirection::SR, sr->ssrc, sr->info, {}, false});
    } else if (const auto* bye = std::get_if<Bye>(&p)) {
      const bool ours = !s.source_ssrc || std::find(bye->ssrcs.begin(), bye->ssrcs.end(),
                                                    *s.source_ssrc) != bye->ssrcs.end();
      if (!ours || s.bye_seen) continue;
      s.bye_seen = true;
      st.bye_seen = true;
      if (sink_) {
        sink_->record(StatsRecord{now, kind, ReportDirection::BYE,
                                  bye->ssrcs.empty() ? 0 : bye->ssrcs.front(), {}, {}, false});
      }
    }
  }
  if (!eos_deadline_ && sessions_[0].bye_seen && sessions_[1].bye_seen) {
    eos_deadline_ = now + options_.latency;
  }
}

void Receiver::absorb(MediaKind kind, std::vector<RtpPacket> released) {
  Session& s = sessions_[index_of(kind)];
  SessionReceiveStats& st = summary_.sessions[index_of(kind)];
  for (auto& packet : released) {
    media::FragmentHeader header;
    try {
      header = media::read_fragment_header(packet.payload);
    } catch (const ProtocolError&) {
      ++st.malformed;
      continue;
    }
    if (!s.group.empty() && s.group.front().timestamp != packet.timestamp) close_group(kind);
    s.group.push_back(std::move(packet));
    if (s.group.size() == header.fragment_count) close_group(kind);
  }
}

void Receiver::close_group(MediaKind kind) {
  Session& s = sessions_[index_of(kind)];
  SessionReceiveStats& st = summary_.sessions[index_of(kind)];
  if (s.group.empty()) return;
  media::FrameReassembly r;
  try {
    r = media::reassemble_frame(s.group);
  } catch (const ProtocolError&) {
    ++st.malformed;
    s.group.clear();
    return;
  }
  s.group.clear();

  media::ReceivedFrame f;
  f.kind = kind;
  f.index = r.frame_index;
  f.rtp_timestamp = r.rtp_timestamp;
  f.size = r.complete() ? static_cast<std::uint32_t>(r.data.size()) : 0;
  f.digest = r.expected_digest;
  f.status = r.complete() ? media::FrameStatus::Complete : media::FrameStatus::Partial;
  f.fragments_received = static_cast<std::uint32_t>(r.fragments_received);
  f.fragments_expected = static_cast<std::uint32_t>(r.fragments_expected);
  f.digest_ok = r.digest_ok;

  auto [it, inserted] = s.frames.try_emplace(f.index, f);
  if (!inserted && f.fragments_received > it->second.fragments_received) it->second = f;
}

void Receiver::send_reports(Seconds now) {
  for (MediaKind kind : kAllMedia) {
    Session& s = sessions_[index_of(kind)];
    auto report = s.stats.build_report(now, s.source_ssrc.value_or(0));
    if (!report) continue;
    const ReceiverReport rr{own_ssrc_[index_of(kind)], {*report}};
    transport_->send(kind, Plane::Rtcp, encode_rtcp({rr}));
    ++summary_.sessions[index_of(kind)].receiver_reports;
    if (sink_) sink_->record(StatsRecord{now, kind, ReportDirection::RR, rr.ssrc, {}, *report, false});
  }
}

void Receiver::on_timer(Seconds now) {
  if (finished_ || !started_) return;
  for (MediaKind kind : kAllMedia) {
    absorb(kind, sessions_[index_of(kind)].buffer.drain(now));
  }
  if (now >= next_report_) {
    send_reports(now);
    while (next_report_ <= now) next_report_ += options_.report_interval;
  }
  if (eos_deadline_ && now >= *eos_deadline_) {
    finish(EosKind::Bye, now);
  } else if (now - last_media_ >= options_.silence_timeout) {
    finish(EosKind::Timeout, now);
  }
}

std::optional<Seconds> Receiver::next_timer() const {
  if (finished_ || !started_) return std::nullopt;
  Seconds t = std::min(next_report_, last_media_ + options_.silence_timeout);
  if (eos_deadline_) t = std::min(t, *eos_deadline_);
  for (const auto& s : sessions_) {
    if (auto d = s.buffer.next_deadline()) t = std::min(t, *d);
  }
  return t;
}

void Receiver::finish(EosKind kind, Seconds now) {
  manifest_.clear();
  for (MediaKind media_kind : kAllMedia) {
    Session& s = sessions_[index_of(media_kind)];
    SessionReceiveStats& st = summary_.sessions[index_of(media_kind)];
    absorb(media_kind, s.buffer.flush());
    close_group(media_kind);

    const auto final_report = s.stats.build_final_report(
        now, s.source_ssrc.value_or(0),
        s.bye_seen ? s.sender_packet_count : std::nullopt);
    if (final_report && sink_) {
      sink_->record(StatsRecord{now, media_kind, ReportDirection::RR,
                                own_ssrc_[index_of(media_kind)], {}, *final_report, true});
    }

    st.source_ssrc = s.source_ssrc.value_or(0);
    st.receiver_ssrc = own_ssrc_[index_of(media_kind)];
    st.packets_received = s.stats.received();
    st.packets_lost = final_report ? final_report->cumulative_lost : 0;
    st.packets_expected = static_cast<std::int64_t>(st.packets_received) + st.packets_lost;
    st.final_jitter = s.stats.jitter();
    st.payload_bytes = s.stats.payload_bytes();
    st.late_discards = s.buffer.late_discards();

    std::uint32_t next_index = 0;
    for (const auto& [index, frame] : s.frames) {
      for (; next_index < index; ++next_index) {
        media::ReceivedFrame gap;
        gap.kind = media_kind;
        gap.index = next_index;
        manifest_.push_back(gap);
        ++st.frames_missing;
      }
      manifest_.push_back(frame);
      if (frame.status == media::FrameStatus::Complete) {
        ++st.frames_complete;
        if (!frame.digest_ok) ++st.digest_failures;
      } else {
        ++st.frames_partial;
      }
      next_index = index + 1;
    }
  }
  summary_.eos = kind;
  summary_.end_time = now;
  finished_ = true;
}

std::string Receiver::status() const {
  const auto& v = sessions_[0];
  const auto& a = sessions_[1];
  return fmt::format(
      "receiver: video {} pkts (bye {}), audio {} pkts (bye {}), held {}/{}, last media {:.3f}{}",
      v.stats.received(), v.bye_seen, a.stats.received(), a.bye_seen, v.buffer.size(),
      a.buffer.size(), last_media_, finished_ ? " (finished)" : "");
}

}  // namespace qoelab::rtp
