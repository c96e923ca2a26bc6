#include "qoelab/rtp/rtcp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::rtp {
namespace {

constexpr std::size_t kReportBlockSize = 24;

void put_header(Bytes& out, std::uint8_t count, std::uint8_t type,
                std::size_t body_bytes) {
  const std::size_t total = 4 + body_bytes;
  out.push_back(static_cast<std::uint8_t>(0x80 | (count & 0x1f)));
  out.push_back(type);
  put_u16(out, static_cast<std::uint16_t>(total / 4 - 1));
}

void put_block(Bytes& out, const ReceptionReport& block) {
  put_u32(out, block.source_ssrc);
  const std::int32_t clamped =
      std::clamp(block.cumulative_lost, -(1 << 23), (1 << 23) - 1);
  const auto lost24 = static_cast<std::uint32_t>(clamped) & 0x00ffffffU;
  put_u32(out, (static_cast<std::uint32_t>(block.fraction_lost) << 24) | lost24);
  put_u32(out, block.extended_highest_seq);
  put_u32(out, block.interarrival_jitter);
  put_u32(out, block.last_sr);
  put_u32(out, block.delay_since_last_sr);
}

ReceptionReport get_block(ByteView in, std::size_t at) {
  ReceptionReport block;
  block.source_ssrc = get_u32(in, at);
  const std::uint32_t word = get_u32(in, at + 4);
  block.fraction_lost = static_cast<std::uint8_t>(word >> 24);
  std::int32_t lost = static_cast<std::int32_t>(word & 0x00ffffffU);
  if (lost & 0x00800000) lost -= 1 << 24;  // sign-extend
  block.cumulative_lost = lost;
  block.extended_highest_seq = get_u32(in, at + 8);
  block.interarrival_jitter = get_u32(in, at + 12);
  block.last_sr = get_u32(in, at + 16);
  block.delay_since_last_sr = get_u32(in, at + 20);
  return block;
}

std::vector<ReceptionReport> get_blocks(ByteView body, std::size_t at,
                                        std::size_t count) {
  if (at + count * kReportBlockSize > body.size()) {
    throw ProtocolError("rtcp: report blocks overrun packet length");
  }
  std::vector<ReceptionReport> blocks;
  blocks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    blocks.push_back(get_block(body, at + i * kReportBlockSize));
  }
  return blocks;
}

struct Encoder {
  Bytes& out;

  void operator()(const SenderReport& sr) const {
    if (sr.blocks.size() > 31) throw ProtocolError("rtcp: too many blocks");
    put_header(out, static_cast<std::uint8_t>(sr.blocks.size()),
               kRtcpSenderReport, 24 + kReportBlockSize * sr.blocks.size());
    put_u32(out, sr.ssrc);
    put_u64(out, sr.info.ntp_time);
    put_u32(out, sr.info.rtp_time);
    put_u32(out, sr.info.packet_count);
    put_u32(out, sr.info.octet_count);
    for (const auto& b : sr.blocks) put_block(out, b);
  }

  void operator()(const ReceiverReport& rr) const {
    if (rr.blocks.size() > 31) throw ProtocolError("rtcp: too many blocks");
    put_header(out, static_cast<std::uint8_t>(rr.blocks.size()),
               kRtcpReceiverReport, 4 + kReportBlockSize * rr.blocks.size());
    put_u32(out, rr.ssrc);
    for (const auto& b : rr.blocks) put_block(out, b);
  }

  void operator()(const Bye& bye) const {
    if (bye.ssrcs.size() > 31) throw ProtocolError("rtcp: too many BYE sources");
    put_header(out, static_cast<std::uint8_t>(bye.ssrcs.size()), kRtcpBye,
               4 * bye.ssrcs.size());
    for (auto ssrc : bye.ssrcs) put_u32(out, ssrc);
  }
};

}  // namespace

Bytes encode_rtcp(const std::vector<RtcpPacket>& compound) {
  Bytes out;
  for (const auto& packet : compound) std::visit(Encoder{out}, packet);
  return out;
}

std::vector<RtcpPacket> decode_rtcp(ByteView wire) {
  std::vector<RtcpPacket> packets;
  std::size_t offset = 0;
  while (offset < wire.size()) {
    if (wire.size() - offset < 4) {
      throw ProtocolError("rtcp: truncated common header");
    }
    if ((wire[offset] >> 6) != 2) {
      throw ProtocolError(
          fmt::format("rtcp: unsupported version {}", wire[offset] >> 6));
    }
    const std::size_t count = wire[offset] & 0x1f;
    const std::uint8_t type = wire[offset + 1];
    const std::size_t length = (get_u16(wire, offset + 2) + 1U) * 4U;
    if (offset + length > wire.size()) {
      throw ProtocolError("rtcp: packet length exceeds datagram");
    }
    const ByteView body = wire.subspan(offset, length);
    switch (type) {
      case kRtcpSenderReport: {
        if (length < 28) throw ProtocolError("rtcp: short sender report");
        SenderReport sr;
        sr.ssrc = get_u32(body, 4);
        sr.info.ntp_time = get_u64(body, 8);
        sr.info.rtp_time = get_u32(body, 16);
        sr.info.packet_count = get_u32(body, 20);
        sr.info.octet_count = get_u32(body, 24);
        sr.blocks = get_blocks(body, 28, count);
        packets.emplace_back(std::move(sr));
        break;
      }
      case kRtcpReceiverReport: {
        if (length < 8) throw ProtocolError("rtcp: short receiver report");
        ReceiverReport rr;
        rr.ssrc = get_u32(body, 4);
        rr.blocks = get_blocks(body, 8, count);
        packets.emplace_back(std::move(rr));
        break;
      }
      case kRtcpBye: {
        if (4 + 4 * count > length) throw ProtocolError("rtcp: short BYE");
        Bye bye;
        for (std::size_t i = 0; i < count; ++i) {
          bye.ssrcs.push_back(get_u32(body, 4 + 4 * i));
        }
        packets.emplace_back(std::move(bye));
        break;
      }
      default:
        break;
    }
    offset += length;
  }
  return packets;
}

std::uint64_t ntp_from_seconds(Seconds t) {
  if (t < 0) t = 0;
  const double whole = std::floor(t);
  const auto frac = static_cast<std::uint64_t>((t - whole) * 4294967296.0);
  return (static_cast<std::uint64_t>(whole) << 32) | (frac & 0xffffffffULL);
}

}  // namespace qoelab::rtp
