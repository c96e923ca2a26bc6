#include "qoelab/rtp/packet.hpp"

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::rtp {

Bytes encode_rtp(const RtpPacket& packet) {
  if (packet.payload.empty()) {
    throw ProtocolError("rtp: refusing to encode an empty payload");
  }
  if (packet.payload_type > 127) {
    throw ProtocolError(
        fmt::format("rtp: payload type {} exceeds 7 bits", packet.payload_type));
  }
  Bytes out;
  out.reserve(kRtpHeaderSize + packet.payload.size());
  out.push_back(0x80);  // V=2, P=0, X=0, CC=0
  out.push_back(static_cast<std::uint8_t>((packet.marker ? 0x80 : 0x00) |
                                          packet.payload_type));
  put_u16(out, packet.sequence);
  put_u32(out, packet.timestamp);
  put_u32(out, packet.ssrc);
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

RtpPacket decode_rtp(ByteView wire) {
  if (wire.size() < kRtpHeaderSize) {
    throw ProtocolError(
        fmt::format("rtp: {} bytes is shorter than the fixed header", wire.size()));
  }
  const int version = wire[0] >> 6;
  if (version != 2) {
    throw ProtocolError(fmt::format("rtp: unsupported version {}", version));
  }
  if ((wire[0] & 0x3f) != 0) {
    throw ProtocolError("rtp: padding, extension and CSRC are not supported");
  }
  RtpPacket packet;
  packet.marker = (wire[1] & 0x80) != 0;
  packet.payload_type = wire[1] & 0x7f;
  packet.sequence = get_u16(wire, 2);
  packet.timestamp = get_u32(wire, 4);
  packet.ssrc = get_u32(wire, 8);
  packet.payload.assign(wire.begin() + kRtpHeaderSize, wire.end());
  return packet;
}

bool looks_like_rtp(ByteView wire) {
  if (wire.size() < kRtpHeaderSize || (wire[0] >> 6) != 2) return false;
  // RTCP packet types 200..204 land in 72..76 once the marker bit is masked.
  const int pt = wire[1] & 0x7f;
  return pt < 72 || pt > 76;
}

}  // namespace qoelab::rtp
