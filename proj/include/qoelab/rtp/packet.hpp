#pragma once

#include <cstdint>

#include "qoelab/common/bytes.hpp"
#include "qoelab/common/types.hpp"

namespace qoelab::rtp {

inline constexpr std::size_t kRtpHeaderSize = 12;
inline constexpr std::uint8_t kVideoPayloadType = 96;
inline constexpr std::uint8_t kAudioPayloadType = 97;

constexpr std::uint8_t payload_type_for(MediaKind kind) {
  return kind == MediaKind::Video ? kVideoPayloadType : kAudioPayloadType;
}

// Fixed 12-byte header: no CSRC list, no extension, no padding.
struct RtpPacket {
  bool marker = false;
  std::uint8_t payload_type = 0;
  std::uint16_t sequence = 0;
  std::uint32_t timestamp = 0;
  std::uint32_t ssrc = 0;
  Bytes payload;

  bool operator==(const RtpPacket&) const = default;
};

// Throws ProtocolError on empty payload or payload_type > 127.
Bytes encode_rtp(const RtpPacket& packet);

// Throws ProtocolError on short buffers, version != 2, or header features
// this engine never emits (CSRC, extension, padding).
RtpPacket decode_rtp(ByteView wire);

// Cheap check used by substrates to classify datagrams without decoding.
bool looks_like_rtp(ByteView wire);

}  // namespace qoelab::rtp
