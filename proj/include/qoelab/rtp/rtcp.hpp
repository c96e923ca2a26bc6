#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "qoelab/common/bytes.hpp"
#include "qoelab/common/types.hpp"

namespace qoelab::rtp {

inline constexpr std::uint8_t kRtcpSenderReport = 200;
inline constexpr std::uint8_t kRtcpReceiverReport = 201;
inline constexpr std::uint8_t kRtcpBye = 203;

struct SenderInfo {
  std::uint64_t ntp_time = 0;
  std::uint32_t rtp_time = 0;
  std::uint32_t packet_count = 0;
  std::uint32_t octet_count = 0;

  bool operator==(const SenderInfo&) const = default;
};

struct ReceptionReport {
  std::uint32_t source_ssrc = 0;
  std::uint8_t fraction_lost = 0;
  std::int32_t cumulative_lost = 0;  // 24-bit signed on the wire
  std::uint32_t extended_highest_seq = 0;
  std::uint32_t interarrival_jitter = 0;
  std::uint32_t last_sr = 0;
  std::uint32_t delay_since_last_sr = 0;

  bool operator==(const ReceptionReport&) const = default;
};

struct SenderReport {
  std::uint32_t ssrc = 0;
  SenderInfo info;
  std::vector<ReceptionReport> blocks;

  bool operator==(const SenderReport&) const = default;
};

struct ReceiverReport {
  std::uint32_t ssrc = 0;
  std::vector<ReceptionReport> blocks;

  bool operator==(const ReceiverReport&) const = default;
};

struct Bye {
  std::vector<std::uint32_t> ssrcs;

  bool operator==(const Bye&) const = default;
};

using RtcpPacket = std::variant<SenderReport, ReceiverReport, Bye>;

// Serializes one compound RTCP datagram.
Bytes encode_rtcp(const std::vector<RtcpPacket>& compound);

// Parses a compound datagram. Packet types outside SR/RR/BYE are skipped.
// Throws ProtocolError on truncation or bad version.
std::vector<RtcpPacket> decode_rtcp(ByteView wire);

// Middle 32 bits of an NTP timestamp, as carried in LSR.
constexpr std::uint32_t ntp_middle32(std::uint64_t ntp) {
  return static_cast<std::uint32_t>(ntp >> 16);
}

// 32.32 fixed-point conversion of a non-negative seconds value.
std::uint64_t ntp_from_seconds(Seconds t);

}  // namespace qoelab::rtp
