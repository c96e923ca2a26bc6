#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qoelab/common/bytes.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/rtp/packet.hpp"

namespace qoelab::media {

// Every RTP payload starts with a fragment header:
//   u32 frame index | u16 fragment index | u16 fragment count | u64 digest
inline constexpr std::size_t kFragmentHeaderSize = 16;
inline constexpr std::size_t kPacketOverhead =
    rtp::kRtpHeaderSize + kFragmentHeaderSize;
inline constexpr std::size_t kMinMtu = 64;
// Leaves 1400 bytes of frame data per packet.
inline constexpr std::size_t kDefaultMtu = 1400 + kPacketOverhead;

struct FragmentHeader {
  std::uint32_t frame_index = 0;
  std::uint16_t fragment_index = 0;
  std::uint16_t fragment_count = 0;
  std::uint64_t digest = 0;
};

// Throws ProtocolError if the payload is too short to hold a header.
FragmentHeader read_fragment_header(ByteView payload);

// Next sequence number to hand out; wraps mod 2^16.
class SequenceCursor {
 public:
  explicit SequenceCursor(std::uint16_t first = 0) : next_(first) {}
  std::uint16_t take() { return next_++; }
  std::uint16_t peek() const { return next_; }

 private:
  std::uint16_t next_;
};

constexpr std::size_t payload_capacity(std::size_t mtu) {
  return mtu - kPacketOverhead;
}

// Splits the frame data into ceil(size / capacity) packets sharing the frame
// timestamp, marker on the last one. Throws ConfigError if mtu < kMinMtu or
// the payload size disagrees with the frame.
std::vector<rtp::RtpPacket> packetize_frame(const Frame& frame, ByteView payload,
                                            std::size_t mtu, std::uint32_t ssrc,
                                            SequenceCursor& cursor);

struct FrameReassembly {
  enum class Status { Complete, Partial };

  Status status = Status::Partial;
  // Unset only for degenerate (empty) input.
  std::optional<std::size_t> missing;
  bool degenerate = false;
  std::uint32_t frame_index = 0;
  std::uint32_t rtp_timestamp = 0;
  std::size_t fragments_expected = 0;
  std::size_t fragments_received = 0;
  std::uint64_t expected_digest = 0;
  bool digest_ok = false;
  Bytes data;  // filled only when Complete

  bool complete() const { return status == Status::Complete; }
};

// Accepts fragments in any order; duplicates are ignored. Throws
// ProtocolError if fragments disagree on timestamp or frame identity.
FrameReassembly reassemble_frame(std::span<const rtp::RtpPacket> fragments);

}  // namespace qoelab::media
