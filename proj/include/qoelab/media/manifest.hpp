#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qoelab/common/types.hpp"
#include "qoelab/media/timeline.hpp"

namespace qoelab::media {

enum class FrameStatus { Complete, Partial, Missing };

std::string_view to_string(FrameStatus status);

// One reconstructed frame as seen by the receiver.
struct ReceivedFrame {
  MediaKind kind = MediaKind::Video;
  std::uint32_t index = 0;
  std::uint32_t rtp_timestamp = 0;
  std::uint32_t size = 0;    // reassembled bytes; 0 unless complete
  std::uint64_t digest = 0;  // digest announced by the sender
  FrameStatus status = FrameStatus::Missing;
  std::uint32_t fragments_received = 0;
  std::uint32_t fragments_expected = 0;
  bool digest_ok = false;

  bool operator==(const ReceivedFrame&) const = default;
};

std::string digest_hex(std::uint64_t digest);

// JSON Lines, one object per frame, video first then audio:
//   {"kind","index","rtp_timestamp","size","digest"}
void write_timeline_manifest(std::ostream& out, const MediaTimeline& timeline);

// Same keys plus "status", "fragments_received", "fragments_expected",
// "digest_ok".
void write_received_manifest(std::ostream& out,
                             std::span<const ReceivedFrame> frames);

// Throws ParseError on malformed lines.
std::vector<ReceivedFrame> read_received_manifest(std::istream& in);

}  // namespace qoelab::media
