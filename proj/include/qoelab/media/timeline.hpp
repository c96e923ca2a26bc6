#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "qoelab/common/bytes.hpp"
#include "qoelab/common/types.hpp"
#include "qoelab/media/profile.hpp"

namespace qoelab::media {

struct Frame {
  MediaKind kind = MediaKind::Video;
  std::uint32_t index = 0;
  Seconds capture_time = 0;
  std::uint32_t rtp_timestamp = 0;
  std::uint32_t size = 0;
  std::uint64_t payload_digest = 0;

  bool operator==(const Frame&) const = default;
};

struct MediaTimeline {
  MediaProfile profile;
  std::vector<Frame> video_frames;
  std::vector<Frame> audio_frames;
  std::uint64_t seed = 0;

  const std::vector<Frame>& frames(MediaKind kind) const {
    return kind == MediaKind::Video ? video_frames : audio_frames;
  }

  bool operator==(const MediaTimeline&) const = default;
};

// Log-normal spread of video frame sizes, before the [0.2, 5] x mean clamp.
inline constexpr double kVideoSizeSigma = 0.35;

// Frame payload content: a pure function of (seed, source, kind, index).
Bytes synthetic_payload(std::uint64_t seed, std::string_view source_id,
                        MediaKind kind, std::uint32_t index, std::size_t size);

// 64-bit FNV-1a.
std::uint64_t payload_digest(ByteView bytes);

std::uint32_t rtp_timestamp_at(Seconds capture_time, double clock_rate);

// Frame sizes are drawn serially; per-frame payload digests are computed with
// an OpenMP loop. Throws ConfigError on invalid profiles.
MediaTimeline generate_timeline(const MediaProfile& profile, std::uint64_t seed);

// Single-threaded reference for generate_timeline.
MediaTimeline generate_timeline_serial(const MediaProfile& profile,
                                       std::uint64_t seed);

}  // namespace qoelab::media
