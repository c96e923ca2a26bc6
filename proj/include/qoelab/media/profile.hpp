#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace qoelab::media {

enum class Resolution { R720p, R1080p };
enum class Tier { HQ, MQ, LQ };

std::string_view to_string(Resolution r);
std::string_view to_string(Tier t);
std::optional<Resolution> parse_resolution(std::string_view text);
std::optional<Tier> parse_tier(std::string_view text);

inline constexpr double kVideoClockRate = 90000.0;
inline constexpr double kAudioClockRate = 16000.0;
inline constexpr double kAudioFrameMs = 20.0;

// One pre-encoded source. Bitrates are in kbit/s, duration in seconds.
struct MediaProfile {
  std::string source_id;
  Resolution resolution = Resolution::R720p;
  Tier tier = Tier::HQ;
  double video_bitrate_kbit = 0;
  double video_fps = 25;
  double video_clock_rate = kVideoClockRate;
  double audio_bitrate_kbit = 24;
  double audio_clock_rate = kAudioClockRate;
  double audio_frame_ms = kAudioFrameMs;
  double duration_s = 60;

  bool operator==(const MediaProfile&) const = default;
};

// Throws ConfigError on non-positive rates, wrong clock rates, or a
// source_id that would break the artifact filename convention.
void validate(const MediaProfile& profile);

// Two resolutions by three quality tiers, s01..s06.
const std::array<MediaProfile, 6>& builtin_profiles();

// Throws ConfigError for unknown ids.
MediaProfile builtin_profile(std::string_view source_id);

}  // namespace qoelab::media
