#include "qoelab/media/profile.hpp"

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::media {

std::string_view to_string(Resolution r) {
  return r == Resolution::R720p ? "720p" : "1080p";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::HQ: return "HQ";
    case Tier::MQ: return "MQ";
    case Tier::LQ: return "LQ";
  }
  return "?";
}

std::optional<Resolution> parse_resolution(std::string_view text) {
  if (text == "720p") return Resolution::R720p;
  if (text == "1080p") return Resolution::R1080p;
  return std::nullopt;
}

std::optional<Tier> parse_tier(std::string_view text) {
  if (text == "HQ") return Tier::HQ;
  if (text == "MQ") return Tier::MQ;
  if (text == "LQ") return Tier::LQ;
  return std::nullopt;
}

void validate(const MediaProfile& p) {
  if (p.source_id.empty() ||
      p.source_id.find_first_of("_/\\ ") != std::string::npos) {
    throw ConfigError(fmt::format(
        "profile: source_id '{}' must be non-empty without '_', '/' or spaces",
        p.source_id));
  }
  auto positive = [&](double v, std::string_view what) {
    if (!(v > 0)) {
      throw ConfigError(fmt::format("profile {}: {} must be positive, got {}",
                                    p.source_id, what, v));
    }
  };
  positive(p.video_bitrate_kbit, "video_bitrate");
  positive(p.video_fps, "video_fps");
  positive(p.audio_bitrate_kbit, "audio_bitrate");
  positive(p.audio_frame_ms, "audio_frame_ms");
  positive(p.duration_s, "duration");
  if (p.video_clock_rate != kVideoClockRate ||
      p.audio_clock_rate != kAudioClockRate) {
    throw ConfigError(fmt::format(
        "profile {}: clock rates are fixed at 90000/16000 Hz", p.source_id));
  }
  if (p.audio_frame_ms != kAudioFrameMs) {
    throw ConfigError(
        fmt::format("profile {}: audio frames are fixed at 20 ms", p.source_id));
  }
}

const std::array<MediaProfile, 6>& builtin_profiles() {
  // The HQ/MQ/LQ bitrates are testbed defaults; only the 2x3 grid is fixed.
  static const std::array<MediaProfile, 6> profiles = [] {
    auto make = [](const char* id, Resolution r, Tier t, double kbit) {
      MediaProfile p;
      p.source_id = id;
      p.resolution = r;
      p.tier = t;
      p.video_bitrate_kbit = kbit;
      return p;
    };
    return std::array<MediaProfile, 6>{
        make("s01", Resolution::R1080p, Tier::HQ, 8000),
        make("s02", Resolution::R1080p, Tier::MQ, 4000),
        make("s03", Resolution::R1080p, Tier::LQ, 2000),
        make("s04", Resolution::R720p, Tier::HQ, 4000),
        make("s05", Resolution::R720p, Tier::MQ, 2000),
        make("s06", Resolution::R720p, Tier::LQ, 1000),
    };
  }();
  return profiles;
}

MediaProfile builtin_profile(std::string_view source_id) {
  for (const auto& p : builtin_profiles()) {
    if (p.source_id == source_id) return p;
  }
  throw ConfigError(fmt::format("unknown source '{}'", source_id));
}

}  // namespace qoelab::media
