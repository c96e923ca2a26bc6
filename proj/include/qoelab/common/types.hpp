#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace qoelab {

// Simulation and wall-clock instants are carried as seconds since run start.
using Seconds = double;

// One RTP session per media kind; Video is session 0, Audio session 1.
enum class MediaKind : std::uint8_t { Video = 0, Audio = 1 };

inline constexpr std::array<MediaKind, 2> kAllMedia{MediaKind::Video,
                                                   MediaKind::Audio};

constexpr std::size_t index_of(MediaKind kind) {
  return static_cast<std::size_t>(kind);
}

constexpr std::string_view to_string(MediaKind kind) {
  return kind == MediaKind::Video ? "video" : "audio";
}

// Which half of a session a datagram belongs to.
enum class Plane : std::uint8_t { Rtp, Rtcp };

constexpr std::string_view to_string(Plane plane) {
  return plane == Plane::Rtp ? "rtp" : "rtcp";
}

}  // namespace qoelab
