#pragma once

#include <cstdint>

#include "qoelab/common/types.hpp"

namespace qoelab::rtp {

// Port plan of the dual-session pipeline. "send" and "return" are from the
// media sender's point of view: SR/BYE go out on rtcp_send, RR come back on
// rtcp_return.
struct SessionTopology {
  std::uint16_t video_rtp_port = 5000;
  std::uint16_t video_rtcp_send_port = 5001;
  std::uint16_t video_rtcp_return_port = 5005;
  std::uint16_t audio_rtp_port = 5002;
  std::uint16_t audio_rtcp_send_port = 5003;
  std::uint16_t audio_rtcp_return_port = 5007;

  std::uint16_t rtp_port(MediaKind k) const {
    return k == MediaKind::Video ? video_rtp_port : audio_rtp_port;
  }
  std::uint16_t rtcp_send_port(MediaKind k) const {
    return k == MediaKind::Video ? video_rtcp_send_port : audio_rtcp_send_port;
  }
  std::uint16_t rtcp_return_port(MediaKind k) const {
    return k == MediaKind::Video ? video_rtcp_return_port : audio_rtcp_return_port;
  }

  // Same layout shifted so that video RTP lands on `base`.
  static SessionTopology shifted(std::uint16_t base);

  bool operator==(const SessionTopology&) const = default;
};

// Throws ConfigError unless all six ports are distinct and non-zero.
void validate(const SessionTopology& topology);

}  // namespace qoelab::rtp
