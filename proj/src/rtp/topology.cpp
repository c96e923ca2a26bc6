#include "qoelab/rtp/topology.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::rtp {

SessionTopology SessionTopology::shifted(std::uint16_t base) {
  if (base > 65535 - 7) throw ConfigError(fmt::format("topology: base port {} too high", base));
  SessionTopology t;
  const int offset = base - t.video_rtp_port;
  auto shift = [offset](std::uint16_t p) { return static_cast<std::uint16_t>(p + offset); };
  t.video_rtp_port = shift(t.video_rtp_port);
  t.video_rtcp_send_port = shift(t.video_rtcp_send_port);
  t.video_rtcp_return_port = shift(t.video_rtcp_return_port);
  t.audio_rtp_port = shift(t.audio_rtp_port);
  t.audio_rtcp_send_port = shift(t.audio_rtcp_send_port);
  t.audio_rtcp_return_port = shift(t.audio_rtcp_return_port);
  return t;
}

void validate(const SessionTopology& t) {
  std::array<std::uint16_t, 6> ports{t.video_rtp_port,      t.video_rtcp_send_port,
                                     t.video_rtcp_return_port, t.audio_rtp_port,
                                     t.audio_rtcp_send_port,  t.audio_rtcp_return_port};
  if (std::find(ports.begin(), ports.end(), 0) != ports.end()) {
    throw ConfigError("topology: port 0 is not allowed");
  }
  std::sort(ports.begin(), ports.end());
  if (std::adjacent_find(ports.begin(), ports.end()) != ports.end()) {
    throw ConfigError("topology: session ports must be pairwise distinct");
  }
}

}  // namespace qoelab::rtp
