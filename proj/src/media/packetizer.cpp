#include "qoelab/media/packetizer.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::media {

FragmentHeader read_fragment_header(ByteView payload) {
  if (payload.size() < kFragmentHeaderSize) {
    throw ProtocolError(fmt::format(
        "fragment: payload of {} bytes has no fragment header", payload.size()));
  }
  FragmentHeader h;
  h.frame_index = get_u32(payload, 0);
  h.fragment_index = get_u16(payload, 4);
  h.fragment_count = get_u16(payload, 6);
  h.digest = get_u64(payload, 8);
  if (h.fragment_count == 0 || h.fragment_index >= h.fragment_count) {
    throw ProtocolError(fmt::format("fragment: index {} out of count {}",
                                    h.fragment_index, h.fragment_count));
  }
  return h;
}

std::vector<rtp::RtpPacket> packetize_frame(const Frame& frame, ByteView payload,
                                            std::size_t mtu, std::uint32_t ssrc,
                                            SequenceCursor& cursor) {
  if (mtu < kMinMtu) {
    throw ConfigError(fmt::format("packetizer: mtu {} below minimum {}", mtu, kMinMtu));
  }
  if (payload.size() != frame.size || payload.empty()) {
    throw ConfigError(fmt::format("packetizer: payload has {} bytes, frame says {}",
                                  payload.size(), frame.size));
  }
  const std::size_t capacity = payload_capacity(mtu);
  const std::size_t count = (payload.size() + capacity - 1) / capacity;
  if (count > 0xffff) {
    throw ConfigError("packetizer: frame needs more than 65535 fragments");
  }

  std::vector<rtp::RtpPacket> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t begin = i * capacity;
    const std::size_t end = std::min(payload.size(), begin + capacity);
    rtp::RtpPacket p;
    p.marker = i + 1 == count;
    p.payload_type = rtp::payload_type_for(frame.kind);
    p.sequence = cursor.take();
    p.timestamp = frame.rtp_timestamp;
    p.ssrc = ssrc;
    p.payload.reserve(kFragmentHeaderSize + (end - begin));
    put_u32(p.payload, frame.index);
    put_u16(p.payload, static_cast<std::uint16_t>(i));
    put_u16(p.payload, static_cast<std::uint16_t>(count));
    put_u64(p.payload, frame.payload_digest);
    p.payload.insert(p.payload.end(), payload.begin() + static_cast<std::ptrdiff_t>(begin),
                     payload.begin() + static_cast<std::ptrdiff_t>(end));
    packets.push_back(std::move(p));
  }
  return packets;
}

FrameReassembly reassemble_frame(std::span<const rtp::RtpPacket> fragments) {
  FrameReassembly out;
  if (fragments.empty()) {
    out.degenerate = true;
    return out;
  }

  const auto first = read_fragment_header(fragments.front().payload);
  out.frame_index = first.frame_index;
  out.rtp_timestamp = fragments.front().timestamp;
  out.fragments_expected = first.fragment_count;
  out.expected_digest = first.digest;

  std::vector<const rtp::RtpPacket*> slots(first.fragment_count, nullptr);
  for (const auto& packet : fragments) {
    if (packet.timestamp != out.rtp_timestamp) {
      throw ProtocolError(fmt::format("reassembly: mixed timestamps {} and {}",
                                      out.rtp_timestamp, packet.timestamp));
    }
    const auto h = read_fragment_header(packet.payload);
    if (h.frame_index != first.frame_index ||
        h.fragment_count != first.fragment_count || h.digest != first.digest) {
      throw ProtocolError(fmt::format(
          "reassembly: fragment of frame {} mixed into frame {}", h.frame_index,
          first.frame_index));
    }
    if (h.fragment_index + 1 == h.fragment_count && !packet.marker) {
      throw ProtocolError("reassembly: last fragment lacks the marker bit");
    }
    slots[h.fragment_index] = &packet;
  }

  out.fragments_received = static_cast<std::size_t>(
      std::count_if(slots.begin(), slots.end(), [](auto* p) { return p != nullptr; }));
  out.missing = out.fragments_expected - out.fragments_received;
  if (*out.missing != 0) return out;

  for (const auto* p : slots) {
    out.data.insert(out.data.end(),
                    p->payload.begin() + static_cast<std::ptrdiff_t>(kFragmentHeaderSize),
                    p->payload.end());
  }
  out.status = FrameReassembly::Status::Complete;
  out.digest_ok = payload_digest(out.data) == out.expected_digest;
  return out;
}

}  // namespace qoelab::media
