#include "qoelab/rtp/jitter_buffer.hpp"

namespace qoelab::rtp {

JitterBuffer::JitterBuffer(Seconds latency) : latency_(latency < 0 ? 0 : latency) {}

std::int64_t JitterBuffer::extend(std::uint16_t seq) {
  if (!reference_) {
    reference_ = seq;
    return seq;
  }
  const auto delta = static_cast<std::int16_t>(
      static_cast<std::uint16_t>(seq - static_cast<std::uint16_t>(*reference_)));
  const std::int64_t ext = *reference_ + delta;
  if (ext > *reference_) reference_ = ext;
  return ext;
}

bool JitterBuffer::push(RtpPacket packet, Seconds arrival) {
  const std::int64_t ext = extend(packet.sequence);
  if (last_released_ && ext <= *last_released_) {
    ++late_;
    return false;
  }
  if (held_.contains(ext)) {
    ++duplicates_;
    return false;
  }
  const auto [it, inserted] = first_arrival_.try_emplace(packet.timestamp, arrival);
  if (inserted) arrival_order_.emplace_back(arrival, packet.timestamp);
  const Seconds deadline = it->second + latency_;
  deadlines_.insert(deadline);
  held_.emplace(ext, Held{std::move(packet), deadline});
  return true;
}

void JitterBuffer::release_head(std::vector<RtpPacket>& out) {
  auto head = held_.begin();
  deadlines_.erase(deadlines_.find(head->second.deadline));
  last_released_ = head->first;
  out.push_back(std::move(head->second.packet));
  held_.erase(head);
}

std::vector<RtpPacket> JitterBuffer::drain(Seconds now) {
  std::vector<RtpPacket> out;
  while (!held_.empty()) {
    const bool contiguous = last_released_ && held_.begin()->first == *last_released_ + 1;
    // Any overdue packet forces out everything sequenced before it.
    const bool overdue = *deadlines_.begin() <= now;
    if (!contiguous && !overdue) break;
    release_head(out);
  }
  // Timestamps whose release window closed long ago are no longer needed.
  while (!arrival_order_.empty() && arrival_order_.front().first + latency_ + 10.0 < now) {
    const auto [at, ts] = arrival_order_.front();
    if (auto it = first_arrival_.find(ts); it != first_arrival_.end() && it->second == at) {
      first_arrival_.erase(it);
    }
    arrival_order_.pop_front();
  }
  return out;
}

std::vector<RtpPacket> JitterBuffer::flush() {
  std::vector<RtpPacket> out;
  while (!held_.empty()) release_head(out);
  return out;
}

std::optional<Seconds> JitterBuffer::next_deadline() const {
  if (deadlines_.empty()) return std::nullopt;
  return *deadlines_.begin();
}

}  // namespace qoelab::rtp
