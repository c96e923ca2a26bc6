#include "qoelab/impair/stages.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qoelab/common/error.hpp"

namespace qoelab::impair {

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::None: return "none";
    case DropReason::Loss: return "loss";
    case DropReason::TailDrop: return "tail_drop";
  }
  return "?";
}

void validate(const ImpairmentConfig& c) {
  if (!(c.plr_percent >= 0 && c.plr_percent <= 100)) {
    throw ConfigError(fmt::format("impairment: plr {} outside [0,100]", c.plr_percent));
  }
  if (!(c.delay_ms >= 0)) {
    throw ConfigError(fmt::format("impairment: delay {} ms is negative", c.delay_ms));
  }
  if (!(c.jitter_ms >= 0)) {
    throw ConfigError(fmt::format("impairment: jitter {} ms is negative", c.jitter_ms));
  }
  if (c.bandwidth_kbit && !(*c.bandwidth_kbit > 0)) {
    throw ConfigError(
        fmt::format("impairment: bandwidth {} kbit/s must be positive", *c.bandwidth_kbit));
  }
  if (c.bandwidth_kbit && c.queue_limit == 0) {
    throw ConfigError("impairment: queue_limit must be at least 1 packet");
  }
}

std::vector<StageConfig> stages_for(const ImpairmentConfig& c) {
  std::vector<StageConfig> stages{DelayStage{c.delay_ms, c.jitter_ms},
                                  LossStage{c.plr_percent}};
  if (c.bandwidth_kbit) stages.emplace_back(PipeStage{*c.bandwidth_kbit, c.queue_limit});
  return stages;
}

Hop netem_apply(Seconds now, const NetemParams& params, Rng& rng) {
  const double jitter_s = params.jitter_ms / 1000.0;
  const double offset = rng.uniform(-jitter_s, jitter_s);
  const bool lost = rng.uniform01() * 100.0 < params.plr_percent;
  if (lost) return Hop::dropped_by(DropReason::Loss, now);
  return Hop::pass(std::max(now, now + params.delay_ms / 1000.0 + offset));
}

Hop netem_apply(Seconds now, const ImpairmentConfig& config, Rng& rng) {
  return netem_apply(now, NetemParams{config.delay_ms, config.jitter_ms, config.plr_percent},
                     rng);
}

PipeState::PipeState(double bandwidth_kbit, std::size_t queue_limit)
    : bandwidth_kbit_(bandwidth_kbit), queue_limit_(queue_limit) {
  if (!(bandwidth_kbit > 0)) {
    throw ConfigError(fmt::format("pipe: bandwidth {} kbit/s must be positive", bandwidth_kbit));
  }
  if (queue_limit == 0) throw ConfigError("pipe: queue_limit must be at least 1");
}

std::size_t PipeState::occupancy(Seconds at) {
  while (!pending_.empty() && pending_.front() <= at) pending_.pop_front();
  return pending_.size();
}

Hop pipe_enqueue(std::size_t size_bytes, Seconds arrival, PipeState& state) {
  if (state.occupancy(arrival) >= state.queue_limit_) {
    return Hop::dropped_by(DropReason::TailDrop, arrival);
  }
  const double tx = static_cast<double>(size_bytes) * 8.0 / (state.bandwidth_kbit_ * 1000.0);
  const Seconds departure = std::max(arrival, state.link_free_at_) + tx;
  state.link_free_at_ = departure;
  state.pending_.push_back(departure);
  return Hop::pass(departure);
}

TokenBucket::TokenBucket(double rate_kbit, std::size_t burst_bytes)
    : rate_kbit_(rate_kbit),
      burst_bytes_(burst_bytes),
      tokens_(static_cast<double>(burst_bytes)) {
  if (!(rate_kbit > 0)) {
    throw ConfigError(fmt::format("token bucket: rate {} kbit/s must be positive", rate_kbit));
  }
  if (burst_bytes == 0) throw ConfigError("token bucket: burst must be positive");
}

Hop token_bucket_admit(std::size_t size_bytes, Seconds now, TokenBucket& b) {
  if (size_bytes > b.burst_bytes_) {
    throw ConfigError(fmt::format("token bucket: {} byte packet exceeds {} byte burst",
                                  size_bytes, b.burst_bytes_));
  }
  const double bytes_per_s = b.rate_kbit_ * 1000.0 / 8.0;
  const Seconds head = std::max(now, b.last_pass_);
  b.tokens_ = std::min(static_cast<double>(b.burst_bytes_),
                       b.tokens_ + bytes_per_s * (head - b.updated_at_));
  b.updated_at_ = head;
  const auto size = static_cast<double>(size_bytes);
  if (b.tokens_ >= size) {
    b.tokens_ -= size;
    b.last_pass_ = head;
    return Hop::pass(head);
  }
  const Seconds pass_at = head + (size - b.tokens_) / bytes_per_s;
  b.tokens_ = 0;
  b.updated_at_ = pass_at;
  b.last_pass_ = pass_at;
  return Hop::pass(pass_at);
}

}  // namespace qoelab::impair
