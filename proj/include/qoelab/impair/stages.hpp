#pragma once

#include <cstddef>
#include <deque>

#include "qoelab/common/random.hpp"
#include "qoelab/common/types.hpp"
#include "qoelab/impair/config.hpp"

namespace qoelab::impair {

struct NetemParams {
  double delay_ms = 0;
  double jitter_ms = 0;
  double plr_percent = 0;
};

// Delay stage then loss stage, as the parent/child qdisc pair. Always draws
// twice from rng, jitter first, so decision streams line up across configs.
// Jitter is uniform on [-jitter, +jitter]; exit time never precedes `now`.
Hop netem_apply(Seconds now, const NetemParams& params, Rng& rng);
Hop netem_apply(Seconds now, const ImpairmentConfig& config, Rng& rng);

class PipeState {
 public:
  // Throws ConfigError on non-positive bandwidth or zero queue_limit.
  PipeState(double bandwidth_kbit, std::size_t queue_limit);

  double bandwidth_kbit() const { return bandwidth_kbit_; }
  std::size_t queue_limit() const { return queue_limit_; }
  Seconds link_free_at() const { return link_free_at_; }
  // Packets whose transmission has not finished by `at`.
  std::size_t occupancy(Seconds at);

 private:
  friend Hop pipe_enqueue(std::size_t, Seconds, PipeState&);

  double bandwidth_kbit_;
  std::size_t queue_limit_;
  std::deque<Seconds> pending_;  // departure times, FIFO
  Seconds link_free_at_ = 0;
};

// Departure = max(arrival, link_free_at) + size_bits / bandwidth; tail drop
// when queue_limit packets are still waiting or in transmission. Arrivals
// must be presented in non-decreasing time order.
Hop pipe_enqueue(std::size_t size_bytes, Seconds arrival, PipeState& state);

class TokenBucket {
 public:
  // Starts full. Throws ConfigError unless rate > 0 and burst > 0.
  TokenBucket(double rate_kbit, std::size_t burst_bytes);

  double rate_kbit() const { return rate_kbit_; }
  std::size_t burst_bytes() const { return burst_bytes_; }
  // Token level after the most recent admission.
  double tokens() const { return tokens_; }

 private:
  friend Hop token_bucket_admit(std::size_t, Seconds, TokenBucket&);

  double rate_kbit_;
  std::size_t burst_bytes_;
  double tokens_;
  Seconds updated_at_ = 0;
  Seconds last_pass_ = 0;
};

// FIFO shaping: a packet leaves once it is at the head and enough tokens have
// accrued. Throws ConfigError if the packet exceeds the burst size.
Hop token_bucket_admit(std::size_t size_bytes, Seconds now, TokenBucket& bucket);

}  // namespace qoelab::impair
