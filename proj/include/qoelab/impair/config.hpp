#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace qoelab::impair {

inline constexpr std::size_t kDefaultQueueLimit = 50;

// One experiment cell's network condition. Units follow the tc/ipfw command
// lines: percent, milliseconds, kbit/s.
struct ImpairmentConfig {
  double plr_percent = 0;
  double delay_ms = 0;
  double jitter_ms = 0;
  std::optional<double> bandwidth_kbit;
  std::size_t queue_limit = kDefaultQueueLimit;
  std::uint64_t seed = 0;

  bool operator==(const ImpairmentConfig&) const = default;
};

// Throws ConfigError.
void validate(const ImpairmentConfig& config);

struct DelayStage {
  double delay_ms = 0;
  double jitter_ms = 0;
};

struct LossStage {
  double plr_percent = 0;
};

// Fixed-rate link with a bounded FIFO.
struct PipeStage {
  double bandwidth_kbit = 0;
  std::size_t queue_limit = kDefaultQueueLimit;
};

// Shaper: delays, never drops.
struct TokenBucketStage {
  double rate_kbit = 0;
  std::size_t burst_bytes = 0;
};

using StageConfig = std::variant<DelayStage, LossStage, PipeStage, TokenBucketStage>;

// delay/jitter, loss, then the pipe when bandwidth is set.
std::vector<StageConfig> stages_for(const ImpairmentConfig& config);

enum class DropReason { None, Loss, TailDrop };

std::string_view to_string(DropReason reason);

// Result of one stage: either dropped, or the instant the packet leaves it.
struct Hop {
  DropReason drop = DropReason::None;
  double time = 0;

  bool dropped() const { return drop != DropReason::None; }
  static Hop pass(double t) { return Hop{DropReason::None, t}; }
  static Hop dropped_by(DropReason r, double t) { return Hop{r, t}; }
};

}  // namespace qoelab::impair
