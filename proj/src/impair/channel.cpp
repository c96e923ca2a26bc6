#include "qoelab/impair/channel.hpp"

#include <ostream>

#include <nlohmann/json.hpp>

#include "qoelab/common/error.hpp"

namespace qoelab::impair {

Channel::Channel() : rng_(0) {}

FlowCounters& Channel::counters_for(const std::string& flow) {
  auto it = flows_.find(flow);
  if (it == flows_.end()) it = flows_.emplace(flow, FlowCounters{}).first;
  return it->second;
}

Ticket Channel::enter(std::size_t size_bytes, Seconds now, PacketLabel label) {
  Ticket ticket;
  ticket.id = next_id_++;
  ++totals_.injected;
  ++counters_for(label.flow).injected;

  ticket.hop = netem_ ? netem_apply(now, *netem_, rng_) : Hop::pass(now);
  ticket.needs_shaping = !ticket.hop.dropped() && has_shaper();

  if (tracing_) {
    TraceRecord rec;
    rec.id = ticket.id;
    rec.label = std::move(label);
    rec.size = size_bytes;
    rec.inject_time = now;
    trace_.push_back(std::move(rec));
  } else {
    pending_flow_.push_back(std::move(label.flow));
  }
  if (!ticket.needs_shaping) finish(ticket.id, ticket.hop);
  return ticket;
}

Hop Channel::shape(const Ticket& ticket, std::size_t size_bytes) {
  const Seconds arrival = ticket.hop.time;
  Hop hop = std::visit(
      [&](auto& s) -> Hop {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PipeState>) {
          return pipe_enqueue(size_bytes, arrival, s);
        } else if constexpr (std::is_same_v<T, TokenBucket>) {
          return token_bucket_admit(size_bytes, arrival, s);
        } else {
          return Hop::pass(arrival);
        }
      },
      shaper_);
  if (tracing_) trace_[ticket.id].shaper_arrival = arrival;
  finish(ticket.id, hop);
  return hop;
}

Hop Channel::transmit(std::size_t size_bytes, Seconds now, PacketLabel label) {
  const Ticket t = enter(size_bytes, now, std::move(label));
  return t.needs_shaping ? shape(t, size_bytes) : t.hop;
}

void Channel::finish(std::size_t id, const Hop& hop) {
  const std::string& flow = tracing_ ? trace_[id].label.flow : pending_flow_[id];
  FlowCounters& fc = counters_for(flow);
  switch (hop.drop) {
    case DropReason::None:
      ++totals_.delivered;
      ++fc.delivered;
      break;
    case DropReason::Loss:
      ++totals_.lost;
      ++fc.lost;
      break;
    case DropReason::TailDrop:
      ++totals_.tail_dropped;
      ++fc.tail_dropped;
      break;
  }
  if (tracing_) {
    TraceRecord& rec = trace_[id];
    rec.drop = hop.drop;
    if (!hop.dropped()) rec.deliver_time = hop.time;
    rec.finished = true;
  }
}

FlowCounters Channel::flow(std::string_view name) const {
  auto it = flows_.find(name);
  return it == flows_.end() ? FlowCounters{} : it->second;
}

void Channel::write_trace(std::ostream& out, std::string_view channel_name) const {
  for (const auto& rec : trace_) {
    nlohmann::ordered_json j;
    j["channel"] = channel_name;
    j["id"] = rec.id;
    j["flow"] = rec.label.flow;
    if (rec.label.seq) j["seq"] = *rec.label.seq;
    if (rec.label.timestamp) j["ts"] = *rec.label.timestamp;
    j["size"] = rec.size;
    j["inject"] = rec.inject_time;
    if (rec.shaper_arrival) j["shaper_arrival"] = *rec.shaper_arrival;
    if (!rec.finished) {
      j["stage"] = "in_flight";
    } else if (rec.drop == DropReason::None) {
      j["stage"] = "delivered";
      j["deliver"] = *rec.deliver_time;
    } else {
      j["stage"] = to_string(rec.drop);
    }
    out << j.dump() << '\n';
  }
}

Channel compose_channel(std::span<const StageConfig> stages, std::uint64_t seed) {
  Channel ch;
  ch.rng_ = Rng(seed);
  bool have_delay = false;
  bool have_loss = false;
  bool have_bandwidth = false;
  NetemParams netem;
  for (const auto& stage : stages) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, DelayStage>) {
            if (have_delay) throw ConfigError("channel: duplicate delay stage");
            if (!(s.delay_ms >= 0 && s.jitter_ms >= 0)) {
              throw ConfigError("channel: delay and jitter must be non-negative");
            }
            have_delay = true;
            netem.delay_ms = s.delay_ms;
            netem.jitter_ms = s.jitter_ms;
          } else if constexpr (std::is_same_v<T, LossStage>) {
            if (have_loss) throw ConfigError("channel: duplicate loss stage");
            if (!(s.plr_percent >= 0 && s.plr_percent <= 100)) {
              throw ConfigError("channel: plr outside [0,100]");
            }
            have_loss = true;
            netem.plr_percent = s.plr_percent;
          } else {
            if (have_bandwidth) throw ConfigError("channel: duplicate bandwidth stage");
            have_bandwidth = true;
            if constexpr (std::is_same_v<T, PipeStage>) {
              ch.shaper_.template emplace<PipeState>(s.bandwidth_kbit, s.queue_limit);
            } else {
              ch.shaper_.template emplace<TokenBucket>(s.rate_kbit, s.burst_bytes);
            }
          }
        },
        stage);
  }
  if (have_delay || have_loss) ch.netem_ = netem;
  return ch;
}

Channel make_channel(const ImpairmentConfig& config) {
  validate(config);
  const auto stages = stages_for(config);
  return compose_channel(stages, config.seed);
}

}  // namespace qoelab::impair
