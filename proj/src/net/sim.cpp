#include "qoelab/net/sim.hpp"

#include <memory>
#include <ostream>

#include <fmt/format.h>

#include "qoelab/common/random.hpp"
#include "qoelab/rtp/packet.hpp"

namespace qoelab::net {

void ChannelSet::enable_trace(bool on) {
  for (auto& c : forward) c.enable_trace(on);
  for (auto& c : reverse) c.enable_trace(on);
}

void ChannelSet::write_trace(std::ostream& out) const {
  for (MediaKind k : kAllMedia) {
    forward[index_of(k)].write_trace(out, fmt::format("forward/{}", to_string(k)));
  }
  for (MediaKind k : kAllMedia) {
    reverse[index_of(k)].write_trace(out, fmt::format("reverse/{}", to_string(k)));
  }
}

ChannelSet make_channel_set(const impair::ImpairmentConfig& forward,
                            const std::optional<impair::ImpairmentConfig>& reverse) {
  ChannelSet set;
  for (MediaKind k : kAllMedia) {
    impair::ImpairmentConfig f = forward;
    f.seed = combine_seed(forward.seed, fmt::format("forward/{}", to_string(k)));
    set.forward[index_of(k)] = impair::make_channel(f);
    if (reverse) {
      impair::ImpairmentConfig r = *reverse;
      r.seed = combine_seed(reverse->seed, fmt::format("reverse/{}", to_string(k)));
      set.reverse[index_of(k)] = impair::make_channel(r);
    }
  }
  return set;
}

namespace {

struct Endpoint {
  Actor* actor = nullptr;
  std::string name;
  std::uint64_t generation = 0;
  std::optional<Seconds> armed;
};

class Simulation {
 public:
  Simulation(Actor& sender, Actor& receiver, ChannelSet& channels, VirtualClock& clock,
             const SimOptions& options)
      : clock_(clock),
        options_(options),
        sender_{&sender, "sender", 0, std::nullopt},
        receiver_{&receiver, "receiver", 0, std::nullopt},
        forward_(*this, channels.forward, receiver_),
        reverse_(*this, channels.reverse, sender_) {}

  SimResult run() {
    sender_.actor->start(clock_.now(), forward_);
    receiver_.actor->start(clock_.now(), reverse_);
    rearm(sender_);
    rearm(receiver_);
    while (!(sender_.actor->finished() && receiver_.actor->finished())) {
      if (!clock_.run_next()) {
        throw SimulationDeadlock(fmt::format("simulation stalled at t={:.6f}: {}; {}",
                                             clock_.now(), sender_.actor->status(),
                                             receiver_.actor->status()));
      }
    }
    return SimResult{clock_.now(), clock_.fired()};
  }

 private:
  // Outbound path of one actor, through that direction's channels.
  class Link final : public Transport {
   public:
    Link(Simulation& sim, std::array<impair::Channel, 2>& channels, Endpoint& destination)
        : sim_(sim), channels_(channels), destination_(destination) {}

    void send(MediaKind session, Plane plane, ByteView datagram) override {
      impair::Channel& channel = channels_[index_of(session)];
      impair::PacketLabel label{fmt::format("{}/{}", to_string(session), to_string(plane)),
                                std::nullopt, std::nullopt};
      if (plane == Plane::Rtp && datagram.size() >= rtp::kRtpHeaderSize) {
        label.seq = get_u16(datagram, 2);
        label.timestamp = get_u32(datagram, 4);
      }
      const std::size_t size = datagram.size();
      const impair::Ticket ticket = channel.enter(size, sim_.clock_.now(), std::move(label));
      if (ticket.hop.dropped()) return;
      auto data = std::make_shared<Bytes>(datagram.begin(), datagram.end());
      if (!ticket.needs_shaping) {
        sim_.deliver_at(ticket.hop.time, destination_, session, plane, std::move(data));
        return;
      }
      sim_.clock_.schedule(ticket.hop.time, [this, &channel, ticket, size, session, plane,
                                             data = std::move(data)]() mutable {
        const impair::Hop hop = channel.shape(ticket, size);
        if (!hop.dropped()) sim_.deliver_at(hop.time, destination_, session, plane, std::move(data));
      });
    }

   private:
    Simulation& sim_;
    std::array<impair::Channel, 2>& channels_;
    Endpoint& destination_;
  };

  void deliver_at(Seconds at, Endpoint& dest, MediaKind session, Plane plane,
                  std::shared_ptr<Bytes> data) {
    clock_.schedule(at, [this, &dest, session, plane, data = std::move(data)] {
      if (dest.actor->finished()) return;
      log("deliver", dest, fmt::format("{}/{} {}B", to_string(session), to_string(plane),
                                       data->size()));
      dest.actor->on_datagram(session, plane, *data, clock_.now());
      rearm(dest);
    });
  }

  void rearm(Endpoint& ep) {
    const std::optional<Seconds> want = ep.actor->finished() ? std::nullopt : ep.actor->next_timer();
    if (want == ep.armed) return;
    ep.armed = want;
    const std::uint64_t generation = ++ep.generation;
    if (!want) return;
    clock_.schedule(std::max(*want, clock_.now()), [this, &ep, generation] {
      if (generation != ep.generation) return;
      ep.armed.reset();
      if (ep.actor->finished()) return;
      log("timer", ep, {});
      ep.actor->on_timer(clock_.now());
      rearm(ep);
    });
  }

  void log(std::string_view kind, const Endpoint& ep, std::string_view detail) {
    if (!options_.event_log) return;
    *options_.event_log << fmt::format("{:.9f} {} {} {}\n", clock_.now(), kind, ep.name, detail);
  }

  VirtualClock& clock_;
  const SimOptions& options_;
  Endpoint sender_;
  Endpoint receiver_;
  Link forward_;
  Link reverse_;
};

}  // namespace

SimResult sim_run(Actor& sender, Actor& receiver, ChannelSet& channels, VirtualClock& clock,
                  const SimOptions& options) {
  Simulation sim(sender, receiver, channels, clock, options);
  return sim.run();
}

}  // namespace qoelab::net
