#include <gtest/gtest.h>

#include <sstream>

#include "qoelab/common/random.hpp"
#include "qoelab/net/sim.hpp"
#include "qoelab/net/virtual_clock.hpp"
#include "support.hpp"

using namespace qoelab;
using qoelab::testing::run_sim;
using qoelab::testing::short_profile;

TEST(VirtualClock, TimeOrderThenInsertionOrder) {
  net::VirtualClock clock;
  std::vector<int> fired;
  clock.schedule(2.0, [&] { fired.push_back(3); });
  clock.schedule(1.0, [&] { fired.push_back(1); });
  clock.schedule(1.0, [&] { fired.push_back(2); });
  clock.schedule(2.0, [&] { fired.push_back(4); });
  while (clock.run_next()) {
  }
  EXPECT_EQ(fired, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(clock.now(), 2.0);
  EXPECT_EQ(clock.fired(), 4u);
  EXPECT_THROW(clock.schedule(1.5, [] {}), std::logic_error);
}

TEST(VirtualClock, EventsScheduledWhileFiring) {
  net::VirtualClock clock;
  std::vector<double> times;
  std::function<void()> tick = [&] {
    times.push_back(clock.now());
    if (times.size() < 5) clock.schedule(clock.now() + 0.5, tick);
  };
  clock.schedule(0, tick);
  while (clock.run_next()) {
  }
  EXPECT_EQ(times, (std::vector<double>{0, 0.5, 1.0, 1.5, 2.0}));
}

// Property: whatever the scheduling pattern, fired times never decrease and
// ties fire in insertion order.
TEST(VirtualClockProperty, MonotoneStable) {
  Rng gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    net::VirtualClock clock;
    std::vector<std::pair<double, int>> fired;
    int ordinal = 0;
    for (int i = 0; i < 500; ++i) {
      const double at = static_cast<double>(gen.next_u64() % 50) / 10.0;
      const int id = ordinal++;
      clock.schedule(at, [&fired, at, id] { fired.push_back({at, id}); });
    }
    while (clock.run_next()) {
    }
    for (std::size_t i = 1; i < fired.size(); ++i) {
      ASSERT_LE(fired[i - 1].first, fired[i].first);
      if (fired[i - 1].first == fired[i].first) ASSERT_LT(fired[i - 1].second, fired[i].second);
    }
  }
}

TEST(Sim, ZeroDurationTimelineEndsAfterBye) {
  media::MediaTimeline empty;
  empty.profile = media::builtin_profile("s01");
  auto channels = net::make_channel_set({});
  rtp::Sender sender(empty);
  rtp::Receiver receiver;
  net::VirtualClock clock;
  const auto result = net::sim_run(sender, receiver, channels, clock);
  EXPECT_EQ(receiver.summary().eos, rtp::EosKind::Bye);
  EXPECT_EQ(sender.summary().session(MediaKind::Video).packets, 0u);
  EXPECT_LT(result.end_time, 1.0);
}

TEST(Sim, IdentityTenSecondsEndTime) {
  const auto run = run_sim(short_profile("s05", 10), {}, 1, 0.2);
  // Last capture at 9.98 s, BYE right after, then the jitter buffer latency.
  EXPECT_GE(run->result.end_time, 9.98 + 0.2 - 1e-9);
  EXPECT_LE(run->result.end_time, 10.0 + 0.2 + 0.1);
  EXPECT_EQ(run->receiver->summary().eos, rtp::EosKind::Bye);
}

TEST(Sim, SameSeedGivesIdenticalStatsAndEvents) {
  impair::ImpairmentConfig c;
  c.plr_percent = 3;
  c.delay_ms = 40;
  c.jitter_ms = 15;
  auto once = [&] {
    auto timeline = media::generate_timeline(short_profile("s03", 15), 77);
    impair::ImpairmentConfig cc = c;
    cc.seed = 77;
    auto channels = net::make_channel_set(cc);
    channels.enable_trace(true);
    std::ostringstream stats, events, trace;
    rtp::CsvStatsWriter sink(stats);
    rtp::Sender sender(timeline, {}, &sink);
    rtp::Receiver receiver({}, &sink);
    net::VirtualClock clock;
    net::SimOptions opts;
    opts.event_log = &events;
    net::sim_run(sender, receiver, channels, clock, opts);
    channels.write_trace(trace);
    return std::make_tuple(stats.str(), events.str(), trace.str());
  };
  const auto a = once();
  const auto b = once();
  EXPECT_EQ(std::get<0>(a), std::get<0>(b));
  EXPECT_EQ(std::get<1>(a), std::get<1>(b));
  EXPECT_EQ(std::get<2>(a), std::get<2>(b));
  EXPECT_GT(std::get<1>(a).size(), 1000u);
}

TEST(Sim, ReturnPathIdentityByDefault) {
  impair::ImpairmentConfig c;
  c.plr_percent = 100;
  auto channels = net::make_channel_set(c);
  for (MediaKind k : kAllMedia) {
    EXPECT_FALSE(channels.reverse_for(k).transmit(100, 1.0).dropped());
    EXPECT_TRUE(channels.forward_for(k).transmit(100, 1.0).dropped());
  }
  auto impaired = net::make_channel_set(c, c);
  EXPECT_TRUE(impaired.reverse_for(MediaKind::Video).transmit(100, 1.0).dropped());
}

TEST(Sim, DeadlockIsDiagnosed) {
  class Stuck final : public net::Actor {
   public:
    void start(Seconds, net::Transport&) override {}
    void on_datagram(MediaKind, Plane, ByteView, Seconds) override {}
    void on_timer(Seconds) override {}
    std::optional<Seconds> next_timer() const override { return std::nullopt; }
    bool finished() const override { return false; }
    std::string status() const override { return "stuck-actor waiting"; }
  };
  Stuck a, b;
  auto channels = net::make_channel_set({});
  net::VirtualClock clock;
  try {
    net::sim_run(a, b, channels, clock);
    FAIL() << "expected a deadlock";
  } catch (const net::SimulationDeadlock& e) {
    EXPECT_NE(std::string(e.what()).find("stuck-actor waiting"), std::string::npos);
  }
}

// Property: every configuration terminates, within the analytic bound
// duration + delay + jitter + latency + silence timeout.
TEST(SimProperty, TerminatesWithinBound) {
  Rng gen(2718);
  for (int trial = 0; trial < 25; ++trial) {
    impair::ImpairmentConfig c;
    c.plr_percent = trial == 0 ? 100 : gen.uniform(0, 100);
    c.delay_ms = gen.uniform(0, 300);
    c.jitter_ms = gen.uniform(0, 100);
    if (gen.bernoulli(0.3)) c.bandwidth_kbit = gen.uniform(300, 3000);
    const double latency = gen.uniform(0, 0.5);
    const double duration = 1 + gen.uniform(0, 6);
    const auto run = run_sim(short_profile("s06", duration), c, gen.next_u64(), latency, false);
    ASSERT_TRUE(run->receiver->finished());
    ASSERT_TRUE(run->sender->finished());
    double bound = duration + (c.delay_ms + c.jitter_ms) / 1000.0 + latency + rtp::kSilenceTimeout;
    if (c.bandwidth_kbit) {
      // A pipe narrower than the stream adds its backlog drain time.
      const double queued_bits = c.queue_limit * 1500 * 8.0;
      bound += queued_bits / (*c.bandwidth_kbit * 1000.0);
    }
    ASSERT_LE(run->result.end_time, bound) << "trial " << trial;
  }
}
