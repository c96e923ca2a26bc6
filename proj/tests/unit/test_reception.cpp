#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "qoelab/common/random.hpp"
#include "qoelab/rtp/reception_stats.hpp"

using namespace qoelab;
using namespace qoelab::rtp;

TEST(Sequence, SingleWrap) {
  ReceptionStatistics s(90000);
  for (std::uint16_t q : {65534, 65535, 0, 1}) s.track_sequence(q);
  EXPECT_EQ(s.extended_highest(), 65537u);
  EXPECT_EQ(s.cycles(), 1u);
  EXPECT_EQ(s.base_seq(), 65534);
}

TEST(Sequence, InOrderNoWrap) {
  ReceptionStatistics s(90000);
  for (int q = 0; q <= 100; ++q) s.track_sequence(static_cast<std::uint16_t>(q));
  EXPECT_EQ(s.extended_highest(), 100u);
  EXPECT_EQ(s.cycles(), 0u);
}

TEST(Sequence, ReorderDoesNotCycle) {
  ReceptionStatistics s(90000);
  for (std::uint16_t q : {10, 12, 11}) s.track_sequence(q);
  EXPECT_EQ(s.extended_highest(), 12u);
  EXPECT_EQ(s.cycles(), 0u);
}

TEST(Sequence, DuplicatesAndLateAcrossWrapDoNotCycle) {
  ReceptionStatistics s(90000);
  for (std::uint16_t q : {65530, 65531, 65531, 2, 65533, 3, 3}) s.track_sequence(q);
  EXPECT_EQ(s.cycles(), 1u);
  EXPECT_EQ(s.extended_highest(), 65536u + 3);
}

// Property: a monotone sent stream with random loss and local reordering
// gives exactly one cycle per true wrap and a non-decreasing extended max.
TEST(SequenceProperty, OneCyclePerWrap) {
  Rng gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto start = static_cast<std::uint16_t>(gen.next_u64());
    const std::size_t count = 50000 + gen.next_u64() % 150000;
    std::vector<std::uint64_t> sent;
    for (std::size_t i = 0; i < count; ++i) {
      if (!gen.bernoulli(0.05)) sent.push_back(start + i);
    }
    for (std::size_t i = 1; i < sent.size(); ++i) {
      if (gen.bernoulli(0.02)) std::swap(sent[i - 1], sent[i]);
    }
    ReceptionStatistics s(90000);
    std::uint32_t last = 0;
    std::uint64_t max_ext = 0;
    for (std::uint64_t ext : sent) {
      s.track_sequence(static_cast<std::uint16_t>(ext));
      ASSERT_GE(s.extended_highest(), last);
      last = s.extended_highest();
      max_ext = std::max(max_ext, ext);
    }
    // Cycles count from the first packet the receiver saw.
    const std::uint64_t base_cycle = sent.front() >> 16;
    ASSERT_EQ(s.cycles(), (max_ext >> 16) - base_cycle);
    ASSERT_EQ(s.extended_highest(), max_ext - (base_cycle << 16));
  }
}

TEST(FractionLost, FixedPointExample) {
  EXPECT_EQ(fraction_lost(256, 192), 64);
  EXPECT_EQ(fraction_lost(100, 100), 0);
  EXPECT_EQ(fraction_lost(100, 103), 0);  // duplicates
  EXPECT_EQ(fraction_lost(100, 0), 255);
  EXPECT_EQ(fraction_lost(0, 0), 0);
  EXPECT_EQ(fraction_lost(3, 2), 85);  // floor(256/3)
}

TEST(Report, NotReadyBeforeFirstPacket) {
  ReceptionStatistics s(90000);
  EXPECT_FALSE(s.build_report(1.0, 5));
}

TEST(Report, NoLoss) {
  ReceptionStatistics s(90000);
  for (int i = 0; i < 50; ++i) s.on_packet(static_cast<std::uint16_t>(i), i * 3600, i * 0.04, 100);
  const auto r = s.build_report(2.0, 5);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->fraction_lost, 0);
  EXPECT_EQ(r->cumulative_lost, 0);
  EXPECT_EQ(r->extended_highest_seq, 49u);
  EXPECT_EQ(r->source_ssrc, 5u);
}

TEST(Report, IntervalCountersReset) {
  ReceptionStatistics s(90000);
  // 256 expected, 192 received: every fourth packet missing.
  for (int i = 0; i < 256; ++i) {
    if (i % 4 != 1) s.on_packet(static_cast<std::uint16_t>(i), 0, 0, 1);
  }
  auto r = s.build_report(1, 1);
  EXPECT_EQ(r->fraction_lost, 64);
  EXPECT_EQ(r->cumulative_lost, 64);
  for (int i = 256; i < 512; ++i) s.on_packet(static_cast<std::uint16_t>(i), 0, 0, 1);
  r = s.build_report(2, 1);
  EXPECT_EQ(r->fraction_lost, 0);
  EXPECT_EQ(r->cumulative_lost, 64);
}

TEST(Report, FinalReportUsesSenderCount) {
  ReceptionStatistics s(90000);
  // Packets 0 and 9 of 0..9 lost; only 1..8 arrive.
  for (int i = 1; i <= 8; ++i) s.on_packet(static_cast<std::uint16_t>(i), 0, 0, 1);
  EXPECT_EQ(s.build_final_report(1, 1, std::nullopt)->cumulative_lost, 0);
  EXPECT_EQ(s.build_final_report(1, 1, 10u)->cumulative_lost, 2);
}

TEST(Report, LastSrFields) {
  ReceptionStatistics s(90000);
  s.on_packet(0, 0, 0, 1);
  s.on_sender_report(0x0000123456780000ULL, 1.0);
  const auto r = s.build_report(1.5, 1);
  EXPECT_EQ(r->last_sr, 0x12345678u);
  EXPECT_EQ(r->delay_since_last_sr, 32768u);
}

TEST(Jitter, ConstantTransitStaysZero) {
  ReceptionStatistics s(90000);
  for (int i = 0; i < 1000; ++i) {
    s.update_jitter(static_cast<std::uint32_t>(i * 3600), 0.05 + i * 0.04);
    ASSERT_EQ(s.jitter_q16(), 0);
  }
}

TEST(Jitter, SingleStepThenDecay) {
  ReceptionStatistics s(90000);
  // Priming packet, then one packet 1600 clock units late, then constant.
  s.update_jitter(0, 0.0);
  const double step = 1600.0;
  s.update_jitter(3600, 0.04 + step / 90000.0);
  double expect = step / 16.0;
  EXPECT_NEAR(s.jitter_q16() / 65536.0, expect, 1.0 / 65536.0);
  EXPECT_EQ(s.jitter(), 100u);
  for (int i = 2; i < 40; ++i) {
    s.update_jitter(static_cast<std::uint32_t>(i * 3600), 0.04 * i + step / 90000.0);
    expect *= 15.0 / 16.0;
    EXPECT_NEAR(s.jitter_q16() / 65536.0, expect, 16.0 / 65536.0) << "packet " << i;
  }
}

TEST(Jitter, TimestampWrapIsTransparent) {
  ReceptionStatistics s(90000);
  const std::uint32_t near = 0xFFFFFFFFu - 1799;
  s.update_jitter(near, 10.0);
  s.update_jitter(near + 3600, 10.04);  // wraps past zero
  EXPECT_LT(s.jitter_q16(), 65536);
}

// Property: the estimator matches an independent double-precision replay of
// the recurrence within one clock unit.
TEST(JitterProperty, MatchesIndependentReplay) {
  Rng gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const double clock = trial % 2 ? 16000.0 : 90000.0;
    const double jitter_s = gen.uniform(0.001, 0.05);
    ReceptionStatistics s(clock);
    double j = 0;
    double prev_transit = 0;
    for (int i = 0; i < 5000; ++i) {
      const double capture = i * 0.02;
      const auto ts = static_cast<std::uint32_t>(std::llround(capture * clock));
      const double arrival = capture + 0.1 + gen.uniform(-jitter_s, jitter_s);
      s.update_jitter(ts, arrival);
      const double transit = arrival * clock - static_cast<double>(ts);
      if (i > 0) j += (std::fabs(transit - prev_transit) - j) / 16.0;
      prev_transit = transit;
      ASSERT_LE(std::fabs(s.jitter_q16() / 65536.0 - j), 1.0) << "trial " << trial << " i " << i;
    }
    EXPECT_LE(std::abs(static_cast<double>(s.jitter()) - std::floor(j)), 1.0);
  }
}
