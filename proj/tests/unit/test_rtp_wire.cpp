#include <gtest/gtest.h>

#include "qoelab/common/error.hpp"
#include "qoelab/common/random.hpp"
#include "qoelab/rtp/packet.hpp"
#include "qoelab/rtp/rtcp.hpp"

using namespace qoelab;
using namespace qoelab::rtp;

TEST(Rtp, OneBytePayloadIsThirteenBytes) {
  RtpPacket p;
  p.payload = {0x55};
  const Bytes wire = encode_rtp(p);
  ASSERT_EQ(wire.size(), 13u);
  EXPECT_EQ(wire[0], 0x80);  // V=2, no P/X/CC
  EXPECT_EQ(wire[12], 0x55);
}

TEST(Rtp, HeaderLayout) {
  RtpPacket p{true, 96, 0x1234, 0x01020304, 0xa1b2c3d4, {1, 2}};
  const Bytes w = encode_rtp(p);
  EXPECT_EQ(w[1], 0x80 | 96);
  EXPECT_EQ(get_u16(w, 2), 0x1234);
  EXPECT_EQ(get_u32(w, 4), 0x01020304u);
  EXPECT_EQ(get_u32(w, 8), 0xa1b2c3d4u);
  EXPECT_EQ(decode_rtp(w), p);
}

TEST(Rtp, RejectsBadInput) {
  RtpPacket p;
  EXPECT_THROW(encode_rtp(p), ProtocolError);  // empty payload
  p.payload = {1};
  p.payload_type = 128;
  EXPECT_THROW(encode_rtp(p), ProtocolError);

  p.payload_type = 96;
  Bytes w = encode_rtp(p);
  Bytes v1 = w;
  v1[0] = 0x40;  // version 1
  EXPECT_THROW(decode_rtp(v1), ProtocolError);
  EXPECT_THROW(decode_rtp(ByteView(w.data(), 11)), ProtocolError);
  Bytes cc = w;
  cc[0] |= 0x01;
  EXPECT_THROW(decode_rtp(cc), ProtocolError);
}

TEST(Rtp, LooksLikeRtp) {
  RtpPacket p;
  p.payload = {1};
  EXPECT_TRUE(looks_like_rtp(encode_rtp(p)));
  EXPECT_FALSE(looks_like_rtp(encode_rtcp({Bye{{1}}})));
  EXPECT_FALSE(looks_like_rtp(Bytes{0x80}));
}

// Property: decode(encode(p)) == p over randomized fields.
TEST(RtpProperty, EncodeDecodeBijection) {
  Rng gen(1);
  for (int i = 0; i < 20000; ++i) {
    RtpPacket p;
    p.marker = gen.bernoulli(0.5);
    p.payload_type = static_cast<std::uint8_t>(gen.next_u64() % 128);
    p.sequence = static_cast<std::uint16_t>(gen.next_u64());
    p.timestamp = static_cast<std::uint32_t>(gen.next_u64());
    p.ssrc = static_cast<std::uint32_t>(gen.next_u64());
    p.payload.resize(1 + gen.next_u64() % 1500);
    for (auto& b : p.payload) b = static_cast<std::uint8_t>(gen.next_u64());
    const Bytes wire = encode_rtp(p);
    ASSERT_EQ(wire.size(), 12 + p.payload.size());
    ASSERT_EQ(decode_rtp(wire), p);
    ASSERT_EQ(encode_rtp(decode_rtp(wire)), wire);
  }
}

TEST(Rtcp, SenderReportRoundTrip) {
  SenderReport sr;
  sr.ssrc = 7;
  sr.info = {0x0102030405060708ULL, 90000, 250, 500000};
  const Bytes w = encode_rtcp({sr});
  EXPECT_EQ(w.size(), 28u);
  EXPECT_EQ(w[1], kRtcpSenderReport);
  const auto back = decode_rtcp(w);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(std::get<SenderReport>(back[0]), sr);
}

TEST(Rtcp, ReceiverReportWithNegativeCumulativeLoss) {
  ReceiverReport rr;
  rr.ssrc = 9;
  rr.blocks.push_back({11, 64, -3, 65537, 123, 0xaabbccdd, 65536});
  rr.blocks.push_back({12, 0, (1 << 23) - 1, 1, 0, 0, 0});
  rr.blocks.push_back({13, 255, -(1 << 23), 2, 0, 0, 0});
  const Bytes w = encode_rtcp({rr});
  EXPECT_EQ(w.size(), 8u + 3 * 24u);
  EXPECT_EQ(std::get<ReceiverReport>(decode_rtcp(w)[0]), rr);
}

TEST(Rtcp, CompoundSrAndBye) {
  SenderReport sr;
  sr.ssrc = 1;
  sr.info.packet_count = 10;
  const Bye bye{{1}};
  const auto back = decode_rtcp(encode_rtcp({sr, bye}));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(std::get<SenderReport>(back[0]), sr);
  EXPECT_EQ(std::get<Bye>(back[1]), bye);
}

TEST(Rtcp, SkipsUnknownPacketTypes) {
  Bytes w = encode_rtcp({Bye{{5}}});
  // An SDES with no chunks in front of it.
  Bytes sdes{0x80, 202, 0, 0};
  sdes.insert(sdes.end(), w.begin(), w.end());
  const auto back = decode_rtcp(sdes);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(std::get<Bye>(back[0]).ssrcs, std::vector<std::uint32_t>{5});
}

TEST(Rtcp, TruncationAndVersionErrors) {
  SenderReport sr;
  const Bytes w = encode_rtcp({sr});
  EXPECT_THROW(decode_rtcp(ByteView(w.data(), w.size() - 4)), ProtocolError);
  Bytes bad = w;
  bad[0] = 0x40;
  EXPECT_THROW(decode_rtcp(bad), ProtocolError);
  EXPECT_THROW(decode_rtcp(Bytes{0x80, 200}), ProtocolError);
}

// Property: random compounds round-trip.
TEST(RtcpProperty, CompoundRoundTrip) {
  Rng gen(8);
  for (int i = 0; i < 2000; ++i) {
    std::vector<RtcpPacket> compound;
    const int n = 1 + static_cast<int>(gen.next_u64() % 3);
    for (int k = 0; k < n; ++k) {
      auto block = [&] {
        ReceptionReport b;
        b.source_ssrc = static_cast<std::uint32_t>(gen.next_u64());
        b.fraction_lost = static_cast<std::uint8_t>(gen.next_u64());
        b.cumulative_lost = static_cast<std::int32_t>(gen.next_u64() % (1 << 24)) - (1 << 23);
        b.extended_highest_seq = static_cast<std::uint32_t>(gen.next_u64());
        b.interarrival_jitter = static_cast<std::uint32_t>(gen.next_u64());
        b.last_sr = static_cast<std::uint32_t>(gen.next_u64());
        b.delay_since_last_sr = static_cast<std::uint32_t>(gen.next_u64());
        return b;
      };
      switch (gen.next_u64() % 3) {
        case 0: {
          SenderReport sr;
          sr.ssrc = static_cast<std::uint32_t>(gen.next_u64());
          sr.info = {gen.next_u64(), static_cast<std::uint32_t>(gen.next_u64()),
                     static_cast<std::uint32_t>(gen.next_u64()),
                     static_cast<std::uint32_t>(gen.next_u64())};
          for (std::uint64_t b = gen.next_u64() % 3; b > 0; --b) sr.blocks.push_back(block());
          compound.emplace_back(sr);
          break;
        }
        case 1: {
          ReceiverReport rr;
          rr.ssrc = static_cast<std::uint32_t>(gen.next_u64());
          for (std::uint64_t b = gen.next_u64() % 4; b > 0; --b) rr.blocks.push_back(block());
          compound.emplace_back(rr);
          break;
        }
        default: {
          Bye bye;
          for (std::uint64_t b = 1 + gen.next_u64() % 3; b > 0; --b) {
            bye.ssrcs.push_back(static_cast<std::uint32_t>(gen.next_u64()));
          }
          compound.emplace_back(bye);
        }
      }
    }
    ASSERT_EQ(decode_rtcp(encode_rtcp(compound)), compound);
  }
}

TEST(Rtcp, NtpConversion) {
  EXPECT_EQ(ntp_from_seconds(1.5), (1ULL << 32) + (1ULL << 31));
  EXPECT_EQ(ntp_middle32(0x0000123456780000ULL), 0x12345678u);
}
