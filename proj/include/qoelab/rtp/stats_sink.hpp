#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "qoelab/common/types.hpp"
#include "qoelab/rtp/rtcp.hpp"

namespace qoelab::rtp {

enum class ReportDirection { SR, RR, BYE };

std::string_view to_string(ReportDirection d);

// One RTCP event as observed by an actor.
struct StatsRecord {
  Seconds time = 0;
  MediaKind session = MediaKind::Video;
  ReportDirection direction = ReportDirection::SR;
  std::uint32_t ssrc = 0;  // originator of the RTCP packet
  std::optional<SenderInfo> sender;
  std::optional<ReceptionReport> report;
  bool final = false;  // end-of-stream reception report
};

class StatsSink {
 public:
  virtual ~StatsSink() = default;
  virtual void record(const StatsRecord& rec) = 0;
};

// CSV with a fixed header; absent fields are left empty:
//   time,session,direction,ssrc,ntp_time,rtp_time,packet_count,octet_count,
//   source_ssrc,fraction_lost,cumulative_lost,extended_highest_seq,
//   interarrival_jitter,last_sr,delay_since_last_sr,final
class CsvStatsWriter final : public StatsSink {
 public:
  explicit CsvStatsWriter(std::ostream& out);
  void record(const StatsRecord& rec) override;

  static std::string_view header();

 private:
  std::ostream& out_;
};

class MemoryStatsSink final : public StatsSink {
 public:
  void record(const StatsRecord& rec) override { records.push_back(rec); }
  std::vector<StatsRecord> records;
};

}  // namespace qoelab::rtp
