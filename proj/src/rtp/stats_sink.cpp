#include "qoelab/rtp/stats_sink.hpp"

#include <ostream>

#include <fmt/format.h>

namespace qoelab::rtp {

std::string_view to_string(ReportDirection d) {
  switch (d) {
    case ReportDirection::SR: return "SR";
    case ReportDirection::RR: return "RR";
    case ReportDirection::BYE: return "BYE";
  }
  return "?";
}

CsvStatsWriter::CsvStatsWriter(std::ostream& out) : out_(out) { out_ << header() << '\n'; }

std::string_view CsvStatsWriter::header() {
  return "time,session,direction,ssrc,ntp_time,rtp_time,packet_count,octet_count,"
         "source_ssrc,fraction_lost,cumulative_lost,extended_highest_seq,"
         "interarrival_jitter,last_sr,delay_since_last_sr,final";
}

void CsvStatsWriter::record(const StatsRecord& rec) {
  std::string line = fmt::format("{:.6f},{},{},{}", rec.time, to_string(rec.session),
                                 to_string(rec.direction), rec.ssrc);
  if (rec.sender) {
    const auto& s = *rec.sender;
    line += fmt::format(",{},{},{},{}", s.ntp_time, s.rtp_time, s.packet_count, s.octet_count);
  } else {
    line += ",,,,";
  }
  if (rec.report) {
    const auto& r = *rec.report;
    line += fmt::format(",{},{},{},{},{},{},{}", r.source_ssrc, r.fraction_lost,
                        r.cumulative_lost, r.extended_highest_seq, r.interarrival_jitter,
                        r.last_sr, r.delay_since_last_sr);
  } else {
    line += ",,,,,,,";
  }
  line += rec.final ? ",1" : ",0";
  out_ << line << '\n';
}

}  // namespace qoelab::rtp
