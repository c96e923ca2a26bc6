#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qoelab/impair/config.hpp"
#include "qoelab/media/profile.hpp"
#include "qoelab/rtp/topology.hpp"

namespace qoelab::orch {

enum class Mode { Sim, Udp };

std::string_view to_string(Mode mode);
// Accepts "sim" and "udp". Throws ConfigError otherwise.
Mode parse_mode(std::string_view text);

inline constexpr double kDefaultLatencyMs = 200;

// One matrix cell.
struct ExperimentConfig {
  media::MediaProfile profile;
  impair::ImpairmentConfig impairment;
  double latency_ms = kDefaultLatencyMs;
  Mode mode = Mode::Sim;
  std::string run_id;
  // Seeds the timeline, SSRCs and channels.
  std::uint64_t seed = 0;
  // Apply `impairment` to the RTCP return path as well.
  bool impair_return_path = false;
  bool trace = false;
  // Udp mode only; both actors run in-process on loopback.
  rtp::SessionTopology topology;
};

// The fields carried by an artifact name.
struct NameFields {
  std::string source_id;
  media::Resolution resolution = media::Resolution::R720p;
  media::Tier tier = media::Tier::HQ;
  double plr_percent = 0;
  double delay_ms = 0;
  double jitter_ms = 0;
  std::optional<double> bandwidth_kbit;
  double latency_ms = kDefaultLatencyMs;

  bool operator==(const NameFields&) const = default;
};

NameFields name_fields(const ExperimentConfig& config);

// {source}_{resolution}_{tier}_plr{p}_del{d}_jit{j}_bw{b|NA}_lat{l}, numbers
// in shortest round-trip form with '.' as separator.
std::string encode_filename(const NameFields& fields);
std::string encode_filename(const ExperimentConfig& config);

// Throws ParseError naming the offending token.
NameFields decode_filename(std::string_view name);

// Locale-independent shortest round-trip rendering.
std::string format_number(double value);

struct SummaryRow {
  std::string run_id;
  bool ok = false;
  std::string error;  // set when !ok
  double plr_percent = 0;
  double delay_ms = 0;
  double jitter_ms = 0;
  std::optional<double> bandwidth_kbit;
  double latency_ms = 0;
  double measured_loss_percent = 0;
  std::uint32_t final_jitter = 0;  // video session, clock units
  double effective_bitrate_kbit = 0;
  std::uint64_t frames_complete = 0;
  std::uint64_t frames_partial = 0;
  std::uint64_t late_discards = 0;
  std::string eos_kind;  // "BYE" or "timeout"
  // Not in the summary table; kept in summary.json.
  std::uint64_t packets_sent = 0;
  std::int64_t packets_expected = 0;
  std::int64_t packets_lost = 0;
  std::uint64_t channel_drops = 0;  // forward RTP, simulation only

  bool operator==(const SummaryRow&) const = default;
};

struct RunArtifacts {
  std::string output_name;
  std::filesystem::path directory;
  std::filesystem::path stats_path;
  std::filesystem::path sender_stats_path;
  std::optional<std::filesystem::path> channel_trace_path;
  std::filesystem::path received_manifest_path;
  std::filesystem::path source_manifest_path;
  std::filesystem::path summary_path;
  SummaryRow summary;
};

inline constexpr std::string_view kStatsFile = "stats.csv";
inline constexpr std::string_view kSenderStatsFile = "sender_stats.csv";
inline constexpr std::string_view kTraceFile = "channel_trace.jsonl";
inline constexpr std::string_view kReceivedManifestFile = "received_manifest.jsonl";
inline constexpr std::string_view kSourceManifestFile = "source_manifest.jsonl";
// Written last; its presence marks a complete run.
inline constexpr std::string_view kSummaryFile = "summary.json";

// Runs one cell and writes its artifacts under out_dir/run_id. Substrate
// failures are rethrown with the run id prepended.
RunArtifacts run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

std::string summary_to_json(const SummaryRow& row);
// Throws ParseError.
SummaryRow summary_from_json(std::string_view text);

// The summary of a completed run, if out_dir/run_id holds one.
std::optional<SummaryRow> load_completed(const std::filesystem::path& out_dir,
                                         std::string_view run_id);

}  // namespace qoelab::orch
