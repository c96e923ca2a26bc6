#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qoelab/orch/experiment.hpp"

namespace qoelab::orch {

// Declarative experiment grid. Every axis must be non-empty.
struct MatrixSpec {
  std::vector<media::MediaProfile> sources;
  std::vector<double> plr_percent{0};
  std::vector<double> delay_ms{0};
  std::vector<double> jitter_ms{0};
  std::vector<std::optional<double>> bandwidth_kbit{std::nullopt};
  std::vector<double> latency_ms{kDefaultLatencyMs};
  std::size_t queue_limit = impair::kDefaultQueueLimit;
  bool impair_return_path = false;
  bool trace = false;
  std::uint64_t master_seed = 0;
  Mode mode = Mode::Sim;
  // Udp mode: video RTP port of the loopback topology.
  std::uint16_t udp_base_port = 5000;
};

// JSON object with keys "sources" ("all", or a list of built-in ids and/or
// profile objects), optional "duration_s" overriding every source,
// "plr_percent", "delay_ms", "jitter_ms", "bandwidth_kbit" (null = no pipe),
// "latency_ms", "queue_limit", "impair_return_path", "trace", "master_seed",
// "mode", "udp_base_port". Throws ConfigError.
MatrixSpec parse_matrix(std::string_view json_text);
MatrixSpec load_matrix(const std::filesystem::path& path);

// Cartesian product, sources outermost then plr, delay, jitter, bandwidth,
// latency. Seeds are combine_seed(master_seed, run_id). Throws ConfigError on
// an empty axis, an invalid value, or a repeated run id.
std::vector<ExperimentConfig> expand_matrix(const MatrixSpec& spec);

enum class Execution { Serial, Parallel };

struct MatrixOptions {
  Execution execution = Execution::Parallel;
  // Skip cells whose summary.json already marks them complete.
  bool resume = true;
};

// Runs every cell; a failing cell yields a failed row instead of stopping
// the matrix. Rows come back in matrix order. Udp cells always run serially
// since they share ports.
std::vector<SummaryRow> run_matrix(std::span<const ExperimentConfig> configs,
                                   const std::filesystem::path& out_dir,
                                   const MatrixOptions& options = {});

// Header plus one row per run, in the given order. Failed rows carry only the
// run id and the failure marker.
void summarize_matrix(std::span<const SummaryRow> rows, std::ostream& out);

std::string_view summary_header();

// Rows for `configs` from out_dir; cells without a complete summary become
// failed rows.
std::vector<SummaryRow> collect_summaries(std::span<const ExperimentConfig> configs,
                                          const std::filesystem::path& out_dir);

}  // namespace qoelab::orch
