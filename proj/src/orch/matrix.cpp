#include "qoelab/orch/matrix.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qoelab/common/error.hpp"
#include "qoelab/common/random.hpp"

namespace qoelab::orch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

media::MediaProfile profile_from_json(const json& j) {
  if (j.is_string()) return media::builtin_profile(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("source must be an id or a profile object");
  media::MediaProfile p;
  p.source_id = j.at("source_id").get<std::string>();
  const auto res = media::parse_resolution(j.at("resolution").get<std::string>());
  if (!res) throw ConfigError(fmt::format("source {}: bad resolution", p.source_id));
  p.resolution = *res;
  const auto tier = media::parse_tier(j.at("tier").get<std::string>());
  if (!tier) throw ConfigError(fmt::format("source {}: bad tier", p.source_id));
  p.tier = *tier;
  p.video_bitrate_kbit = j.at("video_bitrate_kbit").get<double>();
  p.video_fps = j.value("video_fps", p.video_fps);
  p.audio_bitrate_kbit = j.value("audio_bitrate_kbit", p.audio_bitrate_kbit);
  p.duration_s = j.value("duration_s", p.duration_s);
  return p;
}

template <typename T>
std::vector<T> axis(const json& root, const char* key, std::vector<T> fallback) {
  if (!root.contains(key)) return fallback;
  const json& a = root.at(key);
  std::vector<T> out;
  if (a.is_array()) {
    for (const auto& v : a) out.push_back(v.get<T>());
  } else {
    out.push_back(a.get<T>());
  }
  return out;
}

std::vector<std::optional<double>> bandwidth_axis(const json& root) {
  if (!root.contains("bandwidth_kbit")) return {std::nullopt};
  const json& a = root.at("bandwidth_kbit");
  std::vector<std::optional<double>> out;
  auto one = [](const json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  if (a.is_array()) {
    for (const auto& v : a) out.push_back(one(v));
  } else {
    out.push_back(one(a));
  }
  return out;
}

}  // namespace

MatrixSpec parse_matrix(std::string_view json_text) {
  try {
    const json root = json::parse(json_text);
    if (!root.is_object()) throw ConfigError("matrix must be a JSON object");
    static const std::set<std::string> known = {
        "sources",   "duration_s",         "plr_percent", "delay_ms",    "jitter_ms",
        "bandwidth_kbit", "latency_ms",    "queue_limit", "impair_return_path",
        "trace",     "master_seed",        "mode",        "udp_base_port"};
    for (const auto& [key, _] : root.items()) {
      if (!known.count(key)) throw ConfigError(fmt::format("unknown matrix key '{}'", key));
    }
    MatrixSpec spec;
    if (!root.contains("sources")) throw ConfigError("matrix needs \"sources\"");
    const json& sources = root.at("sources");
    if (sources.is_string() && sources.get<std::string>() == "all") {
      spec.sources.assign(media::builtin_profiles().begin(), media::builtin_profiles().end());
    } else if (sources.is_array()) {
      for (const auto& s : sources) spec.sources.push_back(profile_from_json(s));
    } else {
      throw ConfigError("\"sources\" must be \"all\" or a list");
    }
    if (root.contains("duration_s")) {
      const double d = root.at("duration_s").get<double>();
      for (auto& p : spec.sources) p.duration_s = d;
    }
    spec.plr_percent = axis<double>(root, "plr_percent", spec.plr_percent);
    spec.delay_ms = axis<double>(root, "delay_ms", spec.delay_ms);
    spec.jitter_ms = axis<double>(root, "jitter_ms", spec.jitter_ms);
    spec.bandwidth_kbit = bandwidth_axis(root);
    spec.latency_ms = axis<double>(root, "latency_ms", spec.latency_ms);
    spec.queue_limit = root.value("queue_limit", spec.queue_limit);
    spec.impair_return_path = root.value("impair_return_path", false);
    spec.trace = root.value("trace", false);
    spec.master_seed = root.value("master_seed", std::uint64_t{0});
    if (root.contains("mode")) spec.mode = parse_mode(root.at("mode").get<std::string>());
    spec.udp_base_port = root.value("udp_base_port", spec.udp_base_port);
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad matrix: {}", e.what()));
  }
}

MatrixSpec load_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read matrix file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str());
}

std::vector<ExperimentConfig> expand_matrix(const MatrixSpec& spec) {
  auto require = [](bool non_empty, const char* name) {
    if (!non_empty) throw ConfigError(fmt::format("matrix axis '{}' is empty", name));
  };
  require(!spec.sources.empty(), "sources");
  require(!spec.plr_percent.empty(), "plr_percent");
  require(!spec.delay_ms.empty(), "delay_ms");
  require(!spec.jitter_ms.empty(), "jitter_ms");
  require(!spec.bandwidth_kbit.empty(), "bandwidth_kbit");
  require(!spec.latency_ms.empty(), "latency_ms");

  std::vector<ExperimentConfig> out;
  std::set<std::string> seen;
  for (const auto& profile : spec.sources) {
    media::validate(profile);
    for (double plr : spec.plr_percent) {
      for (double delay : spec.delay_ms) {
        for (double jitter : spec.jitter_ms) {
          for (const auto& bw : spec.bandwidth_kbit) {
            for (double latency : spec.latency_ms) {
              ExperimentConfig c;
              c.profile = profile;
              c.impairment.plr_percent = plr;
              c.impairment.delay_ms = delay;
              c.impairment.jitter_ms = jitter;
              c.impairment.bandwidth_kbit = bw;
              c.impairment.queue_limit = spec.queue_limit;
              impair::validate(c.impairment);
              if (!(latency >= 0)) throw ConfigError("latency_ms must be >= 0");
              c.latency_ms = latency;
              c.mode = spec.mode;
              c.impair_return_path = spec.impair_return_path;
              c.trace = spec.trace;
              c.topology = rtp::SessionTopology::shifted(spec.udp_base_port);
              c.run_id = encode_filename(c);
              if (!seen.insert(c.run_id).second) {
                throw ConfigError(fmt::format("duplicate run id '{}'", c.run_id));
              }
              c.seed = combine_seed(spec.master_seed, c.run_id);
              c.impairment.seed = c.seed;
              out.push_back(std::move(c));
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

SummaryRow failed_row(const ExperimentConfig& c, std::string error) {
  SummaryRow row;
  row.run_id = c.run_id;
  row.ok = false;
  row.error = std::move(error);
  return row;
}

SummaryRow run_cell(const ExperimentConfig& c, const fs::path& out_dir, bool resume) {
  if (resume) {
    if (auto done = load_completed(out_dir, c.run_id)) return *done;
  }
  try {
    return run_experiment(c, out_dir).summary;
  } catch (const std::exception& e) {
    SummaryRow row = failed_row(c, e.what());
    // Leave a marker so the failure is visible on disk; it never counts as
    // complete, so a resumed matrix retries the cell.
    std::error_code ec;
    fs::create_directories(out_dir / c.run_id, ec);
    std::ofstream(out_dir / c.run_id / std::string(kSummaryFile)) << summary_to_json(row);
    return row;
  }
}

}  // namespace

std::vector<SummaryRow> run_matrix(std::span<const ExperimentConfig> configs,
                                   const fs::path& out_dir, const MatrixOptions& options) {
  fs::create_directories(out_dir);
  std::vector<SummaryRow> rows(configs.size());
  bool any_udp = false;
  for (const auto& c : configs) any_udp = any_udp || c.mode == Mode::Udp;
  const long n = static_cast<long>(configs.size());
  if (options.execution == Execution::Parallel && !any_udp) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) rows[i] = run_cell(configs[i], out_dir, options.resume);
  } else {
    for (long i = 0; i < n; ++i) rows[i] = run_cell(configs[i], out_dir, options.resume);
  }
  return rows;
}

std::string_view summary_header() {
  return "run_id,status,plr_percent,delay_ms,jitter_ms,bandwidth_kbit,latency_ms,"
         "measured_loss_percent,final_jitter,effective_bitrate_kbit,frames_complete,"
         "frames_partial,late_discards,eos_kind";
}

void summarize_matrix(std::span<const SummaryRow> rows, std::ostream& out) {
  out << summary_header() << '\n';
  for (const auto& r : rows) {
    if (!r.ok) {
      out << r.run_id << ",FAILED,,,,,,,,,,,,\n";
      continue;
    }
    out << fmt::format("{},ok,{},{},{},{},{},{:.6f},{},{:.3f},{},{},{},{}\n", r.run_id,
                       format_number(r.plr_percent), format_number(r.delay_ms),
                       format_number(r.jitter_ms),
                       r.bandwidth_kbit ? format_number(*r.bandwidth_kbit) : "NA",
                       format_number(r.latency_ms), r.measured_loss_percent, r.final_jitter,
                       r.effective_bitrate_kbit, r.frames_complete, r.frames_partial,
                       r.late_discards, r.eos_kind);
  }
}

std::vector<SummaryRow> collect_summaries(std::span<const ExperimentConfig> configs,
                                          const fs::path& out_dir) {
  std::vector<SummaryRow> rows;
  for (const auto& c : configs) {
    if (auto done = load_completed(out_dir, c.run_id)) {
      rows.push_back(*done);
    } else {
      rows.push_back(failed_row(c, "no complete summary"));
    }
  }
  return rows;
}

}  // namespace qoelab::orch
