#include "qoelab/orch/experiment.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <future>
#include <sstream>
#include <system_error>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qoelab/common/error.hpp"
#include "qoelab/common/random.hpp"
#include "qoelab/media/manifest.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/net/sim.hpp"
#include "qoelab/net/udp.hpp"
#include "qoelab/rtp/receiver.hpp"
#include "qoelab/rtp/sender.hpp"
#include "qoelab/rtp/stats_sink.hpp"

namespace qoelab::orch {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(Mode mode) { return mode == Mode::Sim ? "sim" : "udp"; }

Mode parse_mode(std::string_view text) {
  if (text == "sim") return Mode::Sim;
  if (text == "udp") return Mode::Udp;
  throw ConfigError(fmt::format("unknown mode '{}' (expected sim or udp)", text));
}

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return std::string(buf, end);
}

NameFields name_fields(const ExperimentConfig& config) {
  return NameFields{config.profile.source_id,     config.profile.resolution,
                    config.profile.tier,          config.impairment.plr_percent,
                    config.impairment.delay_ms,   config.impairment.jitter_ms,
                    config.impairment.bandwidth_kbit, config.latency_ms};
}

std::string encode_filename(const NameFields& f) {
  if (f.source_id.empty() || f.source_id.find('_') != std::string::npos) {
    throw ConfigError(fmt::format("source id '{}' cannot be encoded in a file name", f.source_id));
  }
  return fmt::format("{}_{}_{}_plr{}_del{}_jit{}_bw{}_lat{}", f.source_id,
                     media::to_string(f.resolution), media::to_string(f.tier),
                     format_number(f.plr_percent), format_number(f.delay_ms),
                     format_number(f.jitter_ms),
                     f.bandwidth_kbit ? format_number(*f.bandwidth_kbit) : "NA",
                     format_number(f.latency_ms));
}

std::string encode_filename(const ExperimentConfig& config) {
  return encode_filename(name_fields(config));
}

namespace {

double parse_field(std::string_view token, std::string_view prefix) {
  if (token.substr(0, prefix.size()) != prefix) {
    throw ParseError(fmt::format("expected '{}' field, got token '{}'", prefix, token));
  }
  const std::string_view digits = token.substr(prefix.size());
  double value = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size() ||
      !std::isfinite(value) || value < 0) {
    throw ParseError(fmt::format("bad number in token '{}'", token));
  }
  return value;
}

}  // namespace

NameFields decode_filename(std::string_view name) {
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t cut = name.find('_', start);
    tokens.push_back(name.substr(start, cut - start));
    if (cut == std::string_view::npos) break;
    start = cut + 1;
  }
  if (tokens.size() != 8) {
    throw ParseError(fmt::format("'{}' has {} fields, expected 8", name, tokens.size()));
  }
  NameFields f;
  if (tokens[0].empty()) throw ParseError(fmt::format("empty source id in '{}'", name));
  f.source_id = std::string(tokens[0]);
  const auto res = media::parse_resolution(tokens[1]);
  if (!res) throw ParseError(fmt::format("bad resolution token '{}'", tokens[1]));
  f.resolution = *res;
  const auto tier = media::parse_tier(tokens[2]);
  if (!tier) throw ParseError(fmt::format("bad tier token '{}'", tokens[2]));
  f.tier = *tier;
  f.plr_percent = parse_field(tokens[3], "plr");
  if (f.plr_percent > 100) throw ParseError(fmt::format("bad loss token '{}'", tokens[3]));
  f.delay_ms = parse_field(tokens[4], "del");
  f.jitter_ms = parse_field(tokens[5], "jit");
  if (tokens[6] == "bwNA") {
    f.bandwidth_kbit.reset();
  } else {
    f.bandwidth_kbit = parse_field(tokens[6], "bw");
    if (*f.bandwidth_kbit <= 0) throw ParseError(fmt::format("bad bandwidth token '{}'", tokens[6]));
  }
  f.latency_ms = parse_field(tokens[7], "lat");
  return f;
}

std::string summary_to_json(const SummaryRow& row) {
  ordered_json j;
  j["run_id"] = row.run_id;
  j["status"] = row.ok ? "ok" : "failed";
  if (!row.ok) j["error"] = row.error;
  j["plr_percent"] = row.plr_percent;
  j["delay_ms"] = row.delay_ms;
  j["jitter_ms"] = row.jitter_ms;
  j["bandwidth_kbit"] = row.bandwidth_kbit ? ordered_json(*row.bandwidth_kbit) : ordered_json(nullptr);
  j["latency_ms"] = row.latency_ms;
  j["measured_loss_percent"] = row.measured_loss_percent;
  j["final_jitter"] = row.final_jitter;
  j["effective_bitrate_kbit"] = row.effective_bitrate_kbit;
  j["frames_complete"] = row.frames_complete;
  j["frames_partial"] = row.frames_partial;
  j["late_discards"] = row.late_discards;
  j["eos_kind"] = row.eos_kind;
  j["packets_sent"] = row.packets_sent;
  j["packets_expected"] = row.packets_expected;
  j["packets_lost"] = row.packets_lost;
  j["channel_drops"] = row.channel_drops;
  return j.dump(2) + "\n";
}

SummaryRow summary_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SummaryRow row;
    row.run_id = j.at("run_id").get<std::string>();
    row.ok = j.at("status").get<std::string>() == "ok";
    if (!row.ok) row.error = j.value("error", "");
    row.plr_percent = j.at("plr_percent").get<double>();
    row.delay_ms = j.at("delay_ms").get<double>();
    row.jitter_ms = j.at("jitter_ms").get<double>();
    if (!j.at("bandwidth_kbit").is_null()) row.bandwidth_kbit = j.at("bandwidth_kbit").get<double>();
    row.latency_ms = j.at("latency_ms").get<double>();
    row.measured_loss_percent = j.at("measured_loss_percent").get<double>();
    row.final_jitter = j.at("final_jitter").get<std::uint32_t>();
    row.effective_bitrate_kbit = j.at("effective_bitrate_kbit").get<double>();
    row.frames_complete = j.at("frames_complete").get<std::uint64_t>();
    row.frames_partial = j.at("frames_partial").get<std::uint64_t>();
    row.late_discards = j.at("late_discards").get<std::uint64_t>();
    row.eos_kind = j.at("eos_kind").get<std::string>();
    row.packets_sent = j.at("packets_sent").get<std::uint64_t>();
    row.packets_expected = j.at("packets_expected").get<std::int64_t>();
    row.packets_lost = j.at("packets_lost").get<std::int64_t>();
    row.channel_drops = j.at("channel_drops").get<std::uint64_t>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("bad summary: {}", e.what()));
  }
}

std::optional<SummaryRow> load_completed(const fs::path& out_dir, std::string_view run_id) {
  const fs::path path = out_dir / std::string(run_id) / std::string(kSummaryFile);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    SummaryRow row = summary_from_json(buf.str());
    if (!row.ok || row.run_id != run_id) return std::nullopt;
    return row;
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = fs::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    if (!out.flush()) throw std::runtime_error(fmt::format("write failed: {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

struct Outcome {
  rtp::SenderSummary sender;
  rtp::ReceiverSummary receiver;
  std::vector<media::ReceivedFrame> frames;
  std::uint64_t channel_drops = 0;
  std::string trace;
};

Outcome run_sim(const ExperimentConfig& config, const media::MediaTimeline& timeline,
                rtp::StatsSink& sender_sink, rtp::StatsSink& receiver_sink) {
  impair::ImpairmentConfig forward = config.impairment;
  forward.seed = combine_seed(config.seed, "channel");
  auto channels = net::make_channel_set(
      forward, config.impair_return_path ? std::optional(forward) : std::nullopt);
  channels.enable_trace(config.trace);

  rtp::Sender sender(timeline, {}, &sender_sink);
  rtp::ReceiverOptions ropts;
  ropts.latency = config.latency_ms / 1000.0;
  ropts.seed = combine_seed(config.seed, "receiver");
  rtp::Receiver receiver(ropts, &receiver_sink);
  net::VirtualClock clock;
  net::sim_run(sender, receiver, channels, clock);

  Outcome out{sender.summary(), receiver.summary(), receiver.received_frames(), 0, {}};
  for (MediaKind k : kAllMedia) {
    out.channel_drops += channels.forward_for(k).flow(fmt::format("{}/rtp", to_string(k))).dropped();
  }
  if (config.trace) {
    std::ostringstream trace;
    channels.write_trace(trace);
    out.trace = trace.str();
  }
  return out;
}

Outcome run_udp(const ExperimentConfig& config, const media::MediaTimeline& timeline,
                rtp::StatsSink& sender_sink, rtp::StatsSink& receiver_sink) {
  rtp::Sender sender(timeline, {}, &sender_sink);
  rtp::ReceiverOptions ropts;
  ropts.latency = config.latency_ms / 1000.0;
  ropts.seed = combine_seed(config.seed, "receiver");
  rtp::Receiver receiver(ropts, &receiver_sink);

  net::UdpOptions base;
  base.peer = "127.0.0.1";
  base.bind_address = "127.0.0.1";
  base.topology = config.topology;

  std::promise<void> ready;
  auto ready_future = ready.get_future();
  std::exception_ptr receiver_error;
  net::UdpOptions ropt = base;
  ropt.on_ready = [&ready] { ready.set_value(); };
  std::thread receiver_thread([&] {
    try {
      net::udp_run(receiver, net::UdpRole::Receiver, ropt);
    } catch (...) {
      receiver_error = std::current_exception();
      try {
        ready.set_exception(std::current_exception());
      } catch (const std::future_error&) {
      }
    }
  });
  std::exception_ptr sender_error;
  try {
    ready_future.get();
    net::udp_run(sender, net::UdpRole::Sender, base);
  } catch (...) {
    sender_error = std::current_exception();
  }
  receiver_thread.join();
  if (receiver_error) std::rethrow_exception(receiver_error);
  if (sender_error) std::rethrow_exception(sender_error);
  if (sender.summary().aborted) throw TransportError(sender.summary().abort_reason);
  return Outcome{sender.summary(), receiver.summary(), receiver.received_frames(), 0, {}};
}

SummaryRow summarize(const ExperimentConfig& config, const Outcome& out) {
  SummaryRow row;
  row.run_id = config.run_id;
  row.ok = true;
  row.plr_percent = config.impairment.plr_percent;
  row.delay_ms = config.impairment.delay_ms;
  row.jitter_ms = config.impairment.jitter_ms;
  row.bandwidth_kbit = config.impairment.bandwidth_kbit;
  row.latency_ms = config.latency_ms;

  std::uint64_t payload = 0;
  for (MediaKind k : kAllMedia) {
    const auto& rs = out.receiver.session(k);
    row.packets_sent += out.sender.session(k).packets;
    row.packets_expected += rs.packets_expected;
    row.packets_lost += rs.packets_lost;
    row.frames_complete += rs.frames_complete;
    row.frames_partial += rs.frames_partial;
    row.late_discards += rs.late_discards;
    payload += rs.payload_bytes;
  }
  if (row.packets_expected > 0) {
    row.measured_loss_percent =
        100.0 * static_cast<double>(row.packets_lost) / static_cast<double>(row.packets_expected);
  } else if (row.packets_sent > 0) {
    // Nothing reached the receiver at all.
    row.measured_loss_percent = 100.0;
  }
  row.final_jitter = out.receiver.session(MediaKind::Video).final_jitter;
  row.effective_bitrate_kbit =
      static_cast<double>(payload) * 8.0 / config.profile.duration_s / 1000.0;
  row.eos_kind = std::string(rtp::to_string(out.receiver.eos));
  row.channel_drops = out.channel_drops;
  return row;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  try {
    media::validate(config.profile);
    impair::validate(config.impairment);
    if (config.run_id.empty()) throw ConfigError("empty run id");
    if (!(config.latency_ms >= 0)) throw ConfigError("latency must be >= 0");

    RunArtifacts art;
    art.output_name = config.run_id;
    art.directory = out_dir / config.run_id;
    art.stats_path = art.directory / std::string(kStatsFile);
    art.sender_stats_path = art.directory / std::string(kSenderStatsFile);
    art.received_manifest_path = art.directory / std::string(kReceivedManifestFile);
    art.source_manifest_path = art.directory / std::string(kSourceManifestFile);
    art.summary_path = art.directory / std::string(kSummaryFile);
    fs::create_directories(art.directory);
    fs::remove(art.summary_path);

    const media::MediaTimeline timeline = media::generate_timeline(config.profile, config.seed);
    std::ostringstream stats;
    std::ostringstream sender_stats;
    rtp::CsvStatsWriter receiver_sink(stats);
    rtp::CsvStatsWriter sender_sink(sender_stats);

    const Outcome out = config.mode == Mode::Sim
                            ? run_sim(config, timeline, sender_sink, receiver_sink)
                            : run_udp(config, timeline, sender_sink, receiver_sink);

    write_file(art.stats_path, stats.str());
    write_file(art.sender_stats_path, sender_stats.str());
    if (config.trace && config.mode == Mode::Sim) {
      art.channel_trace_path = art.directory / std::string(kTraceFile);
      write_file(*art.channel_trace_path, out.trace);
    }
    std::ostringstream received;
    media::write_received_manifest(received, out.frames);
    write_file(art.received_manifest_path, received.str());
    std::ostringstream source;
    media::write_timeline_manifest(source, timeline);
    write_file(art.source_manifest_path, source.str());

    art.summary = summarize(config, out);
    write_file(art.summary_path, summary_to_json(art.summary));
    return art;
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", config.run_id, e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", config.run_id, e.what()));
  }
}

}  // namespace qoelab::orch
