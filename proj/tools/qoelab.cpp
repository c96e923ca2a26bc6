// qoelab command line: matrix runs, UDP endpoints, summaries, rating server.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "qoelab/common/error.hpp"
#include "qoelab/media/manifest.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/net/udp.hpp"
#include "qoelab/orch/http_api.hpp"
#include "qoelab/orch/matrix.hpp"
#include "qoelab/orch/ratings.hpp"
#include "qoelab/rtp/receiver.hpp"
#include "qoelab/rtp/sender.hpp"
#include "qoelab/rtp/stats_sink.hpp"

namespace fs = std::filesystem;
using namespace qoelab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_stop{false};
httplib::Server* g_server = nullptr;

void on_signal(int) {
  g_stop = true;
  if (g_server) g_server->stop();
}

struct PortFlags {
  std::uint16_t base = 5000;
  std::optional<std::uint16_t> video_rtp, video_rtcp_send, video_rtcp_return;
  std::optional<std::uint16_t> audio_rtp, audio_rtcp_send, audio_rtcp_return;

  void add(CLI::App* app) {
    app->add_option("--base-port", base, "video RTP port; the rest of the plan shifts with it");
    app->add_option("--video-rtp-port", video_rtp);
    app->add_option("--video-rtcp-send-port", video_rtcp_send);
    app->add_option("--video-rtcp-return-port", video_rtcp_return);
    app->add_option("--audio-rtp-port", audio_rtp);
    app->add_option("--audio-rtcp-send-port", audio_rtcp_send);
    app->add_option("--audio-rtcp-return-port", audio_rtcp_return);
  }

  rtp::SessionTopology topology() const {
    rtp::SessionTopology t = rtp::SessionTopology::shifted(base);
    if (video_rtp) t.video_rtp_port = *video_rtp;
    if (video_rtcp_send) t.video_rtcp_send_port = *video_rtcp_send;
    if (video_rtcp_return) t.video_rtcp_return_port = *video_rtcp_return;
    if (audio_rtp) t.audio_rtp_port = *audio_rtp;
    if (audio_rtcp_send) t.audio_rtcp_send_port = *audio_rtcp_send;
    if (audio_rtcp_return) t.audio_rtcp_return_port = *audio_rtcp_return;
    rtp::validate(t);
    return t;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

int cmd_run(const fs::path& matrix, const fs::path& out, const std::string& mode,
            std::optional<std::uint64_t> seed, bool serial, bool no_resume) {
  orch::MatrixSpec spec = orch::load_matrix(matrix);
  if (!mode.empty()) spec.mode = orch::parse_mode(mode);
  if (seed) spec.master_seed = *seed;
  const auto configs = orch::expand_matrix(spec);
  orch::MatrixOptions options;
  options.execution = serial ? orch::Execution::Serial : orch::Execution::Parallel;
  options.resume = !no_resume;
  const auto rows = orch::run_matrix(configs, out, options);
  std::ostringstream table;
  orch::summarize_matrix(rows, table);
  write_text(out / "summary.csv", table.str());
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.ok) {
      ++failed;
      std::cerr << fmt::format("FAILED {}: {}\n", r.run_id, r.error);
    }
  }
  std::cout << fmt::format("{} runs, {} failed, summary in {}\n", rows.size(), failed,
                           (out / "summary.csv").string());
  return failed ? kExitRuntime : 0;
}

int cmd_summarize(const fs::path& matrix, const fs::path& out, const fs::path& output) {
  const auto configs = orch::expand_matrix(orch::load_matrix(matrix));
  const auto rows = orch::collect_summaries(configs, out);
  std::ostringstream table;
  orch::summarize_matrix(rows, table);
  if (output.empty()) {
    std::cout << table.str();
  } else {
    write_text(output, table.str());
  }
  return 0;
}

int cmd_send(const std::string& source, std::optional<double> duration, std::uint64_t seed,
             const std::string& peer, const PortFlags& ports, std::size_t mtu,
             const fs::path& stats) {
  media::MediaProfile profile = media::builtin_profile(source);
  if (duration) profile.duration_s = *duration;
  const auto timeline = media::generate_timeline(profile, seed);
  std::ostringstream csv;
  rtp::CsvStatsWriter sink(csv);
  rtp::SenderOptions sopts;
  sopts.mtu = mtu;
  sopts.ntp_origin = 2208988800.0 +
                     std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  rtp::Sender sender(timeline, sopts, &sink);
  net::UdpOptions options;
  options.peer = peer;
  options.topology = ports.topology();
  net::udp_run(sender, net::UdpRole::Sender, options, &g_stop);
  if (!stats.empty()) write_text(stats, csv.str());
  const auto& s = sender.summary();
  for (MediaKind k : kAllMedia) {
    std::cout << fmt::format("{}: {} packets, {} payload bytes, {} RR received\n", to_string(k),
                             s.session(k).packets, s.session(k).octets,
                             s.session(k).receiver_reports);
  }
  if (s.aborted) {
    std::cerr << "sender aborted: " << s.abort_reason << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_receive(const std::string& peer, const PortFlags& ports, double latency_ms,
                const fs::path& out) {
  std::ostringstream csv;
  rtp::CsvStatsWriter sink(csv);
  rtp::ReceiverOptions ropts;
  ropts.latency = latency_ms / 1000.0;
  rtp::Receiver receiver(ropts, &sink);
  net::UdpOptions options;
  options.peer = peer;
  options.topology = ports.topology();
  net::udp_run(receiver, net::UdpRole::Receiver, options, &g_stop);
  if (!out.empty()) {
    write_text(out / std::string(orch::kStatsFile), csv.str());
    std::ostringstream manifest;
    media::write_received_manifest(manifest, receiver.received_frames());
    write_text(out / std::string(orch::kReceivedManifestFile), manifest.str());
  }
  const auto& s = receiver.summary();
  for (MediaKind k : kAllMedia) {
    const auto& r = s.session(k);
    std::cout << fmt::format(
        "{}: received {} lost {} jitter {} frames complete {} partial {} late {}\n", to_string(k),
        r.packets_received, r.packets_lost, r.final_jitter, r.frames_complete, r.frames_partial,
        r.late_discards);
  }
  std::cout << "eos: " << rtp::to_string(s.eos) << '\n';
  return 0;
}

int cmd_serve(const std::string& host, int port, const fs::path& dataset, const fs::path& journal) {
  orch::RatingService service(dataset, journal.empty() ? std::nullopt : std::optional(journal));
  auto server = orch::make_http_server(service);
  g_server = server.get();
  std::cout << fmt::format("serving {} playlists from {} on {}:{}\n", service.playlists().size(),
                           dataset.string(), host, port)
            << std::flush;
  if (!server->listen(host, port)) {
    throw TransportError(fmt::format("cannot listen on {}:{}", host, port));
  }
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qoelab: streaming quality testbed"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment matrix");
  fs::path matrix, out;
  std::string mode;
  std::optional<std::uint64_t> master_seed;
  bool serial = false, no_resume = false;
  run->add_option("matrix", matrix, "matrix JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out, "output directory")->required();
  run->add_option("--mode", mode, "sim or udp (overrides the matrix)");
  run->add_option("--seed", master_seed, "master seed (overrides the matrix)");
  run->add_flag("--serial", serial, "run cells one at a time");
  run->add_flag("--no-resume", no_resume, "rerun cells that already completed");

  auto* summarize = app.add_subcommand("summarize", "rebuild the summary table of a matrix");
  fs::path sum_matrix, sum_out, sum_output;
  summarize->add_option("matrix", sum_matrix)->required()->check(CLI::ExistingFile);
  summarize->add_option("-o,--out", sum_out, "matrix output directory")->required();
  summarize->add_option("--output", sum_output, "CSV path (default stdout)");

  auto* send = app.add_subcommand("send", "stream a built-in source over UDP");
  std::string source = "s01", send_peer = "127.0.0.1";
  std::optional<double> duration;
  std::uint64_t send_seed = 1;
  std::size_t mtu = media::kDefaultMtu;
  fs::path send_stats;
  PortFlags send_ports;
  send->add_option("--source", source, "built-in profile id (s01..s06)");
  send->add_option("--duration", duration, "seconds");
  send->add_option("--seed", send_seed);
  send->add_option("--peer", send_peer, "receiver IPv4 address");
  send->add_option("--mtu", mtu);
  send->add_option("--stats", send_stats, "sender-side RTCP CSV");
  send_ports.add(send);

  auto* receive = app.add_subcommand("receive", "receive both sessions over UDP");
  std::string recv_peer = "127.0.0.1";
  double latency_ms = orch::kDefaultLatencyMs;
  fs::path recv_out;
  PortFlags recv_ports;
  receive->add_option("--peer", recv_peer, "sender IPv4 address for receiver reports");
  receive->add_option("--latency", latency_ms, "jitter buffer latency, ms");
  receive->add_option("-o,--out", recv_out, "directory for stats.csv and the manifest");
  recv_ports.add(receive);

  auto* serve = app.add_subcommand("serve", "rating session HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path dataset, journal;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--dataset", dataset, "matrix output directory with playlists/")
      ->required()
      ->check(CLI::ExistingDirectory);
  serve->add_option("--journal", journal, "ratings journal (default <dataset>/ratings.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    if (*run) return cmd_run(matrix, out, mode, master_seed, serial, no_resume);
    if (*summarize) return cmd_summarize(sum_matrix, sum_out, sum_output);
    if (*send) {
      return cmd_send(source, duration, send_seed, send_peer, send_ports, mtu, send_stats);
    }
    if (*receive) return cmd_receive(recv_peer, recv_ports, latency_ms, recv_out);
    if (*serve) return cmd_serve(host, port, dataset, journal);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
