#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <unistd.h>

#include "qoelab/common/random.hpp"
#include "qoelab/impair/config.hpp"
#include "qoelab/media/profile.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/net/sim.hpp"
#include "qoelab/rtp/receiver.hpp"
#include "qoelab/rtp/sender.hpp"
#include "qoelab/rtp/stats_sink.hpp"

namespace qoelab::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("qoelab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline media::MediaProfile short_profile(const std::string& id, double seconds) {
  media::MediaProfile p = media::builtin_profile(id);
  p.duration_s = seconds;
  return p;
}

// One closed-world run: timeline, both actors and the four channels.
struct SimRun {
  media::MediaTimeline timeline;
  net::ChannelSet channels;
  rtp::MemoryStatsSink sender_sink;
  rtp::MemoryStatsSink receiver_sink;
  std::unique_ptr<rtp::Sender> sender;
  std::unique_ptr<rtp::Receiver> receiver;
  net::VirtualClock clock;
  net::SimResult result;
};

inline std::unique_ptr<SimRun> run_sim(const media::MediaProfile& profile,
                                       impair::ImpairmentConfig impairment, std::uint64_t seed,
                                       double latency_s = rtp::kDefaultLatency,
                                       bool trace = true) {
  auto run = std::make_unique<SimRun>();
  run->timeline = media::generate_timeline(profile, seed);
  impairment.seed = combine_seed(seed, "channel");
  run->channels = net::make_channel_set(impairment);
  run->channels.enable_trace(trace);
  run->sender = std::make_unique<rtp::Sender>(run->timeline, rtp::SenderOptions{}, &run->sender_sink);
  rtp::ReceiverOptions ro;
  ro.latency = latency_s;
  ro.seed = combine_seed(seed, "receiver");
  run->receiver = std::make_unique<rtp::Receiver>(ro, &run->receiver_sink);
  run->result = net::sim_run(*run->sender, *run->receiver, run->channels, run->clock);
  return run;
}

}  // namespace qoelab::testing
