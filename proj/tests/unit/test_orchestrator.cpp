#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qoelab/common/random.hpp"
#include "qoelab/common/error.hpp"
#include "qoelab/orch/experiment.hpp"
#include "qoelab/orch/matrix.hpp"
#include "support.hpp"

using namespace qoelab;
using namespace qoelab::orch;
using qoelab::testing::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ExperimentConfig cell(const std::string& source, double seconds, double plr) {
  MatrixSpec spec;
  spec.sources = {media::builtin_profile(source)};
  spec.sources[0].duration_s = seconds;
  spec.plr_percent = {plr};
  spec.master_seed = 5;
  spec.trace = true;
  return expand_matrix(spec).front();
}

}  // namespace

TEST(Filename, StatedExample) {
  NameFields f;
  f.source_id = "s01";
  f.resolution = media::Resolution::R1080p;
  f.tier = media::Tier::HQ;
  f.plr_percent = 0.5;
  f.latency_ms = 200;
  EXPECT_EQ(encode_filename(f), "s01_1080p_HQ_plr0.5_del0_jit0_bwNA_lat200");
  EXPECT_EQ(decode_filename("s01_1080p_HQ_plr0.5_del0_jit0_bwNA_lat200"), f);
}

TEST(Filename, BandwidthAndFractions) {
  NameFields f;
  f.source_id = "clip9";
  f.plr_percent = 0.1;
  f.delay_ms = 12.25;
  f.jitter_ms = 3;
  f.bandwidth_kbit = 1000;
  f.latency_ms = 0;
  const std::string name = encode_filename(f);
  EXPECT_EQ(name, "clip9_720p_HQ_plr0.1_del12.25_jit3_bw1000_lat0");
  EXPECT_EQ(decode_filename(name), f);
}

TEST(Filename, GarbageIsParseError) {
  EXPECT_THROW(decode_filename("garbage"), ParseError);
  EXPECT_THROW(decode_filename(""), ParseError);
  try {
    decode_filename("s01_1080p_HQ_plrX_del0_jit0_bwNA_lat200");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("plrX"), std::string::npos);
  }
  try {
    decode_filename("s01_999p_HQ_plr0_del0_jit0_bwNA_lat200");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("999p"), std::string::npos);
  }
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr0_del0_jit0_bwNA_lat200_x"), ParseError);
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr0_dl0_jit0_bwNA_lat200"), ParseError);
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr0_del0_jit0_bw_lat200"), ParseError);
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr101_del0_jit0_bwNA_lat200"), ParseError);
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr-1_del0_jit0_bwNA_lat200"), ParseError);
  EXPECT_THROW(decode_filename("s01_1080p_HQ_plr1_del0_jit0_bw0_lat200"), ParseError);
}

TEST(Filename, NumbersIgnoreLocale) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(200), "200");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
}

// Property: decode(encode(c)) == c and encode(decode(n)) == n over
// randomized configurations.
TEST(FilenameProperty, Bijection) {
  Rng gen(1000);
  const char* ids[] = {"s01", "s06", "a", "clip-7", "X.y"};
  for (int i = 0; i < 5000; ++i) {
    NameFields f;
    f.source_id = ids[gen.next_u64() % 5];
    f.resolution = gen.bernoulli(0.5) ? media::Resolution::R720p : media::Resolution::R1080p;
    f.tier = static_cast<media::Tier>(gen.next_u64() % 3);
    auto value = [&](double hi) {
      switch (gen.next_u64() % 3) {
        case 0: return static_cast<double>(gen.next_u64() % static_cast<std::uint64_t>(hi));
        case 1: return std::round(gen.uniform(0, hi) * 100) / 100;
        default: return gen.uniform(0, hi);
      }
    };
    f.plr_percent = value(100);
    f.delay_ms = value(1000);
    f.jitter_ms = value(500);
    if (gen.bernoulli(0.5)) f.bandwidth_kbit = 1 + value(20000);
    f.latency_ms = value(2000);
    const std::string name = encode_filename(f);
    const NameFields back = decode_filename(name);
    ASSERT_EQ(back, f) << name;
    ASSERT_EQ(encode_filename(back), name);
  }
}

TEST(Matrix, SixSourcesByFourLossRates) {
  MatrixSpec spec;
  spec.sources.assign(media::builtin_profiles().begin(), media::builtin_profiles().end());
  spec.plr_percent = {0, 0.5, 1, 5};
  const auto configs = expand_matrix(spec);
  EXPECT_EQ(configs.size(), 24u);
  // Sources outermost.
  EXPECT_EQ(configs[0].profile.source_id, "s01");
  EXPECT_EQ(configs[3].impairment.plr_percent, 5);
  EXPECT_EQ(configs[4].profile.source_id, "s02");
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  for (const auto& c : configs) {
    ids.insert(c.run_id);
    seeds.insert(c.seed);
    EXPECT_EQ(c.seed, combine_seed(0, c.run_id));
    EXPECT_EQ(c.run_id, encode_filename(c));
  }
  EXPECT_EQ(ids.size(), 24u);
  EXPECT_EQ(seeds.size(), 24u);
}

TEST(Matrix, SingleCell) {
  MatrixSpec spec;
  spec.sources = {media::builtin_profile("s03")};
  const auto configs = expand_matrix(spec);
  ASSERT_EQ(configs.size(), 1u);
  EXPECT_EQ(configs[0].run_id, "s03_1080p_LQ_plr0_del0_jit0_bwNA_lat200");
}

TEST(Matrix, AllSourcesAreTheSixBuiltins) {
  const auto spec = parse_matrix(R"({"sources": "all"})");
  const auto configs = expand_matrix(spec);
  ASSERT_EQ(configs.size(), 6u);
  std::set<std::pair<media::Resolution, media::Tier>> cells;
  for (const auto& c : configs) cells.insert({c.profile.resolution, c.profile.tier});
  EXPECT_EQ(cells.size(), 6u);
}

TEST(Matrix, ParseFullDocument) {
  const auto spec = parse_matrix(R"({
    "sources": ["s01", {"source_id": "custom", "resolution": "720p", "tier": "MQ",
                        "video_bitrate_kbit": 1500}],
    "duration_s": 12,
    "plr_percent": [0, 1],
    "delay_ms": 30,
    "jitter_ms": [0, 5],
    "bandwidth_kbit": [null, 2000],
    "latency_ms": [100],
    "queue_limit": 20,
    "trace": true,
    "master_seed": 99,
    "mode": "sim"
  })");
  ASSERT_EQ(spec.sources.size(), 2u);
  EXPECT_EQ(spec.sources[1].video_bitrate_kbit, 1500);
  EXPECT_EQ(spec.sources[0].duration_s, 12);
  EXPECT_EQ(spec.sources[1].duration_s, 12);
  const auto configs = expand_matrix(spec);
  EXPECT_EQ(configs.size(), 2u * 2 * 1 * 2 * 2 * 1);
  EXPECT_EQ(configs[0].impairment.queue_limit, 20u);
  EXPECT_TRUE(configs[0].trace);
  EXPECT_EQ(configs[1].impairment.bandwidth_kbit, 2000);
}

TEST(Matrix, Errors) {
  MatrixSpec spec;
  EXPECT_THROW(expand_matrix(spec), ConfigError);  // no sources
  spec.sources = {media::builtin_profile("s01")};
  spec.plr_percent = {};
  EXPECT_THROW(expand_matrix(spec), ConfigError);
  spec.plr_percent = {1, 1};
  EXPECT_THROW(expand_matrix(spec), ConfigError);  // duplicate run id
  spec.plr_percent = {150};
  EXPECT_THROW(expand_matrix(spec), ConfigError);
  EXPECT_THROW(parse_matrix("{"), ConfigError);
  EXPECT_THROW(parse_matrix(R"({"sources": "all", "plr": [1]})"), ConfigError);
  EXPECT_THROW(parse_matrix(R"({"sources": ["s42"]})"), ConfigError);
  EXPECT_THROW(parse_matrix(R"({"sources": "all", "mode": "tcp"})"), ConfigError);
  EXPECT_THROW(expand_matrix(parse_matrix(R"({"sources": "all", "latency_ms": []})")), ConfigError);
}

TEST(Experiment, IdentityRun) {
  TempDir dir("identity");
  const auto art = run_experiment(cell("s06", 6, 0), dir.path());
  EXPECT_TRUE(art.summary.ok);
  EXPECT_EQ(art.summary.measured_loss_percent, 0.0);
  EXPECT_EQ(art.summary.eos_kind, "BYE");
  EXPECT_EQ(art.summary.frames_partial, 0u);
  EXPECT_EQ(art.summary.frames_complete, 150u + 300u);
  for (const auto& p : {art.stats_path, art.sender_stats_path, *art.channel_trace_path,
                        art.received_manifest_path, art.source_manifest_path, art.summary_path}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  EXPECT_EQ(art.directory.filename(), art.output_name);
  EXPECT_EQ(count_lines(slurp(art.received_manifest_path)), 450u);
  // Received payload covers the nominal bitrate plus headers and audio.
  EXPECT_GT(art.summary.effective_bitrate_kbit, 1000.0);
  EXPECT_LT(art.summary.effective_bitrate_kbit, 1100.0);
  EXPECT_EQ(summary_from_json(slurp(art.summary_path)), art.summary);
}

TEST(Experiment, FivePercentMatchesTraceDrops) {
  TempDir dir("plr5");
  const auto art = run_experiment(cell("s04", 60, 5), dir.path());
  const auto& s = art.summary;
  ASSERT_TRUE(s.ok);
  const double n = static_cast<double>(s.packets_expected);
  EXPECT_NEAR(s.measured_loss_percent, 5.0, 100 * 4 * std::sqrt(0.05 * 0.95 / n));

  // Oracle: RTP drops counted from the trace file on disk.
  std::ifstream in(*art.channel_trace_path);
  std::string line;
  std::int64_t drops = 0, injected = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string flow = j.at("flow");
    if (j.at("channel").get<std::string>().rfind("forward/", 0) != 0) continue;
    if (flow != "video/rtp" && flow != "audio/rtp") continue;
    ++injected;
    drops += j.at("stage") != "delivered";
  }
  EXPECT_EQ(s.packets_lost, drops);
  EXPECT_EQ(s.packets_expected, injected);
  EXPECT_DOUBLE_EQ(s.measured_loss_percent, 100.0 * static_cast<double>(drops) / injected);
  EXPECT_EQ(s.eos_kind, "BYE");
}

TEST(Experiment, FullLossTimesOut) {
  TempDir dir("plr100");
  const auto art = run_experiment(cell("s06", 4, 100), dir.path());
  EXPECT_EQ(art.summary.eos_kind, "timeout");
  EXPECT_EQ(art.summary.frames_complete, 0u);
  EXPECT_EQ(art.summary.measured_loss_percent, 100.0);
}

TEST(Experiment, InvalidConfigNamesRun) {
  TempDir dir("bad");
  ExperimentConfig c = cell("s06", 1, 0);
  c.impairment.plr_percent = -3;
  try {
    run_experiment(c, dir.path());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(c.run_id), std::string::npos);
  }
}

TEST(Summary, HeaderRowsAndFailureMarker) {
  std::ostringstream empty;
  summarize_matrix({}, empty);
  EXPECT_EQ(empty.str(), std::string(summary_header()) + "\n");

  std::vector<SummaryRow> rows(24);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].run_id = "r" + std::to_string(i);
    rows[i].ok = i != 5;
    rows[i].eos_kind = "BYE";
  }
  std::ostringstream out;
  summarize_matrix(rows, out);
  const std::string text = out.str();
  EXPECT_EQ(count_lines(text), 25u);
  EXPECT_NE(text.find("\nr5,FAILED,,,,,,,,,,,,\n"), std::string::npos);
  const std::string header(summary_header());
  const auto columns = std::count(header.begin(), header.end(), ',');
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns);
}

TEST(Matrix, DeterministicAcrossRunsAndExecutionModes) {
  MatrixSpec spec;
  spec.sources = {media::builtin_profile("s05"), media::builtin_profile("s06")};
  for (auto& p : spec.sources) p.duration_s = 5;
  spec.plr_percent = {0, 2};
  spec.jitter_ms = {0, 10};
  spec.delay_ms = {20};
  spec.master_seed = 42;
  const auto configs = expand_matrix(spec);
  TempDir a("serial"), b("parallel");
  const auto rows_a = run_matrix(configs, a.path(), {Execution::Serial, false});
  const auto rows_b = run_matrix(configs, b.path(), {Execution::Parallel, false});
  ASSERT_EQ(rows_a, rows_b);
  for (const auto& c : configs) {
    for (auto f : {kStatsFile, kSenderStatsFile, kSummaryFile, kReceivedManifestFile}) {
      EXPECT_EQ(slurp(a.path() / c.run_id / std::string(f)),
                slurp(b.path() / c.run_id / std::string(f)))
          << c.run_id << "/" << f;
    }
  }
}

TEST(Matrix, ResumeSkipsCompletedCells) {
  MatrixSpec spec;
  spec.sources = {media::builtin_profile("s06")};
  spec.sources[0].duration_s = 3;
  spec.plr_percent = {0, 1, 2};
  const auto configs = expand_matrix(spec);
  TempDir dir("resume");
  const auto first = run_matrix(configs, dir.path(), {Execution::Serial, true});
  std::ostringstream first_table;
  summarize_matrix(first, first_table);

  // Damage one cell: drop its summary and stats; tag another as already done.
  fs::remove(dir.path() / configs[1].run_id / std::string(kSummaryFile));
  fs::remove(dir.path() / configs[1].run_id / std::string(kStatsFile));
  const auto untouched = fs::last_write_time(dir.path() / configs[0].run_id / std::string(kStatsFile));

  const auto second = run_matrix(configs, dir.path(), {Execution::Parallel, true});
  std::ostringstream second_table;
  summarize_matrix(second, second_table);
  EXPECT_EQ(first_table.str(), second_table.str());
  EXPECT_TRUE(fs::exists(dir.path() / configs[1].run_id / std::string(kStatsFile)));
  EXPECT_EQ(fs::last_write_time(dir.path() / configs[0].run_id / std::string(kStatsFile)), untouched);
  EXPECT_EQ(collect_summaries(configs, dir.path()), second);
}

TEST(Matrix, FailedCellDoesNotStopMatrix) {
  MatrixSpec spec;
  spec.sources = {media::builtin_profile("s06")};
  spec.sources[0].duration_s = 2;
  spec.plr_percent = {0, 1};
  auto configs = expand_matrix(spec);
  configs[0].profile.video_bitrate_kbit = -1;  // invalid after expansion
  TempDir dir("failed");
  const auto rows = run_matrix(configs, dir.path(), {Execution::Serial, false});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].ok);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_TRUE(rows[1].ok);
  EXPECT_FALSE(load_completed(dir.path(), configs[0].run_id));
  const auto collected = collect_summaries(configs, dir.path());
  EXPECT_FALSE(collected[0].ok);
}

TEST(Experiment, UdpModeMatchesSimFrameCounts) {
  ExperimentConfig c = cell("s06", 2, 0);
  c.trace = false;
  TempDir dir("udp");
  const auto sim = run_experiment(c, dir.path() / "sim");
  c.mode = Mode::Udp;
  c.topology = rtp::SessionTopology::shifted(24100);
  const auto udp = run_experiment(c, dir.path() / "udp");
  EXPECT_EQ(udp.summary.measured_loss_percent, 0.0);
  EXPECT_EQ(udp.summary.eos_kind, "BYE");
  EXPECT_EQ(udp.summary.frames_complete, sim.summary.frames_complete);
  EXPECT_FALSE(udp.channel_trace_path);
}
