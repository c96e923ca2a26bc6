// Serial reference vs OpenMP kernels: timeline digests and matrix cells.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include <unistd.h>

#include "qoelab/media/profile.hpp"
#include "qoelab/media/timeline.hpp"
#include "qoelab/orch/matrix.hpp"

using namespace qoelab;

namespace {

std::filesystem::path scratch(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("qoelab-bench-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

std::vector<orch::ExperimentConfig> small_matrix() {
  orch::MatrixSpec spec;
  spec.sources.assign(media::builtin_profiles().begin(), media::builtin_profiles().end());
  for (auto& s : spec.sources) s.duration_s = 10;
  spec.plr_percent = {0, 1, 5};
  spec.delay_ms = {20};
  spec.jitter_ms = {5};
  return orch::expand_matrix(spec);
}

void BM_TimelineSerial(benchmark::State& state) {
  const auto profile = media::builtin_profile("s01");
  for (auto _ : state) benchmark::DoNotOptimize(media::generate_timeline_serial(profile, 7));
}

void BM_TimelineParallel(benchmark::State& state) {
  const auto profile = media::builtin_profile("s01");
  for (auto _ : state) benchmark::DoNotOptimize(media::generate_timeline(profile, 7));
}

void run_matrix_bench(benchmark::State& state, orch::Execution mode, const std::string& tag) {
  const auto cells = small_matrix();
  const auto dir = scratch(tag);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orch::run_matrix(cells, dir, {mode, false}));
  }
  state.counters["cells"] = static_cast<double>(cells.size());
  std::filesystem::remove_all(dir);
}

void BM_MatrixSerial(benchmark::State& state) { run_matrix_bench(state, orch::Execution::Serial, "serial"); }
void BM_MatrixParallel(benchmark::State& state) {
  run_matrix_bench(state, orch::Execution::Parallel, "parallel");
}

}  // namespace

BENCHMARK(BM_TimelineSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TimelineParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixSerial)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(BM_MatrixParallel)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
