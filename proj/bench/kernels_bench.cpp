// Serial reference vs OpenMP kernel for each parallel hot spot.
#include <benchmark/benchmark.h>

#include "nvmag/analysis.hpp"
#include "nvmag/field_channel.hpp"
#include "nvmag/modem.hpp"

using namespace nvmag;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

FieldTimeSeries noise(std::size_t n) {
  channel::NoiseSpec spec;
  spec.white_asd = 2.26e-9;
  spec.flicker_asd_at_1hz = 5e-9;
  spec.seed = 3;
  return channel::synth_noise(spec, 1000.0, n);
}

void BM_AsdWelch(benchmark::State& s) {
  const auto x = noise(1 << 20);
  for (auto _ : s) benchmark::DoNotOptimize(analysis::asd_welch(x, 4096, 0.5, mode(s)));
}

void BM_AllanDeviation(benchmark::State& s) {
  const auto x = noise(1 << 20);
  const auto taus = analysis::log_spaced_taus(x, 10);
  for (auto _ : s) benchmark::DoNotOptimize(analysis::allan_deviation(x, taus, mode(s)));
}

void BM_SyncScores(benchmark::State& s) {
  modem::TonePlan plan;
  const auto x = noise(30000);
  for (auto _ : s) benchmark::DoNotOptimize(modem::sync_scores(x, plan, mode(s)));
}

void BM_BiotSavart(benchmark::State& s) {
  const channel::CoilSpec coil;
  for (auto _ : s) benchmark::DoNotOptimize(channel::biot_savart_axial_oracle(coil, 2.0, 1 << 20, mode(s)));
}

}  // namespace

BENCHMARK(BM_AsdWelch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllanDeviation)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SyncScores)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiotSavart)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
