// Serial reference vs OpenMP path for every parallel kernel. The thread
// count is forced above one so the parallel code actually splits work even
// on a single-core machine.
#include <omp.h>

#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "nvmag/analysis.hpp"
#include "nvmag/field_channel.hpp"
#include "nvmag/modem.hpp"

using namespace nvmag;

namespace {

struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

FieldTimeSeries noise(double fs, std::size_t n, std::uint64_t seed) {
  channel::NoiseSpec spec;
  spec.white_asd = 2.26e-9;
  spec.flicker_asd_at_1hz = 4e-9;
  spec.mains = channel::NoiseSpec::default_mains();
  spec.seed = seed;
  return channel::synth_noise(spec, fs, n);
}

}  // namespace

TEST_CASE("Welch serial and parallel spectra are identical") {
  Threads t(4);
  const auto x = noise(1000.0, 300000, 1);
  for (std::size_t seg : {256u, 4096u}) {
    const auto a = analysis::asd_welch(x, seg, 0.5, Exec::Serial);
    const auto b = analysis::asd_welch(x, seg, 0.5, Exec::Parallel);
    CHECK(a.asd == b.asd);
    CHECK(a.freqs_hz == b.freqs_hz);
  }
}

TEST_CASE("Allan serial and parallel curves are identical") {
  Threads t(4);
  const auto x = noise(100.0, 50000, 2);
  const auto taus = analysis::log_spaced_taus(x, 10);
  const auto a = analysis::allan_deviation(x, taus, Exec::Serial);
  const auto b = analysis::allan_deviation(x, taus, Exec::Parallel);
  CHECK(a.adev == b.adev);
  CHECK(a.n_pairs == b.n_pairs);
}

TEST_CASE("sync scores serial and parallel are identical") {
  Threads t(4);
  modem::TonePlan plan;
  plan.threshold_t = 50e-9;
  const auto tx = modem::modulate("sync", plan, 1000.0, 100e-9);
  const auto n = noise(1000.0, tx.size(), 3);
  std::vector<double> v(tx.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = tx[i] + n[i];
  const FieldTimeSeries x(1000.0, v);
  CHECK(modem::sync_scores(x, plan, Exec::Serial) == modem::sync_scores(x, plan, Exec::Parallel));
  CHECK(modem::sync_offset(x, plan, Exec::Serial) == modem::sync_offset(x, plan, Exec::Parallel));
}

TEST_CASE("Biot-Savart reduction agrees to rounding") {
  Threads t(4);
  const auto coil = fixtures::reference_coil();
  for (double x : {0.0, 1.0, 10.0}) {
    const double a = channel::biot_savart_axial_oracle(coil, x, 8192, Exec::Serial);
    const double b = channel::biot_savart_axial_oracle(coil, x, 8192, Exec::Parallel);
    CHECK(fixtures::rel_err(b, a) < 1e-13);
  }
}
