#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "nvmag/analysis.hpp"
#include "nvmag/constants.hpp"
#include "nvmag/signal_chain.hpp"

using namespace nvmag;
using namespace nvmag::chain;
using fixtures::rel_err;

namespace {

FieldTimeSeries sine(double fs, std::size_t n, double f, double amp) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(constants::kTwoPi * f * i / fs);
  return FieldTimeSeries(fs, std::move(v));
}

// Steady-state gain of the lock-in at f, measured over the last whole cycles.
double measured_gain(double f, double fs, double tau, int poles) {
  const double cycles = std::max(40.0, std::ceil(f * 40.0 * tau * poles));
  const std::size_t n = static_cast<std::size_t>(std::llround(2.0 * cycles * fs / f));
  const auto y = lockin_filter(sine(fs, n, f, 1.0), tau, poles);
  const double half = static_cast<double>(n / 2) / fs;
  return analysis::tone_amplitude(y, f, half, static_cast<double>(n) / fs);
}

}  // namespace

TEST_CASE("scenario synthesis") {
  SUBCASE("step current lowers the field by alpha I") {
    Scenario s;
    s.bias_field_t = 828.06e-6;
    s.alpha_t_per_a = 7.3e-6;
    s.current_waveform = {{0.0, 0.4}};
    const auto x = synth_scenario(s, 8.0, 10.0);
    for (double v : x.samples()) CHECK(v == doctest::Approx(825.14e-6).epsilon(1e-12));
  }
  SUBCASE("empty scenario is silent") {
    const auto x = synth_scenario(Scenario{}, 1000.0, 2.0);
    CHECK(x.size() == 2000);
    CHECK(std::all_of(x.samples().begin(), x.samples().end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("a 120 Hz tone at the 10 m amplitude is recovered") {
    Scenario s;
    s.tones = {{0.0, 10.0, 120.0, 1.95e-9}};
    const auto x = synth_scenario(s, 1000.0, 10.0);
    CHECK(rel_err(analysis::tone_amplitude(x, 120.0, 0.0, 10.0), 1.95e-9) < 0.05);
  }
  SUBCASE("tone bursts are gated and coil drive follows the coil field") {
    Scenario s;
    s.tones = {{1.0, 2.0, 50.0, 1e-9}};
    s.coil = CoilLink{fixtures::reference_coil(), 4.0};
    s.projection_cos = 0.5;
    const auto x = synth_scenario(s, 1000.0, 4.0);
    CHECK(analysis::tone_amplitude(x, 50.0, 0.0, 1.0) < 1e-15);
    CHECK(rel_err(analysis::tone_amplitude(x, 50.0, 1.0, 3.0), 0.5e-9) < 1e-9);
    CHECK(rel_err(analysis::tone_amplitude(x, 120.0, 0.0, 4.0),
                  0.5 * channel::coil_axial_field(fixtures::reference_coil(), 4.0)) < 1e-9);
  }
  SUBCASE("piecewise current lookup") {
    const std::vector<CurrentStep> w{{0.0, 0.1}, {5.0, 0.2}, {10.0, 0.0}};
    CHECK(current_at(w, -1.0) == 0.0);
    CHECK(current_at(w, 0.0) == 0.1);
    CHECK(current_at(w, 4.999) == 0.1);
    CHECK(current_at(w, 5.0) == 0.2);
    CHECK(current_at(w, 12.0) == 0.0);
  }
  SUBCASE("fixed seed reproduces bit for bit") {
    Scenario s;
    s.noise.white_asd = 2e-9;
    s.noise.flicker_asd_at_1hz = 5e-9;
    s.noise.mains = channel::NoiseSpec::default_mains();
    s.noise.seed = 21;
    s.tones = {{0.0, 1.0, 120.0, 1e-9}};
    const auto a = synth_scenario(s, 1000.0, 3.0), b = synth_scenario(s, 1000.0, 3.0);
    CHECK(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
  }
  SUBCASE("Nyquist guard") {
    Scenario s;
    s.tones = {{0.0, 1.0, 500.0, 1e-9}};
    CHECK_THROWS_AS(synth_scenario(s, 1000.0, 1.0), std::invalid_argument);
    Scenario c;
    c.coil = CoilLink{fixtures::reference_coil(), 1.0};
    CHECK_THROWS_AS(synth_scenario(c, 200.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(synth_scenario(c, 241.0, 1.0));
    CHECK_THROWS_AS(synth_scenario(Scenario{}, 1000.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("lock-in low-pass cascade") {
  const double tau = 1e-3;

  SUBCASE("unity DC gain") {
    const FieldTimeSeries dc(1000.0, std::vector<double>(200, 1.0));
    const auto y = lockin_filter(dc, tau, 4);
    CHECK(std::abs(y[199] - 1.0) <= 1e-9);
    const auto primed = lockin_filter(dc, tau, 4, FilterStart::FirstSample);
    CHECK(primed[0] == 1.0);
  }
  SUBCASE("four poles give -12.04 dB at the single-pole cutoff") {
    const double fc = 1.0 / (constants::kTwoPi * tau);
    CHECK(fc == doctest::Approx(159.15).epsilon(1e-4));
    const double gain_db = 20.0 * std::log10(measured_gain(fc, 100e3, tau, 4));
    CHECK(std::abs(gain_db - (-12.04)) <= 0.3);
  }
  SUBCASE("24 dB per octave far above cutoff") {
    const double g2 = measured_gain(2000.0, 100e3, tau, 4);
    const double g4 = measured_gain(4000.0, 100e3, tau, 4);
    CHECK(std::abs(20.0 * std::log10(g2 / g4) - 24.0) <= 1.0);
  }
  SUBCASE("step response rises monotonically without overshoot") {
    for (int poles : {1, 2, 4, 6}) {
      const FieldTimeSeries step(1000.0, std::vector<double>(300, 1.0));
      const auto y = lockin_filter(step, 5e-3, poles);
      for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] >= y[i - 1]);
      CHECK(*std::max_element(y.samples().begin(), y.samples().end()) <= 1.0);
    }
  }
  SUBCASE("linear and time invariant") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    std::vector<double> a(500), b(500), ab(500);
    for (std::size_t i = 0; i < 500; ++i) {
      a[i] = nd(rng), b[i] = nd(rng);
      ab[i] = 2.5 * a[i] - 0.7 * b[i];
    }
    const auto fa = lockin_filter(FieldTimeSeries(1000.0, a), tau, 4);
    const auto fb = lockin_filter(FieldTimeSeries(1000.0, b), tau, 4);
    const auto fab = lockin_filter(FieldTimeSeries(1000.0, ab), tau, 4);
    for (std::size_t i = 0; i < 500; ++i) CHECK(std::abs(fab[i] - (2.5 * fa[i] - 0.7 * fb[i])) <= 1e-12);

    std::vector<double> delayed(500, 0.0);
    std::copy(a.begin(), a.begin() + 400, delayed.begin() + 100);
    const auto fd = lockin_filter(FieldTimeSeries(1000.0, delayed), tau, 4);
    for (std::size_t i = 0; i < 400; ++i) CHECK(fd[i + 100] == doctest::Approx(fa[i]).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const FieldTimeSeries x(1000.0, std::vector<double>(10, 0.0));
    CHECK_THROWS_AS(lockin_filter(x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lockin_filter(x, tau, 0), std::invalid_argument);
  }
}

TEST_CASE("block-average decimation") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(1u << 17);
  for (double& s : v) s = nd(rng);
  const FieldTimeSeries x(1000.0, v, 2.0);

  const auto same = decimate(x, 1);
  CHECK(std::equal(same.samples().begin(), same.samples().end(), x.samples().begin()));
  CHECK(same.fs() == x.fs());

  const auto c = decimate(FieldTimeSeries(100.0, std::vector<double>(1000, 3.5)), 10);
  CHECK(c.size() == 100);
  CHECK(c.fs() == 10.0);
  for (double s : c.samples()) CHECK(s == doctest::Approx(3.5).epsilon(1e-15));

  for (std::size_t m : {4u, 16u, 125u}) {
    const auto d = decimate(x, m);
    CHECK(d.size() == x.size() / m);
    CHECK(d.t0() == 2.0);
    const auto s = d.samples();
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double ss = 0.0;
    for (double q : s) ss += (q - mean) * (q - mean);
    CHECK(rel_err(std::sqrt(ss / (s.size() - 1)), 1.0 / std::sqrt(static_cast<double>(m))) < 0.05);
  }
  CHECK_THROWS_AS(decimate(x, 0), std::invalid_argument);
}
