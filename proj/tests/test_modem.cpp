#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "nvmag/analysis.hpp"
#include "nvmag/field_channel.hpp"
#include "nvmag/modem.hpp"

using namespace nvmag;
using namespace nvmag::modem;

namespace {

constexpr double kFs = 1000.0;
constexpr double kAmp = 236e-9;

TonePlan plan_with_threshold(double thr = kAmp / 2.0) {
  TonePlan p;
  p.threshold_t = thr;
  return p;
}

// Delays a waveform by `lead_s` of silence and adds optional noise.
FieldTimeSeries embed(const FieldTimeSeries& tx, double lead_s, double tail_s, const channel::NoiseSpec* noise) {
  const auto lead = static_cast<std::size_t>(std::llround(lead_s * tx.fs()));
  const auto tail = static_cast<std::size_t>(std::llround(tail_s * tx.fs()));
  std::vector<double> v(lead + tx.size() + tail, 0.0);
  std::copy(tx.samples().begin(), tx.samples().end(), v.begin() + static_cast<std::ptrdiff_t>(lead));
  if (noise) {
    const auto n = channel::synth_noise(*noise, tx.fs(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += n[i];
  }
  return FieldTimeSeries(tx.fs(), std::move(v));
}

}  // namespace

TEST_CASE("tone plan") {
  const auto tones = TonePlan::default_tones();
  REQUIRE(tones.size() == 11);
  CHECK(tones.front() == 100.0);
  CHECK(tones.back() == doctest::Approx(149.0));
  CHECK(tones.back() < 150.0);
  TonePlan p;
  CHECK_NOTHROW(p.validate(kFs));
  CHECK_THROWS_AS(p.validate(290.0), std::invalid_argument);
  p.symbol_window_s = 0.3;  // needs 6.7 Hz spacing
  CHECK_THROWS_AS(p.validate(kFs), std::invalid_argument);
  TonePlan q;
  q.tone_freqs_hz.pop_back();
  CHECK_THROWS_AS(q.validate(kFs), std::invalid_argument);
}

TEST_CASE("waveforms") {
  const auto plan = plan_with_threshold();
  SUBCASE("message length") {
    CHECK(modulate("Test", plan, kFs, kAmp).duration() == doctest::Approx(15.0));
    CHECK(modulate("", plan, kFs, kAmp).duration() == doctest::Approx(11.0));
    TonePlan g = plan;
    g.guard_s = 0.25;
    CHECK(modulate("Test", g, kFs, kAmp).duration() == doctest::Approx(15.0 * 1.25));
    CHECK_THROWS_AS(modulate("\x80", plan, kFs, kAmp), std::invalid_argument);
  }
  SUBCASE("preamble plays one tone per window") {
    const auto pre = preamble_waveform(plan, kFs, kAmp);
    CHECK(pre.duration() == doctest::Approx(11.0));
    for (std::size_t w = 0; w < 11; ++w) {
      for (std::size_t k = 0; k < 11; ++k) {
        const double a = analysis::tone_amplitude(pre, plan.tone_freqs_hz[k], w, w + 1.0);
        if (k == w)
          CHECK(std::abs(a - kAmp) <= 0.02 * kAmp);
        else
          CHECK(a < kAmp * 0.05);
      }
    }
    const auto silent = preamble_waveform(plan, kFs, 0.0);
    for (double v : silent.samples()) CHECK(v == 0.0);
  }
}

TEST_CASE("noiseless loopback") {
  const auto plan = plan_with_threshold();
  SUBCASE("Test decodes without corrections, newest row first") {
    const auto tx = modulate("Test", plan, kFs, kAmp);
    const double off = sync_offset(tx, plan);
    CHECK(std::abs(off) <= plan.symbol_window_s / 16);
    const auto h = demodulate(tx, plan, off);
    CHECK(h.message() == "Test");
    for (const auto& r : h.rows()) CHECK_FALSE(r.corrected);
    const auto nf = h.newest_first();
    REQUIRE(nf.size() == 4);
    CHECK(nf.front().decoded_char == 't');
    CHECK(nf.back().decoded_char == 'T');
  }
  SUBCASE("arbitrary ASCII at arbitrary offsets") {
    // The recording runs on past the message: with a sync estimate up to
    // window/16 late, the last window needs those extra samples.
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> ch(1, 127);
    std::uniform_real_distribution<double> lead(0.0, 3.0);
    for (int t = 0; t < 10; ++t) {
      std::string msg;
      for (int i = 0; i < 6; ++i) msg.push_back(static_cast<char>(ch(rng)));
      const auto x = embed(modulate(msg, plan, kFs, kAmp), lead(rng), 0.1, nullptr);
      const auto h = demodulate(x, plan, sync_offset(x, plan));
      CHECK(h.message() == msg);
    }
  }
  SUBCASE("zero input decodes to NUL rows") {
    const FieldTimeSeries z(kFs, std::vector<double>(15000, 0.0));
    const auto h = demodulate(z, plan, 0.0);
    CHECK(h.size() == 4);
    for (const auto& r : h.rows()) {
      CHECK(r.decoded_char == '\0');
      for (bool b : r.bits) CHECK_FALSE(b);
    }
    CHECK(h.message().empty());
  }
  SUBCASE("sync finds a preamble injected at 0.37 s") {
    const auto x = embed(preamble_waveform(plan, kFs, kAmp), 0.37, 1.0, nullptr);
    CHECK(std::abs(sync_offset(x, plan) - 0.37) <= plan.symbol_window_s / 16);
  }
  SUBCASE("sync on a series with a non-zero start time") {
    const auto tx = modulate("ok", plan, kFs, kAmp);
    const FieldTimeSeries shifted(kFs, std::vector<double>(tx.samples().begin(), tx.samples().end()), 100.0);
    const double off = sync_offset(shifted, plan);
    CHECK(std::abs(off - 100.0) <= plan.symbol_window_s / 16);
    CHECK(demodulate(shifted, plan, off).message() == "ok");
  }
}

TEST_CASE("erased tones are corrected") {
  const auto plan = plan_with_threshold();
  const std::string msg = "Test";
  for (std::size_t sym = 0; sym < msg.size(); ++sym) {
    for (std::size_t k = 0; k < kSymbolBits; ++k) {
      std::vector<ToneMask> masks;
      for (char c : msg) masks.push_back(symbol_encode(c).tone_mask);
      masks[sym][k] = !masks[sym][k];
      const auto x = modulate_masks(masks, plan, kFs, kAmp);
      const auto h = demodulate(x, plan, sync_offset(x, plan));
      CHECK(h.message() == msg);
      CHECK(h.rows()[sym].corrected);
    }
  }
}

TEST_CASE("uncorrectable rows read as '?'") {
  auto plan = plan_with_threshold();
  std::vector<ToneMask> masks{symbol_encode('A').tone_mask, symbol_encode('B').tone_mask};
  // syndrome 1100 matches no column
  masks[1][7] = !masks[1][7];
  masks[1][8] = !masks[1][8];
  const auto x = modulate_masks(masks, plan, kFs, kAmp);
  const auto h = demodulate(x, plan, 0.0);
  CHECK_FALSE(h.rows()[1].decoded_char.has_value());
  CHECK(h.message() == "A?");
}

TEST_CASE("threshold monotonicity") {
  channel::NoiseSpec noise;
  noise.white_asd = 60e-9;
  noise.seed = 17;
  const auto x = embed(modulate("Hi!", plan_with_threshold(), kFs, kAmp), 0.0, 0.0, &noise);
  std::vector<ToneMask> prev;
  for (double thr : {0.0, 20e-9, 60e-9, 118e-9, 200e-9, 300e-9}) {
    const auto h = demodulate(x, plan_with_threshold(thr), 0.0);
    std::vector<ToneMask> bits;
    for (const auto& r : h.rows()) bits.push_back(r.bits);
    for (std::size_t i = 0; i < prev.size(); ++i)
      for (std::size_t k = 0; k < kSymbolBits; ++k) CHECK((!prev[i][k] ? !bits[i][k] : true));
    prev = bits;
  }
}

TEST_CASE("no preamble in pure noise") {
  channel::NoiseSpec noise;
  noise.white_asd = 2.26e-9;
  noise.mains = channel::NoiseSpec::default_mains();
  const auto plan = plan_with_threshold();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    noise.seed = seed;
    const auto x = channel::synth_noise(noise, kFs, 20000);
    CHECK_THROWS_AS(sync_offset(x, plan), NoPreambleFound);
  }
  CHECK_THROWS_AS(sync_offset(FieldTimeSeries(kFs, std::vector<double>(5000, 0.0)), plan), NoPreambleFound);
}

TEST_CASE("2 m link over the default noise floor") {
  const auto coil = fixtures::reference_coil();
  const double amp = channel::coil_axial_field(coil, 2.0);
  CHECK(amp == doctest::Approx(236.45e-9).epsilon(1e-3));
  const auto plan = plan_with_threshold(amp / 2.0);
  const auto tx = modulate("Test", plan, kFs, amp);
  int ok = 0, synced = 0;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lead(0.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    channel::NoiseSpec noise;
    noise.white_asd = 2.26e-9;
    noise.mains = channel::NoiseSpec::default_mains();
    noise.seed = 1000 + t;
    const double l = lead(rng);
    const auto x = embed(tx, l, 0.5, &noise);
    const double off = sync_offset(x, plan);
    synced += std::abs(off - l) <= plan.symbol_window_s / 16;
    ok += demodulate(x, plan, off).message() == "Test";
  }
  CHECK(synced >= 95);
  CHECK(ok >= 95);
}

TEST_CASE("streaming receiver matches batch demodulation") {
  const auto plan = plan_with_threshold();
  const auto x = embed(modulate("stream!", plan, kFs, kAmp), 0.61, 0.3, nullptr);
  const double off = sync_offset(x, plan);
  const auto batch = demodulate(x, plan, off);

  StreamingReceiver rx(plan, kFs, x.t0(), off);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> chunk(1, 700);
  std::size_t pos = 0, emitted = 0;
  while (pos < x.size()) {
    const std::size_t n = std::min(chunk(rng), x.size() - pos);
    emitted += rx.push(x.samples().subspan(pos, n)).size();
    pos += n;
  }
  CHECK(emitted == batch.size());
  REQUIRE(rx.history().size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(rx.history().rows()[i].bits == batch.rows()[i].bits);
    CHECK(rx.history().rows()[i].amplitudes_t == batch.rows()[i].amplitudes_t);
  }
  CHECK(rx.history().message() == "stream!");
  CHECK_THROWS_AS(StreamingReceiver(plan, kFs, 5.0, 1.0), std::invalid_argument);
}

TEST_CASE("waterfall history ordering") {
  WaterfallHistory h;
  h.push(WaterfallRow{0, {}, 'a', false, {}});
  h.push(WaterfallRow{2, {}, 'b', false, {}});
  CHECK_THROWS_AS(h.push(WaterfallRow{2, {}, 'c', false, {}}), std::invalid_argument);
  CHECK(h.newest_first()[0].window_index == 2);
  CHECK(h.message() == "ab");
}
