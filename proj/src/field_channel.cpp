#include "nvmag/field_channel.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nvmag/constants.hpp"

namespace nvmag::channel {

using constants::kMu0;
using constants::kPi;
using constants::kTwoPi;

void CoilSpec::validate() const {
  if (turns < 1) throw std::invalid_argument("coil needs at least one turn");
  if (!(radius_m > 0.0)) throw std::invalid_argument("coil radius must be positive");
  if (!std::isfinite(current_a)) throw std::invalid_argument("coil current must be finite");
  if (!(drive_freq_hz >= 0.0)) throw std::invalid_argument("coil drive frequency must be >= 0");
}

double coil_axial_field(const CoilSpec& coil, double x_m) {
  const double r = coil.radius_m;
  const double x2 = x_m * x_m + coil.axis_offset_m * coil.axis_offset_m;
  const double denom = std::pow(x2 + r * r, 1.5);
  return kMu0 / (4.0 * kPi) * coil.turns * coil.current_a * r * kTwoPi * r / denom;
}

namespace {

// Axial (x) component contributed by arc element k of a unit-current loop
// of radius r in the plane x = 0, seen from (x, y, 0).
double segment_bx(double r, double x, double y, int k, int segments) {
  const double dtheta = kTwoPi / segments;
  const double theta = (k + 0.5) * dtheta;
  const double c = std::cos(theta), s = std::sin(theta);
  // source point and tangent element
  const std::array<double, 3> src{0.0, r * c, r * s};
  const std::array<double, 3> dl{0.0, -r * s * dtheta, r * c * dtheta};
  const std::array<double, 3> d{x - src[0], y - src[1], 0.0 - src[2]};
  const double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const double cross_x = dl[1] * d[2] - dl[2] * d[1];
  return cross_x / (dist * dist * dist);
}

}  // namespace

double biot_savart_axial_oracle(const CoilSpec& coil, double x_m, int segments, Exec exec) {
  if (segments < 16) throw std::invalid_argument("Biot-Savart oracle needs at least 16 segments");
  const double r = coil.radius_m;
  const double y = coil.axis_offset_m;

  double sum = 0.0;
  if (exec == Exec::Serial) {
    for (int k = 0; k < segments; ++k) sum += segment_bx(r, x_m, y, k, segments);
  } else {
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (int k = 0; k < segments; ++k) sum += segment_bx(r, x_m, y, k, segments);
  }
  return kMu0 / (4.0 * kPi) * coil.turns * coil.current_a * sum;
}

double dipole_axial_field(const CoilSpec& coil, double x_m) {
  const double moment = coil.turns * coil.current_a * kPi * coil.radius_m * coil.radius_m;
  return kMu0 * moment / (kTwoPi * std::abs(x_m * x_m * x_m));
}

double distance_model(double d_m, double c_tm3, double r_m, double y0_t) {
  if (!(r_m > 0.0)) throw std::invalid_argument("distance model radius must be positive");
  return c_tm3 / std::pow(d_m * d_m + r_m * r_m, 1.5) + y0_t;
}

double distance_model_coefficient(const CoilSpec& coil) {
  return kMu0 / (4.0 * kPi) * coil.turns * coil.current_a * kTwoPi * coil.radius_m * coil.radius_m;
}

void NoiseSpec::validate() const {
  if (!(white_asd >= 0.0 && flicker_asd_at_1hz >= 0.0 && random_walk_asd_at_1hz >= 0.0))
    throw std::invalid_argument("noise amplitudes must be non-negative");
  for (const auto& line : mains) {
    if (!(line.freq_hz > 0.0)) throw std::invalid_argument("mains frequency must be positive");
    if (!(line.amplitude_t >= 0.0)) throw std::invalid_argument("mains amplitude must be >= 0");
  }
}

std::vector<MainsLine> NoiseSpec::default_mains() {
  return {{50.0, 20e-9}, {100.0, 10e-9}, {150.0, 15e-9}};
}

namespace {

enum class Stream : std::uint64_t { White = 1, Flicker = 2, RandomWalk = 3, Mains = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void add_white(std::vector<double>& out, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v += sigma * normal(rng);
}

// Sum of one-pole sections y[n] = a y[n-1] + b w[n]. A section with pole p
// has a low-frequency one-sided PSD of 2 b^2 / (fs (1-a)^2) and a
// Lorentzian roll-off above p. Weighting the plateaus as (2K/pi) * dlnp / p
// makes the sum approximate K/f between the extreme poles.
void add_flicker(std::vector<double>& out, double asd_1hz, double fs, std::mt19937_64& rng) {
  constexpr int kPolesPerDecade = 4;
  const double n = static_cast<double>(out.size());
  const double p_lo = fs / (10.0 * n);
  const double p_hi = fs / 2.0;
  const double dlnp = std::log(10.0) / kPolesPerDecade;
  const int poles = static_cast<int>(std::ceil(std::log(p_hi / p_lo) / dlnp)) + 1;
  const double k = asd_1hz * asd_1hz;

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < poles; ++i) {
    const double p = p_lo * std::exp(i * dlnp);
    const double plateau = (2.0 * k / kPi) * dlnp / p;
    const double a = std::exp(-kTwoPi * p / fs);
    const double b = (1.0 - a) * std::sqrt(plateau * fs / 2.0);
    // start in the stationary distribution so there is no settling transient
    double y = b / std::sqrt(1.0 - a * a) * normal(rng);
    for (double& v : out) {
      y = a * y + b * normal(rng);
      v += y;
    }
  }
}

// Discrete walk with step sigma has one-sided PSD sigma^2 fs / (2 pi^2 f^2)
// at low frequency.
void add_random_walk(std::vector<double>& out, double asd_1hz, double fs, std::mt19937_64& rng) {
  const double step = asd_1hz * kPi * std::sqrt(2.0 / fs);
  std::normal_distribution<double> normal(0.0, 1.0);
  double y = 0.0;
  for (double& v : out) {
    y += step * normal(rng);
    v += y;
  }
}

void add_mains(std::vector<double>& out, const std::vector<MainsLine>& lines, double fs,
               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
  for (const auto& line : lines) {
    const double phase = phase_dist(rng);
    const double w = kTwoPi * line.freq_hz / fs;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += line.amplitude_t * std::sin(w * static_cast<double>(i) + phase);
  }
}

}  // namespace

FieldTimeSeries synth_noise(const NoiseSpec& spec, double fs_hz, std::size_t n) {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (n < 2) throw std::invalid_argument("noise synthesis needs at least two samples");
  spec.validate();

  std::vector<double> out(n, 0.0);
  if (spec.white_asd > 0.0) {
    auto rng = stream_rng(spec.seed, Stream::White);
    add_white(out, spec.white_asd * std::sqrt(fs_hz / 2.0), rng);
  }
  if (spec.flicker_asd_at_1hz > 0.0) {
    auto rng = stream_rng(spec.seed, Stream::Flicker);
    add_flicker(out, spec.flicker_asd_at_1hz, fs_hz, rng);
  }
  if (spec.random_walk_asd_at_1hz > 0.0) {
    auto rng = stream_rng(spec.seed, Stream::RandomWalk);
    add_random_walk(out, spec.random_walk_asd_at_1hz, fs_hz, rng);
  }
  if (!spec.mains.empty()) {
    auto rng = stream_rng(spec.seed, Stream::Mains);
    add_mains(out, spec.mains, fs_hz, rng);
  }
  return FieldTimeSeries(fs_hz, std::move(out));
}

}  // namespace nvmag::channel
