#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nvmag/exec.hpp"
#include "nvmag/time_series.hpp"

// The magnetic channel between transmitter coil and sensor, and the
// additive noise environment seen at the sensor.
namespace nvmag::channel {

struct CoilSpec {
  int turns = 191;
  double current_a = 0.2;
  double radius_m = 0.285;
  double drive_freq_hz = 120.0;
  double axis_offset_m = 0.0;  // lateral sensor offset from the coil axis

  void validate() const;  // throws std::invalid_argument
};

// On-axis field of an N-turn circular loop,
//   B(x) = mu0/(4 pi) * N I R * 2 pi R / (x^2 + R^2)^(3/2).
// A non-zero axis_offset is folded in as the effective distance
// sqrt(x^2 + offset^2); the off-axis field itself is not modeled.
double coil_axial_field(const CoilSpec& coil, double x_m);

// Axial component of the field at (x, axis_offset) obtained by summing the
// Biot-Savart contribution of `segments` arc elements around one loop
// (midpoint rule, exact tangent), times N. Independent of the closed form
// above; it converges to it for axis_offset = 0. Rejects segments < 16.
double biot_savart_axial_oracle(const CoilSpec& coil, double x_m, int segments,
                                Exec exec = Exec::Parallel);

// Point magnetic dipole m = N I pi R^2 on its axis: mu0 m / (2 pi x^3).
double dipole_axial_field(const CoilSpec& coil, double x_m);

// B(d) = c / (d^2 + r^2)^(3/2) + y0.
double distance_model(double d_m, double c_tm3, double r_m, double y0_t);

// The c of distance_model that makes it coincide with coil_axial_field:
// mu0/(4 pi) * N I * 2 pi R^2.
double distance_model_coefficient(const CoilSpec& coil);

struct MainsLine {
  double freq_hz;
  double amplitude_t;
};

struct NoiseSpec {
  double white_asd = 0.0;                 // T/sqrt(Hz), one-sided
  double flicker_asd_at_1hz = 0.0;        // T/sqrt(Hz) at 1 Hz, ASD ~ 1/sqrt(f)
  double random_walk_asd_at_1hz = 0.0;    // T/sqrt(Hz) at 1 Hz, ASD ~ 1/f
  std::vector<MainsLine> mains;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument

  // 50/100/150 Hz lines at 20/10/15 nT.
  static std::vector<MainsLine> default_mains();
};

/// n samples at fs of the additive noise described by spec.
///
/// Components:
///  * white Gaussian with per-sample sigma = white_asd * sqrt(fs/2);
///  * 1/f noise from a bank of one-pole low-pass sections driven by white
///    noise, four poles per decade from fs/(10 n) to fs/2, weighted so the
///    summed spectrum follows flicker_asd_at_1hz / sqrt(f);
///  * a random walk whose ASD is random_walk_asd_at_1hz / f;
///  * mains sinusoids with seeded uniform random phases.
/// Each component draws from its own generator derived from spec.seed, so
/// switching one component on or off leaves the others' realization intact.
/// The output is bit-reproducible for a given seed on a given build.
FieldTimeSeries synth_noise(const NoiseSpec& spec, double fs_hz, std::size_t n);

}  // namespace nvmag::channel
