#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nvmag/field_channel.hpp"
#include "nvmag/time_series.hpp"

// Time-domain measurement chain: scenario synthesis, lock-in low-pass
// emulation at baseband, and block-average decimation.
namespace nvmag::chain {

// Current through the test wire from start_s until the next step.
struct CurrentStep {
  double start_s;
  double current_a;
};

// A sinusoid A sin(2 pi f (t - start)) present for start <= t < start + duration.
struct ToneBurst {
  double start_s;
  double duration_s;
  double freq_hz;
  double amplitude_t;
};

struct CoilLink {
  channel::CoilSpec coil;
  double distance_m;
};

struct Scenario {
  double bias_field_t = 0.0;
  double alpha_t_per_a = 0.0;  // stored positive; field falls as current rises
  std::vector<CurrentStep> current_waveform;
  std::optional<CoilLink> coil;
  std::vector<ToneBurst> tones;
  channel::NoiseSpec noise;
  double projection_cos = 1.0;  // NV axis vs transmitted field, in [-1, 1]

  void validate() const;  // throws std::invalid_argument
};

// Piecewise-constant lookup; zero before the first step. Steps must be
// sorted by start time.
double current_at(const std::vector<CurrentStep>& waveform, double t_s);

/// bias - alpha I(t) + projection_cos (sum of tones + coil drive) + noise,
/// sampled at fs for llround(duration fs) samples. Rejects any tone or coil
/// drive at or above fs/2.
FieldTimeSeries synth_scenario(const Scenario& s, double fs_hz, double duration_s);

enum class FilterStart {
  Zero,         // all stages start at rest
  FirstSample,  // all stages start settled on x[0]
};

/// `poles` identical one-pole low-pass stages in cascade, each the
/// impulse-invariant discretization of dy/dt = (x - y)/tau:
///   y[n] = a y[n-1] + (1 - a) x[n],  a = exp(-1/(fs tau)).
/// Unity DC gain, monotone step response, 6 dB/oct per pole.
FieldTimeSeries lockin_filter(const FieldTimeSeries& x, double tau_s, int poles = 4,
                              FilterStart start = FilterStart::Zero);

// Averages consecutive blocks of `factor` samples; a trailing partial block
// is dropped. Output sample k is stamped with the start time of its block.
FieldTimeSeries decimate(const FieldTimeSeries& x, std::size_t factor);

}  // namespace nvmag::chain
