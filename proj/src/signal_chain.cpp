#include "nvmag/signal_chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "nvmag/constants.hpp"

namespace nvmag::chain {

void Scenario::validate() const {
  if (!std::isfinite(bias_field_t) || !std::isfinite(alpha_t_per_a))
    throw std::invalid_argument("scenario bias and alpha must be finite");
  if (!(projection_cos >= -1.0 && projection_cos <= 1.0))
    throw std::invalid_argument("projection_cos must lie in [-1, 1]");
  for (std::size_t i = 1; i < current_waveform.size(); ++i)
    if (!(current_waveform[i].start_s > current_waveform[i - 1].start_s))
      throw std::invalid_argument("current waveform steps must have increasing start times");
  for (const auto& tone : tones) {
    if (!(tone.duration_s > 0.0)) throw std::invalid_argument("tone duration must be positive");
    if (!(tone.freq_hz >= 0.0)) throw std::invalid_argument("tone frequency must be >= 0");
  }
  if (coil) coil->coil.validate();
  noise.validate();
}

double current_at(const std::vector<CurrentStep>& waveform, double t_s) {
  const auto it = std::upper_bound(waveform.begin(), waveform.end(), t_s,
                                   [](double t, const CurrentStep& s) { return t < s.start_s; });
  if (it == waveform.begin()) return 0.0;
  return std::prev(it)->current_a;
}

FieldTimeSeries synth_scenario(const Scenario& s, double fs_hz, double duration_s) {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(duration_s > 0.0)) throw std::invalid_argument("scenario duration must be positive");
  s.validate();
  const double nyquist = fs_hz / 2.0;
  for (const auto& tone : s.tones)
    if (tone.freq_hz >= nyquist)
      throw std::invalid_argument(
          fmt::format("tone at {} Hz violates Nyquist for fs = {} Hz", tone.freq_hz, fs_hz));
  if (s.coil && s.coil->coil.drive_freq_hz >= nyquist)
    throw std::invalid_argument(fmt::format("coil drive at {} Hz violates Nyquist for fs = {} Hz",
                                            s.coil->coil.drive_freq_hz, fs_hz));

  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs_hz));
  if (n < 2) throw std::invalid_argument("scenario is shorter than two samples");

  auto noise = channel::synth_noise(s.noise, fs_hz, n);
  std::vector<double> out = std::move(noise).release();

  const double coil_amp =
      s.coil ? channel::coil_axial_field(s.coil->coil, s.coil->distance_m) : 0.0;
  const double coil_w = s.coil ? constants::kTwoPi * s.coil->coil.drive_freq_hz : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs_hz;
    double transmitted = 0.0;
    for (const auto& tone : s.tones) {
      if (t >= tone.start_s && t < tone.start_s + tone.duration_s)
        transmitted += tone.amplitude_t * std::sin(constants::kTwoPi * tone.freq_hz * (t - tone.start_s));
    }
    if (s.coil) transmitted += coil_amp * std::sin(coil_w * t);
    out[i] += s.bias_field_t - s.alpha_t_per_a * current_at(s.current_waveform, t) +
              s.projection_cos * transmitted;
  }
  return FieldTimeSeries(fs_hz, std::move(out));
}

FieldTimeSeries lockin_filter(const FieldTimeSeries& x, double tau_s, int poles, FilterStart start) {
  if (!(tau_s > 0.0)) throw std::invalid_argument("lock-in time constant must be positive");
  if (poles < 1) throw std::invalid_argument("lock-in needs at least one pole");

  const double a = std::exp(-1.0 / (x.fs() * tau_s));
  const double b = 1.0 - a;
  std::vector<double> y(x.samples().begin(), x.samples().end());
  for (int p = 0; p < poles; ++p) {
    double state = (start == FilterStart::FirstSample && !y.empty()) ? y.front() : 0.0;
    for (double& v : y) {
      state = a * state + b * v;
      v = state;
    }
  }
  return FieldTimeSeries(x.fs(), std::move(y), x.t0());
}

FieldTimeSeries decimate(const FieldTimeSeries& x, std::size_t factor) {
  if (factor < 1) throw std::invalid_argument("decimation factor must be >= 1");
  if (factor == 1) return x;
  const std::size_t blocks = x.size() / factor;
  std::vector<double> out(blocks);
  const auto in = x.samples();
  for (std::size_t k = 0; k < blocks; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < factor; ++j) sum += in[k * factor + j];
    out[k] = sum / static_cast<double>(factor);
  }
  return FieldTimeSeries(x.fs() / static_cast<double>(factor), std::move(out), x.t0());
}

}  // namespace nvmag::chain
