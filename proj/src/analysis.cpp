#include "nvmag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "nvmag/constants.hpp"
#include "nvmag/errors.hpp"
#include "real_fft.hpp"

namespace nvmag::analysis {

using constants::kTwoPi;

namespace {

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

// |FFT(w * (seg - mean(seg)))|^2 for one segment.
void segment_periodogram(std::span<const double> seg, std::span<const double> window,
                         const detail::RealFft& fft, std::span<double> scratch,
                         std::span<std::complex<double>> spectrum, std::span<double> out) {
  const double mean =
      std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(seg.size());
  for (std::size_t i = 0; i < seg.size(); ++i) scratch[i] = (seg[i] - mean) * window[i];
  fft.transform(scratch, spectrum);
  for (std::size_t k = 0; k < spectrum.size(); ++k) out[k] = std::norm(spectrum[k]);
}

}  // namespace

AsdSpectrum asd_welch(const FieldTimeSeries& x, std::size_t segment_len, double overlap, Exec exec) {
  const std::size_t n = x.size();
  if (segment_len < 2) throw std::invalid_argument("Welch segment must hold at least 2 samples");
  if (segment_len > n)
    throw std::invalid_argument(
        fmt::format("Welch segment of {} samples exceeds series of {}", segment_len, n));
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw std::invalid_argument("Welch overlap must lie in [0, 1)");

  const std::size_t step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(segment_len) * (1.0 - overlap))));
  const std::size_t segments = 1 + (n - segment_len) / step;
  const auto window = periodic_hann(segment_len);
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

  const detail::RealFft fft(segment_len);
  const std::size_t bins = fft.bins();
  const auto samples = x.samples();
  std::vector<double> acc(bins, 0.0);

  if (exec == Exec::Serial) {
    std::vector<double> scratch(segment_len), pg(bins);
    std::vector<std::complex<double>> spectrum(bins);
    for (std::size_t s = 0; s < segments; ++s) {
      segment_periodogram(samples.subspan(s * step, segment_len), window, fft, scratch, spectrum, pg);
      for (std::size_t k = 0; k < bins; ++k) acc[k] += pg[k];
    }
  } else {
    // Periodograms are formed concurrently in batches and folded into the
    // accumulator in segment order, keeping the result independent of the
    // thread count.
    constexpr std::size_t kBatch = 64;
    std::vector<double> batch(kBatch * bins);
    for (std::size_t first = 0; first < segments; first += kBatch) {
      const std::size_t count = std::min(kBatch, segments - first);
#pragma omp parallel
      {
        std::vector<double> scratch(segment_len);
        std::vector<std::complex<double>> spectrum(bins);
#pragma omp for schedule(static)
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(count); ++j) {
          const std::size_t s = first + static_cast<std::size_t>(j);
          segment_periodogram(samples.subspan(s * step, segment_len), window, fft, scratch, spectrum,
                              std::span<double>(batch).subspan(static_cast<std::size_t>(j) * bins, bins));
        }
      }
      for (std::size_t j = 0; j < count; ++j)
        for (std::size_t k = 0; k < bins; ++k) acc[k] += batch[j * bins + k];
    }
  }

  AsdSpectrum out;
  out.resolution_bw_hz = x.fs() / static_cast<double>(segment_len);
  out.freqs_hz.resize(bins);
  out.asd.resize(bins);
  const double scale = 1.0 / (static_cast<double>(segments) * x.fs() * window_power);
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = (k == 0) || (segment_len % 2 == 0 && k == bins - 1);
    const double psd = acc[k] * scale * (unpaired ? 1.0 : 2.0);
    out.freqs_hz[k] = static_cast<double>(k) * out.resolution_bw_hz;
    out.asd[k] = std::sqrt(psd);
  }
  return out;
}

double noise_floor(const AsdSpectrum& spec, FreqBand band, std::span<const FreqBand> exclude) {
  if (spec.freqs_hz.empty() || band.lo_hz > band.hi_hz || band.lo_hz < spec.freqs_hz.front() ||
      band.hi_hz > spec.freqs_hz.back())
    throw std::invalid_argument("noise-floor band lies outside the spectrum");
  std::vector<double> values;
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k) {
    const double f = spec.freqs_hz[k];
    if (!band.contains(f)) continue;
    if (std::any_of(exclude.begin(), exclude.end(), [f](const FreqBand& e) { return e.contains(f); }))
      continue;
    values.push_back(spec.asd[k]);
  }
  if (values.empty()) throw AnalysisError("noise-floor band is fully excluded");

  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<FreqBand> bands_around(std::span<const double> freqs_hz, double half_width_hz) {
  std::vector<FreqBand> bands;
  bands.reserve(freqs_hz.size());
  for (double f : freqs_hz) bands.push_back({f - half_width_hz, f + half_width_hz});
  return bands;
}

double tone_amplitude_at(std::span<const double> samples, double fs_hz, double f0_hz) {
  if (samples.empty()) throw std::invalid_argument("tone amplitude over an empty window");
  if (!(f0_hz >= 0.0 && f0_hz < fs_hz / 2.0))
    throw std::invalid_argument("tone frequency must lie in [0, fs/2)");
  const double w = kTwoPi * f0_hz / fs_hz;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double phase = w * static_cast<double>(i);
    re += samples[i] * std::cos(phase);
    im -= samples[i] * std::sin(phase);
  }
  return 2.0 * std::hypot(re, im) / static_cast<double>(samples.size());
}

double tone_amplitude(const FieldTimeSeries& x, double f0_hz, double t_start_s, double t_end_s) {
  // sample i belongs to the window when t_start <= t0 + i/fs < t_end
  constexpr double kSlack = 1e-9;
  const double first_f = std::ceil((t_start_s - x.t0()) * x.fs() - kSlack);
  const double last_f = std::ceil((t_end_s - x.t0()) * x.fs() - kSlack);
  if (first_f < 0.0 || last_f > static_cast<double>(x.size()) || !(last_f > first_f))
    throw std::invalid_argument(
        fmt::format("tone window [{}, {}) s is not inside the series", t_start_s, t_end_s));
  const auto first = static_cast<std::size_t>(first_f);
  const auto last = static_cast<std::size_t>(last_f);
  return tone_amplitude_at(x.samples().subspan(first, last - first), x.fs(), f0_hz);
}

double tone_noise_level(double asd, double window_s) { return asd * std::sqrt(2.0 / window_s); }

namespace {

// Unevaluated sum hi + lo carrying about 106 bits.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

DoubleDouble normalize(double hi, double lo) {
  const double s = hi + lo;
  return {s, lo - (s - hi)};
}

DoubleDouble add(DoubleDouble x, double y) {
  const auto s = two_sum(x.hi, y);
  return normalize(s.hi, s.lo + x.lo);
}

double difference(DoubleDouble x, DoubleDouble y) {
  const auto s = two_sum(x.hi, -y.hi);
  return s.hi + (s.lo + (x.lo - y.lo));
}

}  // namespace

AllanCurve allan_deviation(const FieldTimeSeries& x, std::span<const double> taus_s, Exec exec) {
  const std::size_t n = x.size();
  if (n < 3) throw AnalysisError("series too short for an Allan deviation");
  const auto samples = x.samples();

  std::vector<std::size_t> ms;
  for (double tau : taus_s) {
    const double m_f = tau * x.fs();
    const double m_r = std::round(m_f);
    if (m_r < 1.0 || std::abs(m_f - m_r) > 1e-6 * std::max(1.0, m_f))
      throw std::invalid_argument(fmt::format("tau = {} s is not a whole number of samples", tau));
    const auto m = static_cast<std::size_t>(m_r);
    if (3 * m > n)
      throw AnalysisError(fmt::format("tau = {} s exceeds a third of the series duration", tau));
    ms.push_back(m);
  }

  // Block sums as differences of an extended-precision running sum: O(N)
  // per tau, and each block sum is accurate to the last bit of a double, so
  // a constant input gives identical means and a zero deviation.
  std::vector<DoubleDouble> prefix(n + 1);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = add(prefix[i], samples[i]);

  AllanCurve curve;
  std::vector<double> means;
  for (std::size_t m : ms) {
    means.assign(n - m + 1, 0.0);
    const double md = static_cast<double>(m);
    const auto block_mean = [&](std::size_t k) { means[k] = difference(prefix[k + m], prefix[k]) / md; };
    if (exec == Exec::Serial) {
      for (std::size_t k = 0; k < means.size(); ++k) block_mean(k);
    } else {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(means.size()); ++k)
        block_mean(static_cast<std::size_t>(k));
    }

    const std::size_t pairs = n - 2 * m + 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const double d = means[k + m] - means[k];
      acc += d * d;
    }
    curve.taus_s.push_back(static_cast<double>(m) / x.fs());
    curve.adev.push_back(std::sqrt(acc / (2.0 * static_cast<double>(pairs))));
    curve.n_pairs.push_back(pairs);
  }
  return curve;
}

std::vector<double> log_spaced_taus(const FieldTimeSeries& x, int per_decade) {
  if (per_decade < 1) throw std::invalid_argument("taus per decade must be >= 1");
  std::vector<double> taus;
  const std::size_t m_max = x.size() / 3;
  std::size_t last = 0;
  for (int i = 0;; ++i) {
    const auto m = static_cast<std::size_t>(std::llround(std::pow(10.0, static_cast<double>(i) / per_decade)));
    if (m > m_max) break;
    if (m != last) taus.push_back(static_cast<double>(m) / x.fs());
    last = m;
  }
  return taus;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys, double lo, double hi) {
  if (xs.size() != ys.size()) throw std::invalid_argument("slope inputs differ in length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < lo || xs[i] > hi || !(xs[i] > 0.0) || !(ys[i] > 0.0)) continue;
    const double lx = std::log10(xs[i]), ly = std::log10(ys[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++count;
  }
  if (count < 2) throw AnalysisError("need at least two positive points to fit a log-log slope");
  const double c = static_cast<double>(count);
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

double DistanceFit::c_stderr() const { return std::sqrt(covariance[0][0]); }
double DistanceFit::y0_stderr() const { return std::sqrt(covariance[1][1]); }
double DistanceFit::model(double d_m) const { return c / std::pow(d_m * d_m + fixed_r * fixed_r, 1.5) + y0; }

DistanceFit fit_distance_model(std::span<const DistancePoint> points, double r_m) {
  if (points.size() < 3) throw std::invalid_argument("distance fit needs at least 3 points");
  if (!(r_m > 0.0)) throw std::invalid_argument("coil radius must be positive");
  for (const auto& p : points)
    if (!(p.sigma_t > 0.0)) throw std::invalid_argument("every point needs sigma > 0");

  const auto basis = [r_m](double d) { return 1.0 / std::pow(d * d + r_m * r_m, 1.5); };

  // Centered weighted normal equations for b = c u + y0.
  double sw = 0, su = 0, sb = 0;
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma_t * p.sigma_t);
    sw += w;
    su += w * basis(p.distance_m);
    sb += w * p.field_t;
  }
  const double u_bar = su / sw, b_bar = sb / sw;
  double suu = 0, sub = 0, suu_raw = 0;
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma_t * p.sigma_t);
    const double du = basis(p.distance_m) - u_bar;
    suu += w * du * du;
    sub += w * du * (p.field_t - b_bar);
    suu_raw += w * basis(p.distance_m) * basis(p.distance_m);
  }
  if (!(suu > 1e-14 * suu_raw)) throw AnalysisError("distance fit is rank deficient (distances do not vary)");

  DistanceFit fit;
  fit.fixed_r = r_m;
  fit.c = sub / suu;
  fit.y0 = b_bar - fit.c * u_bar;
  fit.covariance[0][0] = 1.0 / suu;
  fit.covariance[0][1] = fit.covariance[1][0] = -u_bar / suu;
  fit.covariance[1][1] = 1.0 / sw + u_bar * u_bar / suu;
  for (const auto& p : points) {
    const double r = (p.field_t - fit.model(p.distance_m)) / p.sigma_t;
    fit.chi2 += r * r;
  }
  return fit;
}

double distance_model_slope(const DistanceFit& fit, double d_m) {
  const double s = d_m * d_m + fit.fixed_r * fit.fixed_r;
  return -3.0 * fit.c * d_m / std::pow(s, 2.5);
}

double distance_error_budget(double d_m, double sigma_d_m, const DistanceFit& fit, double floor_asd,
                             double bw_hz) {
  if (!(sigma_d_m >= 0.0)) throw std::invalid_argument("distance uncertainty must be >= 0");
  if (!(bw_hz >= 0.0) || !(floor_asd >= 0.0)) throw std::invalid_argument("floor and bandwidth must be >= 0");
  const double noise = floor_asd * std::sqrt(bw_hz);
  const double geometry = std::abs(distance_model_slope(fit, d_m)) * sigma_d_m;
  return std::hypot(noise, geometry);
}

}  // namespace nvmag::analysis
