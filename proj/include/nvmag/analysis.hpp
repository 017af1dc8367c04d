#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "nvmag/exec.hpp"
#include "nvmag/time_series.hpp"

// Estimators behind the noise-floor, Allan and distance-fit figures.
namespace nvmag::analysis {

struct AsdSpectrum {
  std::vector<double> freqs_hz;  // 0, df, 2 df, ... fs/2
  std::vector<double> asd;       // T/sqrt(Hz), one-sided
  double resolution_bw_hz = 0.0; // bin spacing fs / segment_len
};

/// One-sided Welch estimate with a periodic Hann window normalized by the
/// window power, so that sum(PSD) * df equals the mean square of the input.
/// Segments advance by round(segment_len (1 - overlap)) samples. Throws
/// std::invalid_argument when segment_len > n or overlap is outside [0, 1).
///
/// The parallel path computes segment periodograms concurrently and sums
/// them in segment order; both paths return identical spectra.
AsdSpectrum asd_welch(const FieldTimeSeries& x, std::size_t segment_len = 4096,
                      double overlap = 0.5, Exec exec = Exec::Parallel);

struct FreqBand {
  double lo_hz;
  double hi_hz;
  bool contains(double f) const { return f >= lo_hz && f <= hi_hz; }
};

// Median ASD over bins inside `band` and outside every `exclude` band.
// Throws AnalysisError when no bin survives.
double noise_floor(const AsdSpectrum& spec, FreqBand band, std::span<const FreqBand> exclude = {});

// Bands of +-half_width around each frequency.
std::vector<FreqBand> bands_around(std::span<const double> freqs_hz, double half_width_hz);

/// Single-bin DFT projection at f0 over samples with t_start <= t < t_end
/// (rectangular weighting), returned as the sinusoid amplitude 2|X|/n.
double tone_amplitude(const FieldTimeSeries& x, double f0_hz, double t_start_s, double t_end_s);

// Same projection over a bare sample span (phase referenced to its first sample).
double tone_amplitude_at(std::span<const double> samples, double fs_hz, double f0_hz);

// Expected RMS of tone_amplitude for white noise of one-sided ASD `asd`
// over a window of `window_s`: asd * sqrt(2 / window_s).
double tone_noise_level(double asd, double window_s);

struct AllanCurve {
  std::vector<double> taus_s;
  std::vector<double> adev;
  std::vector<std::size_t> n_pairs;
};

/// Overlapping Allan deviation
///   sigma(tau)^2 = 1 / (2 (N - 2m + 1)) sum_k (ybar_{k+m} - ybar_k)^2,
/// tau = m / fs, ybar_k the mean of x[k .. k+m). Block sums come from a
/// double-double running sum, so each is good to the last bit and the cost
/// is O(N) per tau. The parallel path distributes the block means over k;
/// the final sum runs in index order, so both paths agree exactly.
/// Each tau must be a whole number of samples and at most duration / 3.
AllanCurve allan_deviation(const FieldTimeSeries& x, std::span<const double> taus_s,
                           Exec exec = Exec::Parallel);

// Log-spaced taus, whole samples, from 1/fs to duration/3, deduplicated.
std::vector<double> log_spaced_taus(const FieldTimeSeries& x, int per_decade = 10);

// Least-squares slope of log10(y) against log10(x) over points with x in [lo, hi].
double loglog_slope(std::span<const double> xs, std::span<const double> ys, double lo, double hi);

struct DistancePoint {
  double distance_m;
  double field_t;
  double sigma_t;
};

struct DistanceFit {
  double c = 0.0;   // T m^3
  double y0 = 0.0;  // T
  std::array<std::array<double, 2>, 2> covariance{};  // (c, y0)
  double chi2 = 0.0;
  double fixed_r = 0.0;

  double c_stderr() const;
  double y0_stderr() const;
  double model(double d_m) const;
};

/// Weighted least squares of B(d) = c/(d^2+R^2)^(3/2) + y0 with R fixed.
/// The model is linear in (c, y0), so the normal equations are solved in
/// closed form; covariance is the inverse normal matrix. Throws
/// std::invalid_argument for fewer than 3 points or sigma <= 0, and
/// AnalysisError when the design is rank deficient (all distances equal).
DistanceFit fit_distance_model(std::span<const DistancePoint> points, double r_m);

// Quadrature sum of floor*sqrt(bw) and |dB/dd| sigma_d at distance d.
double distance_error_budget(double d_m, double sigma_d_m, const DistanceFit& fit,
                             double floor_asd, double bw_hz);

// dB/dd of the fitted model.
double distance_model_slope(const DistanceFit& fit, double d_m);

}  // namespace nvmag::analysis
