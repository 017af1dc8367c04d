#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

// NV-center readout physics: resonance model, dual-resonance field
// extraction, ODMR line synthesis, shot-noise sensitivity and the
// current-to-field calibration arithmetic.
namespace nvmag::nv {

// Detector gain that reproduces 585 pT/sqrt(Hz) with the default
// linewidth, contrast, photovoltage and wavelength below.
inline constexpr double kDefaultDetectorGain = 2.92728109082e5;  // V/W

struct NvSensorParams {
  double d0_hz = 2.870e9;
  double temp_coeff_hz_per_k = 75e3;
  double gamma_hz_per_t = 2.803e10;  // 2.803 MHz/G
  double linewidth_hz = 1.1e6;       // FWHM of a single hyperfine component
  double contrast = 0.0094;
  double hyperfine_hz = 2.158e6;     // 14N splitting
  double photovoltage_v = 3.3;
  double detector_gain_v_per_w = kDefaultDetectorGain;
  double wavelength_m = 532e-9;

  // Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

struct ResonancePair {
  double f_minus_hz;
  double f_plus_hz;
};

// f-+ = D(dT) -+ gamma*b with D(dT) = d0 + temp_coeff*dT. b is the field
// projection on the NV axis and may be negative.
ResonancePair resonance_frequencies(double b_t, double delta_t_k, const NvSensorParams& params);

// (f+ - f-) / (2 gamma). Any common-mode shift of the pair cancels.
double dual_resonance_field(double f_minus_hz, double f_plus_hz, double gamma_hz_per_t);

/// Normalized fluorescence versus microwave frequency (1.0 off resonance).
class OdmrSpectrum {
 public:
  // Requires equal lengths, strictly increasing freqs, signal in (0, 1].
  OdmrSpectrum(std::vector<double> freqs_hz, std::vector<double> signal);

  std::span<const double> freqs() const { return freqs_; }
  std::span<const double> signal() const { return signal_; }
  std::size_t size() const { return freqs_.size(); }

 private:
  std::vector<double> freqs_;
  std::vector<double> signal_;
};

// Peak-normalized Lorentzian: 1 at the center, 1/2 at +-fwhm/2.
double lorentzian(double f_hz, double center_hz, double fwhm_hz);

/// Two transitions, each a hyperfine triplet of Lorentzian dips of depth
/// `contrast` spaced by `hyperfine_hz`. Only the bias-aligned NV axis is
/// modeled. Throws std::invalid_argument for non-increasing or empty freqs,
/// and when overlapping lines would drive the signal to zero or below.
OdmrSpectrum synth_odmr_spectrum(const NvSensorParams& params, double b_t,
                                 std::span<const double> freqs_hz, double delta_t_k = 0.0);

// Uniform grid of `points` frequencies covering [start, stop].
std::vector<double> frequency_grid(double start_hz, double stop_hz, std::size_t points);

/// Locates the deepest dip on each side of `split_hz` and refines it by a
/// three-point parabola. Returns nullopt when either side has no dip deeper
/// than `min_depth`.
std::optional<ResonancePair> locate_resonances(const OdmrSpectrum& spectrum, double split_hz,
                                               double min_depth = 1e-9);

// eta = 4/(3 sqrt 3) * h/(g_e mu_B) * (linewidth/C) * sqrt(G h c / (V lambda)),
// in T/sqrt(Hz). Throws std::invalid_argument for non-positive inputs.
double shot_noise_sensitivity(const NvSensorParams& params);

struct CalibrationRow {
  double current_a;
  double mean_field_t;
  double std_field_t;
};

/// Mean field and spread recorded at a set of test-wire currents.
class CurrentCalibration {
 public:
  // Currents must be distinct and std_field >= 0.
  explicit CurrentCalibration(std::vector<CalibrationRow> rows);

  // CSV with header `current_a,mean_field_t,std_field_t`.
  static CurrentCalibration from_csv(std::istream& in);
  static CurrentCalibration from_csv_file(const std::string& path);

  std::span<const CalibrationRow> rows() const { return rows_; }
  const CalibrationRow& at_current(double current_a) const;  // throws std::out_of_range
  double mean_std_field() const;

 private:
  std::vector<CalibrationRow> rows_;
};

// alpha = (<B>_i0 - <B>_i1) / (i1 - i0), in T/A. Field falls as current
// rises, so alpha is positive for the test-wire geometry.
double conversion_factor(const CurrentCalibration& cal, double i0_a, double i1_a);

// Smallest resolvable current change sigma_B / alpha.
double current_resolution(double sigma_b_t, double alpha_t_per_a);

}  // namespace nvmag::nv
