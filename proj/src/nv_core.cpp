#include "nvmag/nv_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "nvmag/constants.hpp"

namespace nvmag::nv {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void NvSensorParams::validate() const {
  require(d0_hz > 0.0, "d0 must be positive");
  require(gamma_hz_per_t > 0.0, "gamma must be positive");
  require(linewidth_hz > 0.0, "linewidth must be positive");
  require(contrast > 0.0 && contrast < 1.0, "contrast must lie in (0, 1)");
  require(hyperfine_hz >= 0.0, "hyperfine splitting must be non-negative");
  require(photovoltage_v > 0.0, "photovoltage must be positive");
  require(detector_gain_v_per_w > 0.0, "detector gain must be positive");
  require(wavelength_m > 0.0, "wavelength must be positive");
}

ResonancePair resonance_frequencies(double b_t, double delta_t_k, const NvSensorParams& params) {
  const double d = params.d0_hz + params.temp_coeff_hz_per_k * delta_t_k;
  const double zeeman = params.gamma_hz_per_t * b_t;
  return {d - zeeman, d + zeeman};
}

double dual_resonance_field(double f_minus_hz, double f_plus_hz, double gamma_hz_per_t) {
  require(gamma_hz_per_t > 0.0, "gamma must be positive");
  return (f_plus_hz - f_minus_hz) / (2.0 * gamma_hz_per_t);
}

OdmrSpectrum::OdmrSpectrum(std::vector<double> freqs_hz, std::vector<double> signal)
    : freqs_(std::move(freqs_hz)), signal_(std::move(signal)) {
  require(freqs_.size() == signal_.size(), "ODMR spectrum arrays differ in length");
  require(std::adjacent_find(freqs_.begin(), freqs_.end(), std::greater_equal<>()) == freqs_.end(),
          "ODMR frequencies must be strictly increasing");
  require(std::all_of(signal_.begin(), signal_.end(), [](double s) { return s > 0.0 && s <= 1.0; }),
          "ODMR signal must lie in (0, 1]");
}

double lorentzian(double f_hz, double center_hz, double fwhm_hz) {
  const double hw = 0.5 * fwhm_hz;
  const double df = f_hz - center_hz;
  return hw * hw / (df * df + hw * hw);
}

OdmrSpectrum synth_odmr_spectrum(const NvSensorParams& params, double b_t,
                                 std::span<const double> freqs_hz, double delta_t_k) {
  require(!freqs_hz.empty(), "ODMR frequency grid is empty");
  require(std::adjacent_find(freqs_hz.begin(), freqs_hz.end(), std::greater_equal<>()) ==
              freqs_hz.end(),
          "ODMR frequencies must be strictly increasing");
  require(params.linewidth_hz > 0.0, "linewidth must be positive");
  require(params.contrast >= 0.0 && params.contrast < 1.0, "contrast must lie in [0, 1)");

  const auto [f_minus, f_plus] = resonance_frequencies(b_t, delta_t_k, params);
  const double centers[2] = {f_minus, f_plus};
  const double hf = params.hyperfine_hz;

  std::vector<double> signal(freqs_hz.size());
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    double dip = 0.0;
    for (double c : centers)
      for (int m = -1; m <= 1; ++m) dip += lorentzian(freqs_hz[i], c + m * hf, params.linewidth_hz);
    signal[i] = 1.0 - params.contrast * dip;
    if (!(signal[i] > 0.0))
      throw std::invalid_argument("contrast too large: overlapping dips drive the signal to zero");
  }
  return OdmrSpectrum(std::vector<double>(freqs_hz.begin(), freqs_hz.end()), std::move(signal));
}

std::vector<double> frequency_grid(double start_hz, double stop_hz, std::size_t points) {
  require(points >= 2, "frequency grid needs at least two points");
  require(stop_hz > start_hz, "frequency grid stop must exceed start");
  std::vector<double> grid(points);
  const double step = (stop_hz - start_hz) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = start_hz + step * static_cast<double>(i);
  return grid;
}

namespace {

// Deepest sample in [lo, hi), refined by the vertex of the parabola through
// its neighbours. Empty when the dip is shallower than min_depth.
std::optional<double> deepest_dip(const OdmrSpectrum& s, std::size_t lo, std::size_t hi,
                                  double min_depth) {
  if (hi <= lo) return std::nullopt;
  const auto sig = s.signal();
  const auto f = s.freqs();
  const auto it = std::min_element(sig.begin() + lo, sig.begin() + hi);
  const auto k = static_cast<std::size_t>(it - sig.begin());
  if (1.0 - sig[k] <= min_depth) return std::nullopt;
  if (k == 0 || k + 1 >= sig.size()) return f[k];

  const double y0 = sig[k - 1], y1 = sig[k], y2 = sig[k + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom <= 0.0) return f[k];
  // Non-uniform spacing is tolerated by interpolating in the index domain.
  const double shift = 0.5 * (y0 - y2) / denom;
  const double step = shift >= 0.0 ? f[k + 1] - f[k] : f[k] - f[k - 1];
  return f[k] + shift * step;
}

}  // namespace

std::optional<ResonancePair> locate_resonances(const OdmrSpectrum& spectrum, double split_hz,
                                               double min_depth) {
  const auto f = spectrum.freqs();
  const auto split =
      static_cast<std::size_t>(std::lower_bound(f.begin(), f.end(), split_hz) - f.begin());
  const auto lower = deepest_dip(spectrum, 0, split, min_depth);
  const auto upper = deepest_dip(spectrum, split, f.size(), min_depth);
  if (!lower || !upper) return std::nullopt;
  return ResonancePair{*lower, *upper};
}

double shot_noise_sensitivity(const NvSensorParams& params) {
  using namespace constants;
  require(params.linewidth_hz > 0.0 && params.contrast > 0.0 && params.photovoltage_v > 0.0 &&
              params.detector_gain_v_per_w > 0.0 && params.wavelength_m > 0.0,
          "shot-noise sensitivity inputs must be positive");
  const double prefactor = 4.0 / (3.0 * std::sqrt(3.0));
  const double spin = kPlanck / (kElectronG * kBohrMagneton);
  // Kept in this grouping so that C -> 2C and V -> 4V scale the result by
  // exactly 1/2 in floating point.
  const double line = params.linewidth_hz / params.contrast;
  const double photons = (params.detector_gain_v_per_w * kPlanck * kSpeedOfLight) /
                         (params.photovoltage_v * params.wavelength_m);
  return prefactor * spin * line * std::sqrt(photons);
}

CurrentCalibration::CurrentCalibration(std::vector<CalibrationRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    require(rows_[i].std_field_t >= 0.0, "calibration std_field must be non-negative");
    for (std::size_t j = 0; j < i; ++j)
      require(rows_[i].current_a != rows_[j].current_a, "calibration currents must be distinct");
  }
}

CurrentCalibration CurrentCalibration::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("calibration CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "current_a,mean_field_t,std_field_t")
    throw std::invalid_argument("calibration CSV header must be current_a,mean_field_t,std_field_t");

  std::vector<CalibrationRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    CalibrationRow row{};
    char c1 = 0, c2 = 0;
    if (!(ss >> row.current_a >> c1 >> row.mean_field_t >> c2 >> row.std_field_t) || c1 != ',' ||
        c2 != ',')
      throw std::invalid_argument(fmt::format("calibration CSV: malformed line {}", lineno));
    rows.push_back(row);
  }
  return CurrentCalibration(std::move(rows));
}

CurrentCalibration CurrentCalibration::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open calibration file '{}'", path));
  return from_csv(in);
}

const CalibrationRow& CurrentCalibration::at_current(double current_a) const {
  for (const auto& row : rows_)
    if (row.current_a == current_a) return row;
  throw std::out_of_range(fmt::format("no calibration row for {} A", current_a));
}

double CurrentCalibration::mean_std_field() const {
  if (rows_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : rows_) sum += row.std_field_t;
  return sum / static_cast<double>(rows_.size());
}

double conversion_factor(const CurrentCalibration& cal, double i0_a, double i1_a) {
  require(i0_a != i1_a, "conversion factor needs two different currents");
  const auto& r0 = cal.at_current(i0_a);
  const auto& r1 = cal.at_current(i1_a);
  return (r0.mean_field_t - r1.mean_field_t) / (i1_a - i0_a);
}

double current_resolution(double sigma_b_t, double alpha_t_per_a) {
  require(alpha_t_per_a != 0.0, "conversion factor must be non-zero");
  require(sigma_b_t >= 0.0, "field spread must be non-negative");
  return sigma_b_t / std::abs(alpha_t_per_a);
}

}  // namespace nvmag::nv
