#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "nvmag/analysis.hpp"
#include "nvmag/errors.hpp"
#include "nvmag/field_channel.hpp"
#include "nvmag/modem.hpp"
#include "nvmag/nv_core.hpp"
#include "nvmag/series_io.hpp"
#include "nvmag/signal_chain.hpp"

namespace nvmag::cli {

namespace fs = std::filesystem;

namespace {

// Output directory held for the duration of one run. A second run on the
// same directory fails while the lock file exists.
class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : dir_(path) {
    if (path.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", path, ec.message()));
    lock_ = dir_ / ".nvmag.lock";
    const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST)
        throw IoError(fmt::format("output directory '{}' is in use (remove {} if no run is active)", path,
                                  lock_.string()));
      throw IoError(fmt::format("cannot lock output directory '{}': {}", path, std::strerror(errno)));
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  template <class Fn>
  void write(const std::string& name, Fn&& fill) const {
    const auto path = dir_ / name;
    std::ofstream f(path);
    if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
    fill(f);
    f.flush();
    if (!f) throw IoError(fmt::format("error writing '{}'", path.string()));
  }

  void write_json(const std::string& name, const Json& j) const {
    write(name, [&](std::ostream& f) { f << j.dump(2) << '\n'; });
  }

 private:
  fs::path dir_;
  fs::path lock_;
};

struct Context {
  RunConfig config;
  std::uint64_t seed = 0;
  const CommandOptions* options = nullptr;
};

Context load(const CommandOptions& options) {
  Context ctx;
  ctx.config = options.scenario_path.empty() ? default_config() : load_config(options.scenario_path);
  ctx.seed = options.seed.value_or(ctx.config.scenario.noise.seed);
  ctx.config.scenario.noise.seed = ctx.seed;
  ctx.options = &options;
  return ctx;
}

Json report_header(const std::string& command, const Context& ctx) {
  Json j;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["scenario_path"] = ctx.options->scenario_path.empty() ? Json(nullptr) : Json(ctx.options->scenario_path);
  if (!ctx.options->input_path.empty()) j["input_path"] = ctx.options->input_path;
  if (!ctx.options->calibration_path.empty()) j["calibration_path"] = ctx.options->calibration_path;
  j["config"] = config_to_json(ctx.config);
  return j;
}

FieldTimeSeries synthesize(const Context& ctx) {
  return chain::synth_scenario(ctx.config.scenario, ctx.config.sample_rate_hz, ctx.config.duration_s);
}

FieldTimeSeries acquire(const Context& ctx) {
  if (!ctx.options->input_path.empty()) return io::read_series_csv_file(ctx.options->input_path);
  return synthesize(ctx);
}

// Lock-in and decimation stages, when the scenario configures them.
FieldTimeSeries condition(FieldTimeSeries x, const RunConfig& c) {
  if (c.lockin) x = chain::lockin_filter(x, c.lockin->tau_s, c.lockin->poles);
  if (c.decimate_factor) x = chain::decimate(x, *c.decimate_factor);
  return x;
}

std::vector<analysis::FreqBand> psd_exclusions(const RunConfig& c, std::vector<double> extra = {}) {
  extra.insert(extra.end(), c.psd.exclude_hz.begin(), c.psd.exclude_hz.end());
  return analysis::bands_around(extra, c.psd.exclude_half_width_hz);
}

double remove_mean(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& s : v) s -= mean;
  return mean;
}

// ---------------------------------------------------------------------------

Json cmd_odmr(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const auto grid = nv::frequency_grid(c.odmr.start_hz, c.odmr.stop_hz, c.odmr.points);
  const double b = c.scenario.bias_field_t;
  const auto spec = nv::synth_odmr_spectrum(c.sensor, b, grid, c.odmr.delta_t_k);
  out.write("odmr.csv", [&](std::ostream& f) {
    f << "freq_hz,signal\n";
    for (std::size_t i = 0; i < spec.size(); ++i)
      f << io::format_double(spec.freqs()[i]) << ',' << io::format_double(spec.signal()[i]) << '\n';
  });

  const auto model = nv::resonance_frequencies(b, c.odmr.delta_t_k, c.sensor);
  const double split = c.sensor.d0_hz + c.sensor.temp_coeff_hz_per_k * c.odmr.delta_t_k;
  Json r;
  r["input_field_t"] = b;
  r["model"] = {{"f_minus_hz", model.f_minus_hz},
                {"f_plus_hz", model.f_plus_hz},
                {"splitting_hz", model.f_plus_hz - model.f_minus_hz}};
  if (const auto found = nv::locate_resonances(spec, split)) {
    const double field = nv::dual_resonance_field(found->f_minus_hz, found->f_plus_hz, c.sensor.gamma_hz_per_t);
    r["status"] = "ok";
    r["f_minus_hz"] = found->f_minus_hz;
    r["f_plus_hz"] = found->f_plus_hz;
    r["splitting_hz"] = found->f_plus_hz - found->f_minus_hz;
    r["field_t"] = field;
    r["field_error_t"] = field - b;
    log << fmt::format("f- = {:.6f} MHz, f+ = {:.6f} MHz, B = {:.6g} T\n", found->f_minus_hz / 1e6,
                       found->f_plus_hz / 1e6, field);
  } else {
    r["status"] = "no dips";
    log << "no dips found in the spectrum\n";
  }
  return r;
}

struct SegmentStats {
  double current_a;
  double start_s;
  double end_s;
  std::size_t samples;
  double mean_t;
  double std_t;
};

Json cmd_sense(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const auto y = condition(synthesize(ctx), c);
  out.write("field.csv", [&](std::ostream& f) { io::write_series_csv(f, y); });

  auto steps = c.scenario.current_waveform;
  if (steps.empty()) steps.push_back({0.0, 0.0});
  const double end_time = y.t0() + y.duration();
  std::vector<SegmentStats> stats;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double start = steps[i].start_s + c.sense.settle_s;
    const double end = i + 1 < steps.size() ? steps[i + 1].start_s : end_time;
    std::vector<double> v;
    for (std::size_t k = 0; k < y.size(); ++k)
      if (y.time(k) >= start && y.time(k) < end) v.push_back(y[k]);
    if (v.size() < 2)
      throw AnalysisError(fmt::format("current step {} leaves fewer than two samples after settling", i));
    // shifted by the first sample: the 800 uT bias would otherwise eat the
    // low digits of the spread
    const double ref = v.front();
    double sum = 0.0, ss = 0.0;
    for (double s : v) sum += s - ref;
    const double dmean = sum / static_cast<double>(v.size());
    for (double s : v) ss += (s - ref - dmean) * (s - ref - dmean);
    stats.push_back({steps[i].current_a, start, end, v.size(), ref + dmean,
                     std::sqrt(ss / static_cast<double>(v.size() - 1))});
  }

  Json r;
  Json segs = Json::array();
  for (const auto& s : stats)
    segs.push_back({{"current_a", s.current_a},
                    {"start_s", s.start_s},
                    {"end_s", s.end_s},
                    {"samples", s.samples},
                    {"mean_field_t", s.mean_t},
                    {"std_field_t", s.std_t}});
  r["segments"] = segs;
  out.write("segments.csv", [&](std::ostream& f) {
    f << "current_a,mean_field_t,std_field_t\n";
    for (const auto& s : stats)
      f << io::format_double(s.current_a) << ',' << io::format_double(s.mean_t) << ',' << io::format_double(s.std_t)
        << '\n';
  });

  // Least-squares slope of mean field against current; alpha is its negative.
  double mi = 0, mb = 0;
  for (const auto& s : stats) mi += s.current_a, mb += s.mean_t;
  mi /= static_cast<double>(stats.size()), mb /= static_cast<double>(stats.size());
  double sxx = 0, sxy = 0, sigma = 0;
  for (const auto& s : stats) {
    sxx += (s.current_a - mi) * (s.current_a - mi);
    sxy += (s.current_a - mi) * (s.mean_t - mb);
    sigma += s.std_t;
  }
  sigma /= static_cast<double>(stats.size());
  r["mean_std_field_t"] = sigma;
  if (sxx > 0.0) {
    const double alpha = -sxy / sxx;
    r["alpha_t_per_a"] = alpha;
    r["current_resolution_a"] = alpha != 0.0 ? Json(nv::current_resolution(sigma, alpha)) : Json(nullptr);
    log << fmt::format("alpha = {:.4g} uT/A, sigma_B = {:.4g} nT\n", alpha * 1e6, sigma * 1e9);
  } else {
    r["alpha_t_per_a"] = nullptr;
    r["current_resolution_a"] = nullptr;
    log << fmt::format("single current level, sigma_B = {:.4g} nT\n", sigma * 1e9);
  }

  if (!ctx.options->calibration_path.empty()) {
    const auto cal = nv::CurrentCalibration::from_csv_file(ctx.options->calibration_path);
    std::vector<nv::CalibrationRow> rows(cal.rows().begin(), cal.rows().end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.current_a < b.current_a; });
    if (rows.size() < 2) throw AnalysisError("calibration needs at least two currents");
    std::vector<nv::CalibrationRow> low;
    for (const auto& row : rows)
      if (row.current_a <= c.sense.low_current_max_a) low.push_back(row);
    if (low.size() < 2) throw AnalysisError("calibration needs two rows at or below sense.low_current_max_a");
    const double i0 = rows.front().current_a;
    Json cj;
    Json alphas = Json::array();
    for (std::size_t i = 1; i < rows.size(); ++i)
      alphas.push_back({{"from_a", i0}, {"to_a", rows[i].current_a},
                        {"alpha_t_per_a", nv::conversion_factor(cal, i0, rows[i].current_a)}});
    cj["alphas"] = alphas;
    const double alpha_low = nv::conversion_factor(cal, low.front().current_a, low.back().current_a);
    const double sigma_low = nv::CurrentCalibration(low).mean_std_field();
    cj["low_current_alpha_t_per_a"] = alpha_low;
    cj["low_current_mean_std_t"] = sigma_low;
    cj["current_resolution_a"] = nv::current_resolution(sigma_low, alpha_low);
    r["calibration"] = cj;
    log << fmt::format("calibration: alpha = {:.4g} uT/A, sigma_B = {:.4g} nT, resolution = {:.4g} mA\n",
                       alpha_low * 1e6, sigma_low * 1e9, nv::current_resolution(sigma_low, alpha_low) * 1e3);
  }
  return r;
}

Json cmd_psd(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const auto y = condition(acquire(ctx), c);
  const std::size_t seg = std::min(c.psd.segment_len, y.size());
  const auto spec = analysis::asd_welch(y, seg, c.psd.overlap);
  out.write("psd.csv", [&](std::ostream& f) { io::write_asd_csv(f, spec); });

  const auto excl = psd_exclusions(c);
  const double floor = analysis::noise_floor(spec, {c.psd.band_lo_hz, c.psd.band_hi_hz}, excl);
  Json r;
  r["resolution_bw_hz"] = spec.resolution_bw_hz;
  r["segment_len"] = seg;
  r["band_hz"] = {c.psd.band_lo_hz, c.psd.band_hi_hz};
  r["noise_floor_t_sqrthz"] = floor;
  log << fmt::format("noise floor {:.4g} nT/sqrt(Hz) in {}-{} Hz\n", floor * 1e9, c.psd.band_lo_hz, c.psd.band_hi_hz);

  // Collect every known line first so local floors skip all of them.
  std::vector<double> tone_freqs;
  if (c.scenario.coil) tone_freqs.push_back(c.scenario.coil->coil.drive_freq_hz);
  for (const auto& t : c.scenario.tones) tone_freqs.push_back(t.freq_hz);
  const auto all_lines = psd_exclusions(c, tone_freqs);
  const double nyq = y.fs() / 2.0;
  const auto local_floor = [&](double f) {
    const double hw = std::max(20.0, 20.0 * spec.resolution_bw_hz);
    return analysis::noise_floor(spec, {std::max(spec.resolution_bw_hz, f - hw), std::min(nyq, f + hw)}, all_lines);
  };

  Json peaks = Json::array();
  for (double f : c.psd.exclude_hz) {
    if (f >= nyq) continue;
    // strongest bin within the exclusion band, so scalloping cannot hide a line
    double a = 0.0;
    for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k)
      if (std::abs(spec.freqs_hz[k] - f) <= c.psd.exclude_half_width_hz) a = std::max(a, spec.asd[k]);
    const double lf = local_floor(f);
    peaks.push_back({{"freq_hz", f},
                     {"asd_t_sqrthz", a},
                     {"ratio_to_floor", a / floor},
                     {"local_floor_t_sqrthz", lf},
                     {"ratio_to_local_floor", a / lf}});
  }
  r["peaks"] = peaks;

  // Known tones in the scenario: single-bin amplitude against the local floor.
  Json tones = Json::array();
  for (double f : tone_freqs) {
    if (f >= nyq) continue;
    const double lf = local_floor(f);
    const double amp = analysis::tone_amplitude(y, f, y.t0(), y.t0() + y.duration());
    const double noise = analysis::tone_noise_level(lf, y.duration());
    tones.push_back({{"freq_hz", f},
                     {"amplitude_t", amp},
                     {"local_floor_t_sqrthz", lf},
                     {"noise_level_t", noise},
                     {"snr", amp / noise}});
    log << fmt::format("tone {} Hz: {:.4g} nT, SNR {:.3g}\n", f, amp * 1e9, amp / noise);
  }
  r["tones"] = tones;
  return r;
}

Json cmd_allan(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const auto y = condition(acquire(ctx), c);
  const auto taus = analysis::log_spaced_taus(y, c.allan.taus_per_decade);
  if (taus.size() < 2) throw AnalysisError("series too short for an Allan curve");
  const auto curve = analysis::allan_deviation(y, taus);
  out.write("allan.csv", [&](std::ostream& f) { io::write_allan_csv(f, curve); });
  const double lo = c.allan.slope_lo_s > 0.0 ? c.allan.slope_lo_s : curve.taus_s.front();
  const double hi = c.allan.slope_hi_s > 0.0 ? c.allan.slope_hi_s : curve.taus_s.back();
  const double slope = analysis::loglog_slope(curve.taus_s, curve.adev, lo, hi);
  Json r;
  r["taus"] = curve.taus_s.size();
  r["slope_range_s"] = {lo, hi};
  r["slope"] = slope;
  r["adev_at_min_tau_t"] = curve.adev.front();
  log << fmt::format("Allan slope {:.3f} over {:.3g}-{:.3g} s\n", slope, lo, hi);
  return r;
}

Json cmd_fit(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const double f0 = c.coil.drive_freq_hz;
  std::vector<analysis::DistancePoint> points;
  std::vector<double> floors;
  for (std::size_t i = 0; i < c.fit.distances_m.size(); ++i) {
    chain::Scenario s = c.scenario;
    s.coil = chain::CoilLink{c.coil, c.fit.distances_m[i]};
    s.noise.seed = ctx.seed + i;
    const auto x = chain::synth_scenario(s, c.sample_rate_hz, c.fit.window_s);
    const double amp = analysis::tone_amplitude(x, f0, x.t0(), x.t0() + x.duration());
    const auto spec = analysis::asd_welch(x, std::min(c.psd.segment_len, x.size()), c.psd.overlap);
    const double nyq = c.sample_rate_hz / 2.0;
    const double hw = c.fit.noise_band_half_width_hz;
    const double f_lo = std::max(spec.resolution_bw_hz, f0 - hw);
    const double floor = analysis::noise_floor(spec, {f_lo, std::min(nyq, f0 + hw)}, psd_exclusions(c, {f0}));
    // At high SNR only the in-phase part of the noise moves the amplitude
    // estimate, i.e. half the power counted by tone_noise_level.
    const double sigma = analysis::tone_noise_level(floor, x.duration()) / std::sqrt(2.0);
    points.push_back({c.fit.distances_m[i], amp, sigma});
    floors.push_back(floor);
  }
  const auto fit = analysis::fit_distance_model(points, c.coil.radius_m);
  const double truth = channel::distance_model_coefficient(c.coil) * c.scenario.projection_cos;

  out.write("fit.csv", [&](std::ostream& f) {
    f << "distance_m,field_t,sigma_t,model_t,budget_t\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      const double budget =
          analysis::distance_error_budget(p.distance_m, c.fit.position_sigma_m, fit, floors[i], 1.0 / c.fit.window_s);
      f << io::format_double(p.distance_m) << ',' << io::format_double(p.field_t) << ','
        << io::format_double(p.sigma_t) << ',' << io::format_double(fit.model(p.distance_m)) << ','
        << io::format_double(budget) << '\n';
    }
  });

  Json r;
  r["fixed_radius_m"] = fit.fixed_r;
  r["c_tm3"] = fit.c;
  r["c_stderr_tm3"] = fit.c_stderr();
  r["y0_t"] = fit.y0;
  r["y0_stderr_t"] = fit.y0_stderr();
  r["chi2"] = fit.chi2;
  r["dof"] = points.size() - 2;
  r["c_truth_tm3"] = truth;
  r["c_pull"] = (fit.c - truth) / fit.c_stderr();
  r["covariance"] = fit.covariance;
  log << fmt::format("c = {:.6g} +- {:.2g} T m^3 (truth {:.6g}), y0 = {:.3g} T\n", fit.c, fit.c_stderr(), truth, fit.y0);
  return r;
}

double link_amplitude(const RunConfig& c) {
  return channel::coil_axial_field(c.coil, c.modem.distance_m) * std::abs(c.scenario.projection_cos);
}

FieldTimeSeries transmit(const Context& ctx) {
  const auto& c = ctx.config;
  const auto plan = tone_plan(c);
  plan.validate(c.sample_rate_hz);
  const double amp = link_amplitude(c);
  const auto w = modem::modulate(c.modem.message, plan, c.sample_rate_hz, amp);
  const auto lead = static_cast<std::size_t>(std::llround(c.modem.lead_s * c.sample_rate_hz));
  const auto tail = static_cast<std::size_t>(std::llround(c.modem.tail_s * c.sample_rate_hz));
  std::vector<double> v(lead + w.size() + tail, 0.0);
  std::copy(w.samples().begin(), w.samples().end(), v.begin() + static_cast<std::ptrdiff_t>(lead));
  // The link is AC coupled: only the noise environment rides along.
  const auto n = channel::synth_noise(c.scenario.noise, c.sample_rate_hz, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += n[i];
  return FieldTimeSeries(c.sample_rate_hz, std::move(v));
}

std::string bit_string(const modem::ToneMask& bits) {
  std::string s;
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Json cmd_tx(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  const auto x = transmit(ctx);
  out.write("tx.csv", [&](std::ostream& f) { io::write_series_csv(f, x); });
  Json r;
  r["message"] = c.modem.message;
  r["amplitude_t"] = link_amplitude(c);
  r["duration_s"] = x.duration();
  r["preamble_start_s"] = c.modem.lead_s;
  Json symbols = Json::array();
  for (char ch : c.modem.message) symbols.push_back({{"char", std::string(1, ch)}, {"bits", bit_string(modem::symbol_encode(ch).tone_mask)}});
  r["symbols"] = symbols;
  log << fmt::format("wrote {:.3g} s carrying \"{}\" at {:.4g} nT\n", x.duration(), c.modem.message,
                     link_amplitude(c) * 1e9);
  return r;
}

Json cmd_rx(const Context& ctx, const OutputDir& out, std::ostream& log) {
  const auto& c = ctx.config;
  auto raw = ctx.options->input_path.empty() ? transmit(ctx) : io::read_series_csv_file(ctx.options->input_path);
  const double fs = raw.fs(), t0 = raw.t0();
  auto v = std::move(raw).release();
  remove_mean(v);
  const FieldTimeSeries x(fs, std::move(v), t0);

  auto plan = tone_plan(c);
  plan.validate(fs);
  Json r;
  std::string rule;
  if (c.modem.threshold_t) {
    rule = "absolute";
  } else if (c.modem.threshold_snr) {
    const auto spec = analysis::asd_welch(x, std::min(c.psd.segment_len, x.size()), c.psd.overlap);
    const double lo = std::max(spec.resolution_bw_hz, plan.tone_freqs_hz.front() - 20.0);
    const double hi = std::min(fs / 2.0, plan.tone_freqs_hz.back() + 20.0);
    const double floor = analysis::noise_floor(spec, {lo, hi}, psd_exclusions(c, plan.tone_freqs_hz));
    plan.threshold_t = *c.modem.threshold_snr * analysis::tone_noise_level(floor, plan.symbol_window_s);
    r["measured_floor_t_sqrthz"] = floor;
    rule = "snr";
  } else {
    plan.threshold_t = link_amplitude(c) / 2.0;
    rule = "half expected amplitude";
  }
  r["threshold_rule"] = rule;
  r["threshold_t"] = plan.threshold_t;

  const double offset = modem::sync_offset(x, plan);
  const auto history = modem::demodulate(x, plan, offset);
  r["offset_s"] = offset;
  r["message"] = history.message();
  Json rows = Json::array();
  for (const auto& row : history.newest_first())
    rows.push_back({{"window", row.window_index},
                    {"bits", bit_string(row.bits)},
                    {"char", row.decoded_char ? Json(std::string(1, *row.decoded_char)) : Json(nullptr)},
                    {"corrected", row.corrected}});
  r["rows"] = rows;
  out.write("waterfall.csv", [&](std::ostream& f) {
    f << "window,tone_hz,amplitude_t\n";
    for (const auto& row : history.rows())
      for (std::size_t k = 0; k < modem::kSymbolBits; ++k)
        f << row.window_index << ',' << io::format_double(plan.tone_freqs_hz[k]) << ','
          << io::format_double(row.amplitudes_t[k]) << '\n';
  });
  log << fmt::format("preamble at {:.4g} s, message \"{}\"\n", offset, history.message());
  return r;
}

Json cmd_sensitivity(const Context& ctx, const OutputDir&, std::ostream& log) {
  const auto& p = ctx.config.sensor;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double eta = nv::shot_noise_sensitivity(p);
  Json r;
  r["inputs"] = {{"linewidth_hz", p.linewidth_hz},
                 {"contrast", p.contrast},
                 {"photovoltage_v", p.photovoltage_v},
                 {"detector_gain_v_per_w", p.detector_gain_v_per_w},
                 {"wavelength_m", p.wavelength_m}};
  r["eta_t_sqrthz"] = eta;
  log << fmt::format("shot-noise limit {:.4g} pT/sqrt(Hz)\n", eta * 1e12);
  return r;
}

using Handler = Json (*)(const Context&, const OutputDir&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"odmr", cmd_odmr}, {"sense", cmd_sense}, {"psd", cmd_psd}, {"allan", cmd_allan},
      {"fit", cmd_fit},   {"tx", cmd_tx},       {"rx", cmd_rx},   {"sensitivity", cmd_sensitivity},
  };
  return table;
}

}  // namespace

Json run_command(const std::string& name, const CommandOptions& options, std::ostream& out) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) throw ConfigError(fmt::format("unknown subcommand '{}'", name));
  const auto ctx = load(options);
  OutputDir dir(options.out_dir);
  auto report = report_header(name, ctx);
  report["results"] = it->second(ctx, dir, out);
  dir.write_json(name + ".json", report);
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"NV-center magnetometer simulation and analysis"};
  app.require_subcommand(1);
  CommandOptions options;
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> help{
      {"odmr", "synthesize an ODMR spectrum and extract the resonance pair"},
      {"sense", "run the measurement chain and report field statistics per current"},
      {"psd", "amplitude spectral density and noise floor"},
      {"allan", "overlapping Allan deviation"},
      {"fit", "distance sweep of the coil field and model fit"},
      {"tx", "modulate a message into a field time series"},
      {"rx", "synchronize and decode a received field time series"},
      {"sensitivity", "shot-noise-limited sensitivity"},
  };
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("--scenario", options.scenario_path, "scenario YAML file")->check(CLI::ExistingFile);
    sub->add_option("--out", options.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "noise seed (overrides noise.seed)");
    if (name == "psd" || name == "allan" || name == "rx")
      sub->add_option("--input", options.input_path, "series CSV to analyze instead of synthesizing")
          ->check(CLI::ExistingFile);
    if (name == "sense")
      sub->add_option("--calibration", options.calibration_path, "calibration CSV (current_a,mean_field_t,std_field_t)")
          ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const auto* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) options.seed = seed;

  try {
    run_command(chosen->get_name(), options, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AnalysisError& e) {
    err << "analysis error: " << e.what() << '\n';
    return kExitAnalysis;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace nvmag::cli
