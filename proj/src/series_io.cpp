#include "nvmag/series_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include <fmt/core.h>

#include "nvmag/errors.hpp"

namespace nvmag {

FieldTimeSeries::FieldTimeSeries(double fs_hz, std::vector<double> samples_t, double t0_s)
    : fs_(fs_hz), t0_(t0_s), samples_(std::move(samples_t)) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw std::invalid_argument("sample rate must be positive and finite");
  if (!std::isfinite(t0_)) throw std::invalid_argument("series start time must be finite");
  for (double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("field samples must be finite");
}

}  // namespace nvmag

namespace nvmag::io {

namespace {

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::invalid_argument(fmt::format("CSV header must be '{}', got '{}'", header, line));
}

bool parse_number(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_series_csv(std::ostream& out, const FieldTimeSeries& x) {
  out << "time_s,field_t\n";
  for (std::size_t i = 0; i < x.size(); ++i) out << fmt::format("{:.17g},{:.17g}\n", x.time(i), x[i]);
}

FieldTimeSeries read_series_csv(std::istream& in) {
  expect_header(in, "time_s,field_t");
  std::vector<double> times, values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    double t = 0.0, v = 0.0;
    if (comma == std::string::npos || !parse_number(std::string_view(line).substr(0, comma), t) ||
        !parse_number(std::string_view(line).substr(comma + 1), v))
      throw std::invalid_argument(fmt::format("malformed series row '{}'", line));
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw std::invalid_argument("series CSV needs at least two rows");

  const double span = times.back() - times.front();
  const double steps = static_cast<double>(times.size() - 1);
  if (!(span > 0.0)) throw std::invalid_argument("series time column must increase");
  double fs = steps / span;
  // Timestamps are t0 + i/fs printed to 17 digits; snap the small residue
  // that leaves on whole-number rates.
  if (std::abs(fs - std::round(fs)) < 1e-9 * fs) fs = std::round(fs);
  const double dt = 1.0 / fs;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt)
      throw std::invalid_argument(fmt::format("series is not uniformly sampled near row {}", i + 1));
  return FieldTimeSeries(fs, std::move(values), times.front());
}

FieldTimeSeries read_series_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open series file '{}'", path));
  return read_series_csv(in);
}

void write_asd_csv(std::ostream& out, const analysis::AsdSpectrum& spec) {
  out << "freq_hz,asd_t_sqrthz\n";
  for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k)
    out << fmt::format("{:.17g},{:.17g}\n", spec.freqs_hz[k], spec.asd[k]);
}

void write_allan_csv(std::ostream& out, const analysis::AllanCurve& curve) {
  out << "tau_s,adev_t\n";
  for (std::size_t k = 0; k < curve.taus_s.size(); ++k)
    out << fmt::format("{:.17g},{:.17g}\n", curve.taus_s[k], curve.adev[k]);
}

}  // namespace nvmag::io
