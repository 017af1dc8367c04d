#pragma once

#include <iosfwd>
#include <string>

#include "nvmag/analysis.hpp"
#include "nvmag/time_series.hpp"

// Plot-ready CSV formats. Values are written with 17 significant digits so
// that reading them back reproduces the doubles exactly.
namespace nvmag::io {

std::string format_double(double v);

// `time_s,field_t`
void write_series_csv(std::ostream& out, const FieldTimeSeries& x);
// Sample rate is recovered from the time column; it must be uniform.
FieldTimeSeries read_series_csv(std::istream& in);
FieldTimeSeries read_series_csv_file(const std::string& path);

// `freq_hz,asd_t_sqrthz`
void write_asd_csv(std::ostream& out, const analysis::AsdSpectrum& spec);
// `tau_s,adev_t`
void write_allan_csv(std::ostream& out, const analysis::AllanCurve& curve);

}  // namespace nvmag::io
