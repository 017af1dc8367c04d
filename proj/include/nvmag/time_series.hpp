#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace nvmag {

/// Uniformly sampled magnetic field in tesla.
///
/// Construction validates fs > 0 and that every sample is finite; a
/// FieldTimeSeries is an immutable value after that.
class FieldTimeSeries {
 public:
  FieldTimeSeries(double fs_hz, std::vector<double> samples_t, double t0_s = 0.0);

  double fs() const { return fs_; }
  double t0() const { return t0_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration() const { return static_cast<double>(samples_.size()) / fs_; }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) / fs_; }

  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  // Moves the sample buffer out; the series is left empty.
  std::vector<double> release() && { return std::move(samples_); }

 private:
  double fs_;
  double t0_;
  std::vector<double> samples_;
};

}  // namespace nvmag
