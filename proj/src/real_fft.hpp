#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace nvmag::detail {

/// Forward real-to-complex FFT of a fixed length, backed by an FFTW plan.
///
/// The plan is created under a global lock (FFTW's planner is not
/// reentrant); transform() may then be called from any number of threads as
/// long as each thread passes its own buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // in: n real samples (overwritten scratch is not required); out: n/2+1 bins.
  void transform(std::span<double> in, std::span<std::complex<double>> out) const;

 private:
  std::size_t n_;
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

}  // namespace nvmag::detail
