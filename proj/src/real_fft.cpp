#include "real_fft.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace nvmag::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plan {
  fftw_plan handle = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plan_(std::make_unique<Plan>()) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::lock_guard lock(planner_mutex());
  plan_->handle = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                       reinterpret_cast<fftw_complex*>(out.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_->handle) throw std::runtime_error("FFTW could not create a plan");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (plan_ && plan_->handle) fftw_destroy_plan(plan_->handle);
}

void RealFft::transform(std::span<double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw std::invalid_argument("FFT buffer size mismatch");
  fftw_execute_dft_r2c(plan_->handle, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace nvmag::detail
