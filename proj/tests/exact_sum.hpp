#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace fixtures {

// Correctly rounded sum of doubles (Shewchuk's non-overlapping partials
// with the final half-way correction, as in Python's math.fsum).
inline double exact_sum(std::span<const double> xs) {
  std::vector<double> partials;
  for (double x : xs) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

// Overlapping Allan deviation straight from its definition: every block
// mean summed afresh (correctly rounded), then the ordered sum of squared
// differences.
inline double brute_force_adev(std::span<const double> x, std::size_t m) {
  const std::size_t n = x.size();
  std::vector<double> ybar(n - m + 1);
  for (std::size_t k = 0; k + m <= n; ++k) ybar[k] = exact_sum(x.subspan(k, m)) / static_cast<double>(m);
  const std::size_t terms = n - 2 * m + 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < terms; ++k) {
    const double d = ybar[k + m] - ybar[k];
    acc += d * d;
  }
  return std::sqrt(acc / (2.0 * static_cast<double>(terms)));
}

}  // namespace fixtures
