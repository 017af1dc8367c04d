#pragma once

#include <cmath>
#include <string>

#include "nvmag/field_channel.hpp"

namespace fixtures {

inline std::string source_path(const std::string& rel) { return std::string(NVMAG_SOURCE_DIR) + "/" + rel; }

// Transmitter coil: N = 191, I = 0.2 A, D = 0.57 m, f = 120 Hz.
inline nvmag::channel::CoilSpec reference_coil() { return {191, 0.2, 0.285, 120.0, 0.0}; }

// Detector gain recovered by inverting the shot-noise formula against
// 585 pT/sqrt(Hz) at 1.1 MHz, 0.94 %, 3.3 V, 532 nm (CODATA 2018 constants).
inline constexpr double kDerivedDetectorGain = 292728.109082441;

// Closed-form on-axis loop field at the centre, mu0 N I / (2R).
inline double loop_centre_field(const nvmag::channel::CoilSpec& c) {
  return 1.25663706212e-6 * c.turns * c.current_a / (2.0 * c.radius_m);
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace fixtures
