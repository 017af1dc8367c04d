#pragma once

#include <numbers>

// SI values, CODATA 2018.
namespace nvmag::constants {

inline constexpr double kPlanck = 6.62607015e-34;          // J s
inline constexpr double kElectronG = 2.00231930436256;     // |g_e|
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kMu0 = 1.25663706212e-6;           // N/A^2

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace nvmag::constants
