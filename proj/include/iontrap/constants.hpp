#pragma once

#include <cmath>

// Physical constants (SI) and unit helpers. All frequencies are stored as
// angular (rad/s) inside the library; configuration files and JSON output use
// ordinary Hz and convert at the boundary.

namespace iontrap {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kAmu = 1.66053906660e-27;         // kg
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kCoulomb = 8.9875517873681764e9;  // N m^2 / C^2

// 88Sr+ defaults
inline constexpr double kSr88MassU = 87.9056122571;
inline constexpr double kSr88Mass = kSr88MassU * kAmu;    // kg
inline constexpr double kQubitWavelength = 674e-9;        // m, S1/2 <-> D5/2
inline constexpr double kDetectionWavelength = 422e-9;    // m
inline constexpr double kDStateLifetime = 0.390;          // s, 4D5/2

inline constexpr double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / kTwoPi; }

}  // namespace iontrap
