#pragma once

#include <numbers>

// Everything crossing the public API is in cycles (Hz), Gauss, seconds and
// radians. Hamiltonians and propagators work in angular frequency (rad/s);
// these helpers are the only place the 2*pi enters.
namespace nvgyro {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double to_angular(double hz) { return kTwoPi * hz; }
constexpr double to_cycles(double rad_per_s) { return rad_per_s / kTwoPi; }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace nvgyro
