#pragma once

#include <cmath>
#include <numbers>

namespace ndgyro {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Rotation rates are carried in Hz (revolutions per second) internally.
// Degrees per second only appear at I/O boundaries.
inline constexpr double kDegreesPerRevolution = 360.0;

constexpr double hz_to_dps(double hz) { return hz * kDegreesPerRevolution; }
constexpr double dps_to_hz(double dps) { return dps / kDegreesPerRevolution; }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 2*pi).
inline double wrap_phase(double phase) {
  double wrapped = std::fmod(phase, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  // fmod of a value just below a multiple of 2*pi can round up to 2*pi.
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

}  // namespace ndgyro
