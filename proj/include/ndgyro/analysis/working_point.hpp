#pragma once

// Working-point selection and the phase-wrapping limits on linearity and
// dynamic range.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ndgyro/units.hpp"

namespace ndgyro {

struct WorkingPoint {
  double tau_fixed_cycle = 0.0;  // maximizes tau e^{-tau/T2*}
  double tau_duty_cycle = 0.0;   // maximizes tau e^{-tau/T2*} / sqrt(tau + overhead)
  double tau_wp = 0.0;           // tau_duty_cycle snapped to cos(2 pi f tau) = 0
};

/// Nearest tau > 0 with sin(2 pi f tau + phi) = 0, the steepest points of a
/// fringe A sin(2 pi f tau + phi).
inline double snap_to_zero_crossing(double tau, double f, double phi) {
  if (!(tau > 0.0 && f > 0.0)) throw std::invalid_argument("snap_to_zero_crossing: tau and f must be positive");
  const double offset = wrap_phase(phi) / kPi;  // in half-periods
  double k = std::round(2.0 * f * tau + offset);
  if (k - offset <= 0.0) k = std::floor(offset) + 1.0;
  return (k - offset) / (2.0 * f);
}

/// Nearest tau > 0 with cos(2 pi f tau) = 0, i.e. tau = (k + 1/2) / (2 f).
inline double snap_to_quadrature(double tau, double f) { return snap_to_zero_crossing(tau, f, kPi / 2.0); }

inline WorkingPoint select_working_point(double T2star, double f, double overhead) {
  if (!(T2star > 0.0 && f > 0.0 && overhead >= 0.0))
    throw std::invalid_argument("select_working_point: T2*, f must be positive and overhead non-negative");
  // Stationary point of log(tau) - tau/T - log(tau + o)/2:
  // 2 tau^2 - (T - 2o) tau - 2 T o = 0.
  const double b = T2star - 2.0 * overhead;
  WorkingPoint wp;
  wp.tau_fixed_cycle = T2star;
  wp.tau_duty_cycle = 0.25 * (b + std::sqrt(b * b + 16.0 * T2star * overhead));
  wp.tau_wp = snap_to_quadrature(wp.tau_duty_cycle, f);
  return wp;
}

/// Rotation rate at which the accumulated DQ phase reaches one radian.
inline double nu0_from_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("nu0_from_tau: tau must be positive");
  return 1.0 / (4.0 * kPi * tau);
}

struct Linearity {
  double nu_meas = 0.0;  // Hz
  double epsilon = 0.0;  // (nu - nu_meas) / nu
};

inline Linearity linearity(double nu, double nu0) {
  if (!(nu0 > 0.0)) throw std::invalid_argument("linearity: nu0 must be positive");
  Linearity l;
  l.nu_meas = nu0 * std::sin(nu / nu0);
  l.epsilon = nu != 0.0 ? (nu - l.nu_meas) / nu : 0.0;
  return l;
}

struct DynamicRange {
  double hz = 0.0;
  double dps = 0.0;
};

/// Half-width of the rate span whose fractional nonlinearity stays below
/// epsilon, from the leading term epsilon = (nu/nu0)^2 / 6.
inline DynamicRange dynamic_range(double epsilon, double nu0) {
  if (!(epsilon >= 0.0 && epsilon < 0.1)) throw std::invalid_argument("dynamic_range: epsilon must lie in [0, 0.1)");
  if (!(nu0 > 0.0)) throw std::invalid_argument("dynamic_range: nu0 must be positive");
  const double hz = nu0 * std::sqrt(6.0 * epsilon);
  return {hz, hz_to_dps(hz)};
}

}  // namespace ndgyro
