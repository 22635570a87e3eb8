#pragma once

// Optical readout with photon shot noise, and the shot-noise-limited
// rotation sensitivity that follows from it.

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ndgyro/spin.hpp"
#include "ndgyro/units.hpp"

namespace ndgyro {

struct DetectorConfig {
  double V0 = 15.0;          // mean fluorescence voltage, V
  double G = 1.75e5;         // transimpedance gain, V/A
  double contrast = 0.015;   // (V_H - V_L) / V0
  double t_R = 17e-6;        // effective readout window, s
  bool balanced = true;
  double T2star = 1.95e-3;   // s, used by the sensitivity budget
  double t_meas = 1.92e-3;   // single-measurement duration, s
  // Weight of each level (+1, 0, -1) in the bright projection. The DQ
  // Ramsey observable separates |0> from the |+/-1> pair.
  std::array<double, 3> bright_weights = {1.0, 0.0, 1.0};

  double V_high() const { return V0 * (1.0 + 0.5 * contrast); }
  double V_low() const { return V0 * (1.0 - 0.5 * contrast); }

  void validate() const {
    if (!(V0 > 0 && G > 0 && t_R > 0 && T2star > 0 && t_meas > 0))
      throw std::invalid_argument("DetectorConfig: V0, G, t_R, T2star, t_meas must be positive");
    if (!(contrast > 0.0 && contrast < 1.0))
      throw std::invalid_argument("DetectorConfig: contrast must lie in (0, 1)");
    for (double w : bright_weights)
      if (!(w >= 0.0 && w <= 1.0))
        throw std::invalid_argument("DetectorConfig: bright weights must lie in [0, 1]");
  }
};

inline double bright_projection(const Populations& p, const DetectorConfig& d) {
  return d.bright_weights[kPlus] * p.p_plus + d.bright_weights[kZero] * p.p_zero +
         d.bright_weights[kMinus] * p.p_minus;
}

/// Photoelectrons collected over n_meas readouts of length t_R.
inline double photoelectron_count(const DetectorConfig& d, const PhysicalConstants& c, double n_meas = 1.0) {
  if (!(n_meas >= 1.0)) throw std::invalid_argument("photoelectron_count: N_meas must be >= 1");
  return (d.V0 / (d.G * c.q_e)) * (d.t_R * n_meas);
}

/// delta V_PSN / V0. Balanced detection doubles the shot-noise photons
/// without adding signal, hence the extra sqrt(2).
inline double psn_fractional_uncertainty(const DetectorConfig& d, const PhysicalConstants& c,
                                         double n_meas = 1.0) {
  const double np = photoelectron_count(d, c, n_meas);
  return (d.balanced ? std::sqrt(2.0) : 1.0) / std::sqrt(np);
}

/// Mean readout voltage for the given populations; Gaussian shot noise is
/// added when an RNG is supplied.
template <class Rng = std::mt19937_64>
double readout_voltage(const Populations& p, const DetectorConfig& d, const PhysicalConstants& c,
                       Rng* rng = nullptr, double n_meas = 1.0) {
  const double mean = d.V_low() + (d.V_high() - d.V_low()) * bright_projection(p, d);
  if (rng == nullptr) return mean;
  std::normal_distribution<double> noise(0.0, psn_fractional_uncertainty(d, c, n_meas) * d.V0);
  return mean + noise(*rng);
}

/// S = V / V_pump. The pump-level reference is long-integrated, so its own
/// noise is neglected and delta S = delta V / V_pump.
inline double normalize_contrast(double V, double V_pump) {
  if (!(V_pump > 0.0)) throw std::invalid_argument("normalize_contrast: V_pump must be positive");
  return V / V_pump;
}

struct RotationSensitivity {
  double hz_per_rthz;    // Hz / sqrt(Hz)
  double dps_per_rts;    // (deg/s) / sqrt(Hz) == deg / sqrt(s)
};

/// Shot-noise-limited rotation sensitivity at free-precession time tau:
///   (1/2pi) (1 / (tau e^{-tau/T2*})) (1/C) sqrt(2 G q_e / (V0 t_R)) sqrt(t_meas).
/// The leading 1/2 reflects the doubled rotation response of the DQ splitting.
inline RotationSensitivity psn_rotation_sensitivity(const DetectorConfig& d, const PhysicalConstants& c,
                                                    double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("psn_rotation_sensitivity: tau must be positive");
  const double fractional = (d.balanced ? std::sqrt(2.0) : 1.0) * std::sqrt(d.G * c.q_e / (d.V0 * d.t_R));
  const double hz = (1.0 / kTwoPi) * (1.0 / (tau * std::exp(-tau / d.T2star))) * (1.0 / d.contrast) *
                    fractional * std::sqrt(d.t_meas);
  return {hz, hz_to_dps(hz)};
}

}  // namespace ndgyro
