#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ndgyro {

/// Signal sampled on a grid of free-precession times.
struct FringeSeries {
  std::vector<double> taus;    // s, strictly increasing
  std::vector<double> values;  // fractional fluorescence (dimensionless)
  std::optional<std::vector<double>> sigma;

  std::size_t size() const { return taus.size(); }

  void validate() const {
    if (taus.size() != values.size() || (sigma && sigma->size() != taus.size()))
      throw std::invalid_argument("FringeSeries: column lengths differ");
    for (std::size_t i = 1; i < taus.size(); ++i)
      if (!(taus[i] > taus[i - 1])) throw std::invalid_argument("FringeSeries: taus must be strictly increasing");
  }
};

struct GyroMeta {
  double alpha = 0.0;     // calibration used for nu_hat, 1/Hz
  double tau_wp = 0.0;    // s
  std::uint64_t seed = 0;
};

/// Working-point stream: one combined 4-Ramsey sample per cycle.
struct GyroTimeSeries {
  std::vector<double> t;        // s, cycle start
  std::vector<double> S;        // combined signal
  std::vector<double> nu_true;  // rotation rate applied during the cycle, Hz
  std::vector<double> nu_hat;   // calibrated estimate, Hz (empty until calibrated)
  GyroMeta meta;

  std::size_t size() const { return t.size(); }
};

struct AllanSeries {
  std::vector<double> tau_avg;  // s
  std::vector<double> adev;     // same unit as the input samples
  std::vector<std::size_t> n_samples;  // number of squared differences averaged

  std::size_t size() const { return tau_avg.size(); }
};

}  // namespace ndgyro
