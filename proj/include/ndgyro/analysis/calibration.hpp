#pragma once

// Calibration coefficient alpha = dS/dnu and the conversion of working-point
// signals into rotation rates. alpha is carried as a signed fraction per Hz;
// percent and degree forms are derived on request.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ndgyro/analysis/fit.hpp"
#include "ndgyro/errors.hpp"
#include "ndgyro/series.hpp"
#include "ndgyro/units.hpp"

namespace ndgyro {

struct Calibration {
  double alpha = 0.0;  // fraction per Hz, signed
  // |cos| of the fitted fringe phase at tau_wp; 1 on the steepest slope.
  double alignment = 1.0;
  bool misaligned = false;

  double percent_per_hz() const { return 100.0 * alpha; }
  double percent_per_dps() const { return 100.0 * alpha / kDegreesPerRevolution; }
};

/// Below this |cos| of the fringe phase at tau_wp the working point is
/// flagged as off the steepest slope.
inline constexpr double kAlignmentThreshold = 0.99;

/// alpha = 4 pi tau_wp A for a fringe amplitude A at the working point.
inline double calibration_from_amplitude(double amplitude, double tau_wp) {
  if (!(tau_wp > 0.0)) throw std::invalid_argument("calibration_from_amplitude: tau_wp must be positive");
  return 4.0 * kPi * tau_wp * amplitude;
}

/// dS/dnu of the fitted fringe at tau_wp. The fringe frequency moves by
/// 2 nu, so dS/dnu = 4 pi tau A e^{-tau/T2*} cos(2 pi f tau + phi).
inline Calibration calibration_from_fringes(const FringeFit& fit, double tau_wp) {
  if (!(tau_wp > 0.0)) throw std::invalid_argument("calibration_from_fringes: tau_wp must be positive");
  const double c = std::cos(kTwoPi * fit.f * tau_wp + fit.phi);
  Calibration cal;
  cal.alpha = calibration_from_amplitude(fit.amplitude_at(tau_wp), tau_wp) * c;
  cal.alignment = std::abs(c);
  cal.misaligned = cal.alignment < kAlignmentThreshold;
  return cal;
}

/// alpha = 2 (tau_wp / f) dS/dtau.
inline double calibration_from_slope(double dS_dtau, double tau_wp, double f) {
  if (!(f > 0.0)) throw std::invalid_argument("calibration_from_slope: fringe frequency must be positive");
  return 2.0 * (tau_wp / f) * dS_dtau;
}

/// dS/dtau at `center` from a least-squares cubic through the series. The
/// series should cover a small fraction of a fringe period around center.
inline double local_slope(const FringeSeries& series, double center) {
  series.validate();
  const std::size_t n = series.size();
  if (n < 4) throw SeriesError("local_slope: need at least 4 points");
  const double half = 0.5 * (series.taus.back() - series.taus.front());
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (series.taus[i] - center) / half;
    x(i, 0) = 1.0;
    x(i, 1) = u;
    x(i, 2) = u * u;
    x(i, 3) = u * u * u;
    y(i) = series.values[i];
  }
  const Eigen::Vector4d coef = x.colPivHouseholderQr().solve(y);
  return coef(1) / half;
}

struct LinearRegression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearRegression linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw SeriesError("linear_regression: column lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw SeriesError("linear_regression: need at least 3 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw SeriesError("linear_regression: x has no spread");
  LinearRegression r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.slope * x[i] + r.intercept);
    sse += e * e;
  }
  const double s2 = sse / static_cast<double>(n - 2);
  r.slope_stderr = std::sqrt(s2 / sxx);
  r.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  r.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return r;
}

/// alpha from a rotation sweep: regression of S on the applied rate (Hz).
inline LinearRegression calibration_from_sweep(const GyroTimeSeries& stream) {
  return linear_regression(stream.nu_true, stream.S);
}

/// nu_hat = (S - baseline) / alpha, in Hz.
inline std::vector<double> rotation_from_signal(const std::vector<double>& S, double alpha, double baseline) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw std::domain_error("rotation_from_signal: alpha must be nonzero");
  std::vector<double> nu(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) nu[i] = (S[i] - baseline) / alpha;
  return nu;
}

/// Fills stream.nu_hat and records alpha in the metadata.
inline void apply_calibration(GyroTimeSeries& stream, double alpha, double baseline) {
  stream.nu_hat = rotation_from_signal(stream.S, alpha, baseline);
  stream.meta.alpha = alpha;
}

}  // namespace ndgyro
