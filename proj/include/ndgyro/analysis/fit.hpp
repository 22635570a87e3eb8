#pragma once

// Damped-sine fit R(tau) = A exp(-tau/T2*) sin(2 pi f tau + phi) + offset by
// Levenberg-Marquardt. Initial values come from the spectral peak (f), a
// log-linear fit to the demodulated envelope (A, T2*) and a quadrature
// projection at fixed f and T2* (phi).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ndgyro/analysis/spectrum.hpp"
#include "ndgyro/errors.hpp"
#include "ndgyro/series.hpp"
#include "ndgyro/units.hpp"

namespace ndgyro {

using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Vector5d = Eigen::Matrix<double, 5, 1>;

struct FringeFit {
  enum Param { kAmplitude = 0, kFrequency, kPhase, kT2, kOffset };

  double A = 0.0;
  double f = 0.0;
  double phi = 0.0;
  double T2star = 0.0;
  double offset = 0.0;
  Matrix5d covariance = Matrix5d::Zero();
  double residual_rms = 0.0;
  int iterations = 0;

  double value(double tau) const { return A * std::exp(-tau / T2star) * std::sin(kTwoPi * f * tau + phi) + offset; }
  double amplitude_at(double tau) const { return A * std::exp(-tau / T2star); }
  double sigma(Param p) const { return std::sqrt(std::max(covariance(p, p), 0.0)); }
};

struct FitOptions {
  /// Expected oscillation frequency. Uniform sampling only determines f
  /// modulo the sample rate; the hint picks the alias.
  std::optional<double> frequency_hint;
  int max_iterations = 200;
  double step_tolerance = 1e-10;
};

namespace detail {

// Internal parameters use a time origin at the middle of the data, which
// decorrelates frequency from phase and amplitude from T2*.
struct DampedSineModel {
  static void eval(const Vector5d& p, double tc, double& value, Vector5d* grad) {
    const double env = std::exp(-tc / p(3));
    const double theta = kTwoPi * p(1) * tc + p(2);
    const double s = std::sin(theta);
    const double co = std::cos(theta);
    value = p(0) * env * s + p(4);
    if (grad != nullptr) {
      (*grad)(0) = env * s;
      (*grad)(1) = p(0) * env * co * kTwoPi * tc;
      (*grad)(2) = p(0) * env * co;
      (*grad)(3) = p(0) * env * s * tc / (p(3) * p(3));
      (*grad)(4) = 1.0;
    }
  }
};

/// Periodogram peak in the first Nyquist zone (parabolic refinement).
inline double spectral_peak(const FringeSeries& series) {
  const Spectrum spec = power_spectrum(series, 8);
  const std::size_t k = spec.peak_index(0.0, INFINITY);
  if (k == 0 || k + 1 >= spec.power.size()) return spec.freqs[k];
  const double a = spec.power[k - 1];
  const double b = spec.power[k];
  const double c = spec.power[k + 1];
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return spec.freqs[k] + std::clamp(shift, -0.5, 0.5) * (spec.freqs[1] - spec.freqs[0]);
}

/// Envelope A exp(-tau/T) from windowed demodulation at f. Returns false if
/// the envelope does not decay or too few windows are available.
inline bool envelope_fit(const FringeSeries& s, double f_base, double mean, double& amp, double& t2) {
  const double span = s.taus.back() - s.taus.front();
  if (!(f_base > 0.0)) return false;
  const double period = 1.0 / f_base;
  const double window = period * std::max(1.0, std::floor(span / (8.0 * period)));
  const auto n_windows = static_cast<std::size_t>(std::floor(span / window));
  if (n_windows < 3) return false;
  std::vector<double> centers;
  std::vector<double> logs;
  std::size_t i = 0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    const double lo = s.taus.front() + window * static_cast<double>(w);
    const double hi = lo + window;
    std::complex<double> acc = 0.0;
    std::size_t count = 0;
    while (i < s.size() && s.taus[i] < hi) {
      if (s.taus[i] >= lo) {
        acc += (s.values[i] - mean) * std::polar(1.0, -kTwoPi * f_base * s.taus[i]);
        ++count;
      }
      ++i;
    }
    if (count < 2) continue;
    const double env = 2.0 * std::abs(acc) / static_cast<double>(count);
    if (env <= 0.0) continue;
    centers.push_back(0.5 * (lo + hi));
    logs.push_back(std::log(env));
  }
  if (centers.size() < 3) return false;
  const double n = static_cast<double>(centers.size());
  const double mx = std::accumulate(centers.begin(), centers.end(), 0.0) / n;
  const double my = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    sxy += (centers[k] - mx) * (logs[k] - my);
    sxx += (centers[k] - mx) * (centers[k] - mx);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0) || !std::isfinite(slope)) return false;
  t2 = -1.0 / slope;
  amp = std::exp(my - slope * mx);
  return std::isfinite(amp) && amp > 0.0;
}

}  // namespace detail

inline FringeFit fit_decaying_sine(const FringeSeries& series, const FitOptions& opts = {}) {
  series.validate();
  const std::size_t n = series.size();
  if (n < 8) throw FitError(FitError::Kind::kInsufficientSpan, "fit_decaying_sine: need at least 8 points, got " + std::to_string(n));

  const double mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : series.values) var += (v - mean) * (v - mean);
  if (!(var > 0.0)) throw FitError(FitError::Kind::kInsufficientSpan, "fit_decaying_sine: series is constant");

  const double span = series.taus.back() - series.taus.front();
  bool uniform = true;
  double fs = INFINITY;
  try {
    fs = 1.0 / uniform_step(series.taus);
  } catch (const SeriesError&) {
    if (!opts.frequency_hint) throw;
    uniform = false;
  }
  const double f_base = uniform ? detail::spectral_peak(series) : *opts.frequency_hint;
  const double f0 = opts.frequency_hint && uniform ? unfold_from_baseband(f_base, fs, *opts.frequency_hint) : f_base;
  if (!(f_base * span >= 1.0))
    throw FitError(FitError::Kind::kInsufficientSpan,
                   "fit_decaying_sine: data span less than one oscillation period (sampled frequency " +
                       std::to_string(f_base) + " Hz over " + std::to_string(span) + " s)");

  const double t_mid = 0.5 * (series.taus.front() + series.taus.back());
  std::vector<double> tc(n);
  for (std::size_t i = 0; i < n; ++i) tc[i] = series.taus[i] - t_mid;
  std::vector<double> w(n, 1.0);
  if (series.sigma)
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (*series.sigma)[i];
      if (!(s > 0.0)) throw SeriesError("fit_decaying_sine: sigma must be positive");
      w[i] = 1.0 / (s * s);
    }

  // Initial T2* from the envelope, then amplitude and phase by linear
  // projection onto the decaying quadratures.
  double amp_env = 0.0;
  double t2_0 = span;
  if (!detail::envelope_fit(series, f_base, mean, amp_env, t2_0)) t2_0 = span;
  t2_0 = std::clamp(t2_0, span / 100.0, span * 100.0);
  Vector5d p;
  {
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double env = std::exp(-tc[i] / t2_0);
      const double th = kTwoPi * f0 * tc[i];
      const double sw = std::sqrt(w[i]);
      basis(i, 0) = sw * env * std::sin(th);
      basis(i, 1) = sw * env * std::cos(th);
      basis(i, 2) = sw;
      y(i) = sw * series.values[i];
    }
    const Eigen::Vector3d coef = basis.colPivHouseholderQr().solve(y);
    p << std::hypot(coef(0), coef(1)), f0, std::atan2(coef(1), coef(0)), t2_0, coef(2);
  }

  auto cost_of = [&](const Vector5d& q) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v;
      detail::DampedSineModel::eval(q, tc[i], v, nullptr);
      const double r = series.values[i] - v;
      c += w[i] * r * r;
    }
    return c;
  };

  double cost = cost_of(p);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  Matrix5d jtj;
  for (; iter < opts.max_iterations && !converged; ++iter) {
    jtj.setZero();
    Vector5d jtr = Vector5d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      double v;
      Vector5d g;
      detail::DampedSineModel::eval(p, tc[i], v, &g);
      const double r = series.values[i] - v;
      jtj.noalias() += w[i] * g * g.transpose();
      jtr += w[i] * r * g;
    }
    bool improved = false;
    while (!improved) {
      Matrix5d lhs = jtj;
      for (int k = 0; k < 5; ++k) lhs(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Vector5d step = lhs.ldlt().solve(jtr);
      Vector5d trial = p + step;
      const double trial_cost = trial(3) > 0.0 && step.allFinite() ? cost_of(trial) : INFINITY;
      if (trial_cost <= cost) {
        const Vector5d scale(std::abs(p(0)) + 1e-300, std::abs(p(1)) + 1e-300, 1.0, p(3), std::abs(p(0)) + 1e-300);
        const double rel = (step.cwiseAbs().array() / scale.array()).maxCoeff();
        const double prev = cost;
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < opts.step_tolerance || prev - cost <= 1e-15 * prev) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No downhill step left at any damping: p is a minimum.
          improved = true;
          converged = true;
        }
      }
    }
  }
  if (!converged || !p.allFinite())
    throw FitError(FitError::Kind::kNonConvergence,
                   "fit_decaying_sine: no convergence after " + std::to_string(iter) + " iterations");

  // Recompute the normal matrix at the solution for the covariance.
  jtj.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    Vector5d g;
    detail::DampedSineModel::eval(p, tc[i], v, &g);
    jtj.noalias() += w[i] * g * g.transpose();
  }
  const double dof = static_cast<double>(n) - 5.0;
  const double reduced = dof > 0.0 ? cost / dof : 0.0;
  Matrix5d cov_c = reduced * jtj.completeOrthogonalDecomposition().pseudoInverse();

  // Make A and f positive; track the sign changes for the covariance.
  Matrix5d flip = Matrix5d::Identity();
  if (p(0) < 0.0) {
    p(0) = -p(0);
    p(2) += kPi;
    flip(0, 0) = -1.0;
  }
  if (p(1) < 0.0) {
    p(1) = -p(1);
    p(2) = kPi - p(2);
    flip(1, 1) = -1.0;
    flip(2, 2) = -1.0;
  }
  cov_c = flip * cov_c * flip;

  // Back to a tau origin at zero.
  Matrix5d to_zero = Matrix5d::Identity();
  const double grow = std::exp(t_mid / p(3));
  to_zero(0, 0) = grow;
  to_zero(0, 3) = -p(0) * grow * t_mid / (p(3) * p(3));
  to_zero(2, 1) = -kTwoPi * t_mid;
  FringeFit fit;
  fit.A = p(0) * grow;
  fit.f = p(1);
  fit.phi = wrap_phase(p(2) - kTwoPi * std::fmod(p(1) * t_mid, 1.0));
  fit.T2star = p(3);
  fit.offset = p(4);
  fit.covariance = to_zero * cov_c * to_zero.transpose();
  fit.residual_rms = std::sqrt(cost / std::accumulate(w.begin(), w.end(), 0.0));
  fit.iterations = iter;
  return fit;
}

}  // namespace ndgyro
