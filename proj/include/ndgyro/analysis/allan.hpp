#pragma once

// Overlapping Allan deviation of rate samples taken every tau0 seconds.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ndgyro/errors.hpp"
#include "ndgyro/series.hpp"

namespace ndgyro {

inline constexpr std::size_t kMinAllanSamples = 32;

namespace detail {

inline std::vector<double> cumulative(const std::vector<double>& y) {
  std::vector<double> c(y.size() + 1, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) c[i + 1] = c[i] + y[i];
  return c;
}

inline double overlapping_adev(const std::vector<double>& c, std::size_t m) {
  const std::size_t n = c.size() - 1;
  const std::size_t terms = n - 2 * m + 1;
  const double inv_m = 1.0 / static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < terms; ++i) {
    const double a = (c[i + m] - c[i]) * inv_m;
    const double b = (c[i + 2 * m] - c[i + m]) * inv_m;
    acc += (b - a) * (b - a);
  }
  return std::sqrt(0.5 * acc / static_cast<double>(terms));
}

inline void check_allan_input(const std::vector<double>& y, double tau0) {
  if (!(tau0 > 0.0)) throw SeriesError("allan_deviation: tau0 must be positive");
  if (y.size() < kMinAllanSamples)
    throw SeriesError("allan_deviation: need at least " + std::to_string(kMinAllanSamples) + " samples, got " +
                      std::to_string(y.size()));
}

}  // namespace detail

/// Octave-spaced averaging factors m = 1, 2, 4, ... up to N/4.
inline AllanSeries allan_deviation(const std::vector<double>& y, double tau0) {
  detail::check_allan_input(y, tau0);
  const auto c = detail::cumulative(y);
  AllanSeries out;
  for (std::size_t m = 1; m <= y.size() / 4; m *= 2) {
    out.tau_avg.push_back(static_cast<double>(m) * tau0);
    out.adev.push_back(detail::overlapping_adev(c, m));
    out.n_samples.push_back(y.size() - 2 * m + 1);
  }
  return out;
}

/// Allan deviation at explicit averaging factors (each within [1, N/2]).
inline AllanSeries allan_deviation_at(const std::vector<double>& y, double tau0, const std::vector<std::size_t>& ms) {
  detail::check_allan_input(y, tau0);
  const auto c = detail::cumulative(y);
  AllanSeries out;
  for (std::size_t m : ms) {
    if (m < 1 || 2 * m > y.size()) throw SeriesError("allan_deviation_at: averaging factor out of range");
    out.tau_avg.push_back(static_cast<double>(m) * tau0);
    out.adev.push_back(detail::overlapping_adev(c, m));
    out.n_samples.push_back(y.size() - 2 * m + 1);
  }
  return out;
}

/// Least-squares slope of log(adev) against log(tau) for tau in [lo, hi].
inline double allan_slope(const AllanSeries& a, double tau_lo, double tau_hi) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.tau_avg[i] >= tau_lo && a.tau_avg[i] <= tau_hi && a.adev[i] > 0.0) {
      lx.push_back(std::log(a.tau_avg[i]));
      ly.push_back(std::log(a.adev[i]));
    }
  if (lx.size() < 2) throw SeriesError("allan_slope: fewer than two points in range");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

struct AllanSummary {
  double arw = 0.0;               // adev * sqrt(tau) on the white-noise line, unit * sqrt(s)
  double bias_stability = 0.0;    // minimum adev
  double bias_stability_tau = 0.0;
  double white_slope = 0.0;       // fitted log-log slope over the ARW range
};

/// ARW from a -1/2 line through the points with tau <= arw_tau_max.
inline AllanSummary summarize_allan(const AllanSeries& a, double arw_tau_max) {
  if (a.size() == 0) throw SeriesError("summarize_allan: empty series");
  AllanSummary s;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.tau_avg[i] <= arw_tau_max && a.adev[i] > 0.0) {
      acc += std::log(a.adev[i]) + 0.5 * std::log(a.tau_avg[i]);
      ++count;
    }
  if (count == 0) throw SeriesError("summarize_allan: no points below the ARW limit");
  s.arw = std::exp(acc / static_cast<double>(count));
  const auto it = std::min_element(a.adev.begin(), a.adev.end());
  s.bias_stability = *it;
  s.bias_stability_tau = a.tau_avg[static_cast<std::size_t>(it - a.adev.begin())];
  s.white_slope = count >= 2 ? allan_slope(a, 0.0, arw_tau_max) : -0.5;
  return s;
}

}  // namespace ndgyro
