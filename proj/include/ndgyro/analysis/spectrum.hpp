#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <vector>

#include "ndgyro/errors.hpp"
#include "ndgyro/series.hpp"

namespace ndgyro {

struct Spectrum {
  std::vector<double> freqs;  // Hz, 0 .. Nyquist
  std::vector<double> power;  // |FT|^2 of the mean-removed series
  double bin_width = 0.0;     // spacing of the unpadded transform, Hz

  std::size_t peak_index(double f_min = 0.0, double f_max = INFINITY) const {
    std::size_t best = 0;
    double best_power = -1.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (freqs[i] < f_min || freqs[i] > f_max) continue;
      if (power[i] > best_power) {
        best_power = power[i];
        best = i;
      }
    }
    return best;
  }

  /// Largest power within +/- half_width of f.
  double power_near(double f, double half_width) const {
    double p = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i)
      if (std::abs(freqs[i] - f) <= half_width) p = std::max(p, power[i]);
    return p;
  }

  double median_power() const {
    std::vector<double> sorted(power.begin() + 1, power.end());
    if (sorted.empty()) return 0.0;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    return sorted[sorted.size() / 2];
  }
};

/// Uniform sample spacing of a grid; throws if the grid is not uniform.
inline double uniform_step(const std::vector<double>& taus, double rel_tol = 1e-6) {
  if (taus.size() < 2) throw SeriesError("need at least two samples");
  const double step = (taus.back() - taus.front()) / static_cast<double>(taus.size() - 1);
  if (!(step > 0.0)) throw SeriesError("grid must be increasing");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (std::abs((taus[i] - taus[i - 1]) - step) > rel_tol * step) throw SeriesError("grid is not uniform");
  return step;
}

/// Squared magnitude of the discrete Fourier transform after removing the
/// mean; `zero_pad` multiplies the transform length for finer peak location.
inline Spectrum power_spectrum(const FringeSeries& series, int zero_pad = 4) {
  series.validate();
  const double dt = uniform_step(series.taus);
  const std::size_t n = series.size();
  const std::size_t m = n * static_cast<std::size_t>(std::max(zero_pad, 1));
  const double mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(n);

  std::vector<double> in(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) in[i] = series.values[i] - mean;
  std::vector<std::complex<double>> out(m / 2 + 1);

  static std::mutex planner_mutex;  // FFTW planning is not thread-safe
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.bin_width = 1.0 / (static_cast<double>(n) * dt);
  s.freqs.resize(out.size());
  s.power.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    s.freqs[k] = static_cast<double>(k) / (static_cast<double>(m) * dt);
    s.power[k] = std::norm(out[k]);
  }
  return s;
}

/// Folds a frequency into the first Nyquist zone [0, fs/2].
inline double fold_to_baseband(double f, double sample_rate) {
  double r = std::fmod(std::abs(f), sample_rate);
  return r > 0.5 * sample_rate ? sample_rate - r : r;
}

/// Of all aliases of a baseband frequency, the one closest to `hint`.
inline double unfold_from_baseband(double f_base, double sample_rate, double hint) {
  const double k = std::round(hint / sample_rate);
  double best = f_base;
  double best_err = INFINITY;
  for (double j = k - 1; j <= k + 1; ++j) {
    for (double cand : {j * sample_rate + f_base, j * sample_rate - f_base}) {
      if (cand < 0.0) continue;
      if (std::abs(cand - hint) < best_err) {
        best_err = std::abs(cand - hint);
        best = cand;
      }
    }
  }
  return best;
}

}  // namespace ndgyro
