#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ndgyro/analysis/fit.hpp"

using namespace ndgyro;

namespace {

struct Truth {
  double A = 0.03;
  double f = 2400.0;
  double phi = 1.1;
  double T2 = 1.9e-3;
  double offset = 0.002;
};

FringeSeries make_series(const Truth& t, std::size_t n, double span, double sigma = 0.0, std::mt19937_64* rng = nullptr) {
  FringeSeries s;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = span * static_cast<double>(i) / static_cast<double>(n - 1);
    double v = t.A * std::exp(-tau / t.T2) * std::sin(kTwoPi * t.f * tau + t.phi) + t.offset;
    if (rng != nullptr) v += sigma * noise(*rng);
    s.taus.push_back(tau);
    s.values.push_back(v);
  }
  if (sigma > 0.0) s.sigma = std::vector<double>(n, sigma);
  return s;
}

double phase_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

TEST(FitDecayingSine, NoiselessRecovery) {
  const Truth t;
  const FringeFit fit = fit_decaying_sine(make_series(t, 500, 5e-3));
  EXPECT_NEAR(fit.A, t.A, 1e-6 * t.A);
  EXPECT_NEAR(fit.f, t.f, 1e-6 * t.f);
  EXPECT_NEAR(phase_distance(fit.phi, t.phi), 0.0, 1e-6);
  EXPECT_NEAR(fit.T2star, t.T2, 1e-6 * t.T2);
  EXPECT_NEAR(fit.offset, t.offset, 1e-8);
  EXPECT_LT(fit.residual_rms, 1e-10);
}

TEST(FitDecayingSine, NegativeAmplitudeIsNormalised) {
  Truth t;
  t.A = -0.02;
  const FringeFit fit = fit_decaying_sine(make_series(t, 400, 5e-3));
  for (double tau : {0.0, 1e-3, 2.2e-3}) {
    const double expect = t.A * std::exp(-tau / t.T2) * std::sin(kTwoPi * t.f * tau + t.phi) + t.offset;
    EXPECT_NEAR(fit.value(tau), expect, 1e-8);
  }
}

TEST(FitDecayingSine, AliasedToneNeedsHint) {
  Truth t;
  t.f = 293.73e3;
  const FringeSeries s = make_series(t, 500, 4.99e-3);
  FitOptions opts;
  opts.frequency_hint = 293.5e3;
  const FringeFit fit = fit_decaying_sine(s, opts);
  EXPECT_NEAR(fit.f, t.f, 1e-3);
  EXPECT_NEAR(fit.T2star, t.T2, 1e-6 * t.T2);
  const FringeFit base = fit_decaying_sine(s);
  EXPECT_NEAR(base.f, fold_to_baseband(t.f, 1.0 / 1e-5), 1e-3);
}

TEST(FitDecayingSine, ConstantSeriesThrows) {
  FringeSeries s;
  for (int i = 0; i < 50; ++i) {
    s.taus.push_back(i * 1e-4);
    s.values.push_back(0.5);
  }
  EXPECT_THROW(fit_decaying_sine(s), FitError);
}

TEST(FitDecayingSine, TooFewPointsThrows) {
  const FringeSeries s = make_series(Truth{}, 6, 1e-3);
  try {
    fit_decaying_sine(s);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.kind(), FitError::Kind::kInsufficientSpan);
  }
}

TEST(FitDecayingSine, UncertaintyCoverage) {
  const Truth t;
  const double sigma = 2e-3;
  std::mt19937_64 rng(99);
  const int trials = 300;
  int f_in = 0, t2_in = 0;
  for (int i = 0; i < trials; ++i) {
    const FringeFit fit = fit_decaying_sine(make_series(t, 300, 5e-3, sigma, &rng));
    if (std::abs(fit.f - t.f) <= 3.0 * fit.sigma(FringeFit::kFrequency)) ++f_in;
    if (std::abs(fit.T2star - t.T2) <= 3.0 * fit.sigma(FringeFit::kT2)) ++t2_in;
  }
  EXPECT_GE(f_in, static_cast<int>(0.97 * trials));
  EXPECT_GE(t2_in, static_cast<int>(0.97 * trials));
}

TEST(FitDecayingSine, StandardErrorsScaleWithNoise) {
  const Truth t;
  std::mt19937_64 a(1), b(1);
  const FringeFit lo = fit_decaying_sine(make_series(t, 300, 5e-3, 1e-3, &a));
  const FringeFit hi = fit_decaying_sine(make_series(t, 300, 5e-3, 4e-3, &b));
  EXPECT_NEAR(hi.sigma(FringeFit::kFrequency) / lo.sigma(FringeFit::kFrequency), 4.0, 0.4);
}

TEST(FitDecayingSine, AgreesWithSpectralPeak) {
  const Truth t;
  const FringeSeries s = make_series(t, 500, 5e-3);
  const FringeFit fit = fit_decaying_sine(s);
  EXPECT_NEAR(detail::spectral_peak(s), fit.f, power_spectrum(s, 1).bin_width);
}

TEST(FitDecayingSine, RejectsNonPositiveSigma) {
  FringeSeries s = make_series(Truth{}, 100, 5e-3);
  s.sigma = std::vector<double>(100, 0.0);
  EXPECT_THROW(fit_decaying_sine(s), SeriesError);
}
