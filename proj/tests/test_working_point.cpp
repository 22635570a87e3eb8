#include <gtest/gtest.h>

#include <cmath>

#include "ndgyro/analysis/working_point.hpp"

using namespace ndgyro;

namespace {

// Golden-section maximisation of tau e^{-tau/T} / sqrt(tau + o).
double duty_optimum_oracle(double T, double o) {
  auto g = [&](double t) { return t * std::exp(-t / T) / std::sqrt(t + o); };
  double a = 1e-9, b = 5.0 * T;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a);
    const double d = a + r * (b - a);
    if (g(c) > g(d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(WorkingPoint, DutyCycleOptimumMatchesNumericalSearch) {
  for (double o : {0.0, 0.1e-3, 0.322e-3, 0.52e-3, 2e-3, 10e-3}) {
    const auto wp = select_working_point(1.95e-3, 293.73e3, o);
    EXPECT_NEAR(wp.tau_duty_cycle, duty_optimum_oracle(1.95e-3, o), 1e-9) << "overhead " << o;
    EXPECT_EQ(wp.tau_fixed_cycle, 1.95e-3);
  }
}

TEST(WorkingPoint, TypicalOverhead) {
  EXPECT_NEAR(select_working_point(1.95e-3, 293.73e3, 0.52e-3).tau_duty_cycle, 1.26e-3, 0.005e-3);
}

TEST(WorkingPoint, LimitsOfOverhead) {
  EXPECT_NEAR(select_working_point(2e-3, 1e3, 0.0).tau_duty_cycle, 1e-3, 1e-15);
  EXPECT_NEAR(select_working_point(2e-3, 1e3, 1e3).tau_duty_cycle, 2e-3, 1e-8);
}

TEST(WorkingPoint, SnappedPointIsOnQuadrature) {
  const double f = 293.73e3;
  const auto wp = select_working_point(1.95e-3, f, 0.52e-3);
  EXPECT_NEAR(std::cos(kTwoPi * f * wp.tau_wp), 0.0, 1e-9);
  EXPECT_LE(std::abs(wp.tau_wp - wp.tau_duty_cycle), 0.5 / (2.0 * f) + 1e-15);
}

TEST(Snap, ZeroCrossingOfShiftedSine) {
  const double f = 1000.0;
  for (double phi : {0.0, 0.5, 1.5 * kPi, 6.0}) {
    for (double tau : {1e-5, 0.37e-3, 2.2e-3}) {
      const double s = snap_to_zero_crossing(tau, f, phi);
      EXPECT_GT(s, 0.0);
      EXPECT_NEAR(std::sin(kTwoPi * f * s + phi), 0.0, 1e-9);
      // Nearest crossing, or the first positive one when tau lies before it.
      const double first = snap_to_zero_crossing(1e-12, f, phi);
      if (tau > first) EXPECT_LE(std::abs(s - tau), 0.5 / (2.0 * f) + 1e-12) << "phi " << phi << " tau " << tau;
      else EXPECT_EQ(s, first);
    }
  }
  EXPECT_THROW(snap_to_zero_crossing(0.0, f, 0.0), std::invalid_argument);
}

TEST(Snap, QuadratureFormula) {
  const double f = 293.73e3;
  const double s = snap_to_quadrature(1.428e-3, f);
  const double k = std::round(2.0 * f * 1.428e-3 - 0.5);
  EXPECT_NEAR(s, (k + 0.5) / (2.0 * f), 1e-15);
}

TEST(Nu0, DefinitionAndPhaseOfOneRadian) {
  EXPECT_NEAR(nu0_from_tau(1.428e-3), 1.0 / (4.0 * kPi * 1.428e-3), 1e-12);
  EXPECT_NEAR(nu0_from_tau(1.428e-3), 55.7, 0.1);
  EXPECT_NEAR(4.0 * kPi * nu0_from_tau(2e-3) * 2e-3, 1.0, 1e-15);
  EXPECT_THROW(nu0_from_tau(0.0), std::invalid_argument);
}

TEST(LinearityTest, SmallAngleExpansion) {
  const double nu0 = 55.7;
  for (double nu : {0.1, 1.0, 3.0, 10.0}) {
    const double x = nu / nu0;
    const double series = x * x / 6.0 - x * x * x * x / 120.0;
    EXPECT_NEAR(linearity(nu, nu0).epsilon, series, 1e-7) << nu;
  }
  EXPECT_NEAR(linearity(10.0, 55.7).epsilon, 5.4e-3, 2e-4);
  EXPECT_EQ(linearity(0.0, nu0).epsilon, 0.0);
}

TEST(LinearityTest, OddSymmetry) {
  const auto a = linearity(7.0, 40.0);
  const auto b = linearity(-7.0, 40.0);
  EXPECT_EQ(a.nu_meas, -b.nu_meas);
  EXPECT_EQ(a.epsilon, b.epsilon);
}

TEST(DynamicRangeTest, InverseOfLeadingTerm) {
  const double nu0 = 55.7;
  for (double eps : {1e-5, 1e-4, 1e-3}) {
    const auto dr = dynamic_range(eps, nu0);
    EXPECT_NEAR(linearity(dr.hz, nu0).epsilon, eps, 0.01 * eps);
    EXPECT_NEAR(dr.dps, 360.0 * dr.hz, 1e-12);
  }
  EXPECT_NEAR(dynamic_range(1e-4, nu0).hz, 1.364, 1e-3);
  EXPECT_THROW(dynamic_range(0.2, nu0), std::invalid_argument);
  EXPECT_THROW(dynamic_range(-1e-4, nu0), std::invalid_argument);
}
