#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ndgyro/spin.hpp"

using namespace ndgyro;

namespace {

// Level splitting written out in long double as an independent oracle.
long double dq_oracle(long double B, long double ge, long double gn, long double D, long double A) {
  const long double denom = (D - ge * B) * (D + ge * B);
  return 2.0L * B * gn - 2.0L * B * ge * A * A / denom;
}

Matrix3c random_hermitian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix3c m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = Complex(n(rng), n(rng));
  return 0.5 * (m + m.adjoint());
}

SpinState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix3c a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = Complex(n(rng), n(rng));
  Matrix3c rho = a * a.adjoint();
  rho /= rho.trace();
  return SpinState(rho);
}

}  // namespace

TEST(DqSplitting, LiteratureConstantsNear293kHz) {
  const PhysicalConstants c;
  const double f = dq_splitting(482.0, c);
  EXPECT_NEAR(f, 293.332e3, 0.005 * 293.332e3);
  EXPECT_NEAR(f, static_cast<double>(dq_oracle(482.0L, c.gamma_e, c.gamma_n, c.D, c.A_perp)), 1e-9 * f);
}

TEST(DqSplitting, ZeroFieldIsZero) { EXPECT_EQ(dq_splitting(0.0, PhysicalConstants{}), 0.0); }

TEST(DqSplitting, NoHyperfineGivesBareZeeman) {
  PhysicalConstants c;
  c.A_perp = 0.0;
  EXPECT_EQ(dq_splitting(482.0, c), 2.0 * 482.0 * c.gamma_n);
}

TEST(DqSplitting, SignOfAPerpDoesNotMatter) {
  PhysicalConstants c;
  const double f = dq_splitting(482.0, c);
  c.A_perp = -c.A_perp;
  EXPECT_EQ(dq_splitting(482.0, c), f);
}

TEST(DqSplitting, SingularAtAnticrossing) {
  const PhysicalConstants c;
  EXPECT_THROW(dq_splitting(c.D / c.gamma_e, c), SingularDenominatorError);
}

TEST(DqSplitting, NegativeFieldRejected) { EXPECT_THROW(dq_splitting(-1.0, PhysicalConstants{}), std::invalid_argument); }

TEST(DqSplitting, MonotonicBelow450G) {
  const PhysicalConstants c;
  double prev = dq_splitting(0.0, c);
  for (double B = 1.0; B <= 450.0; B += 1.0) {
    const double f = dq_splitting(B, c);
    EXPECT_GT(f, prev) << "B = " << B;
    prev = f;
  }
}

TEST(TransitionFrequencies, CarriersNearQuotedValues) {
  const auto tf = transition_frequencies(FieldEnvironment{}, PhysicalConstants{});
  EXPECT_NEAR(tf.f1, 5.089e6, 1e3);
  EXPECT_NEAR(tf.f2, 4.796e6, 1e3);
  EXPECT_GT(tf.f1, tf.f2);
}

TEST(TransitionFrequencies, SumAndDifference) {
  const PhysicalConstants c;
  FieldEnvironment env;
  env.delta_Q = 2.5e3;
  env.delta_B = 0.3;
  const auto tf = transition_frequencies(env, c);
  EXPECT_NEAR(tf.f1 - tf.f2, dq_splitting(env.B + env.delta_B, c), 1e-8);
  EXPECT_NEAR(0.5 * (tf.f1 + tf.f2), c.Q + env.delta_Q, 1e-8);
}

TEST(TransitionFrequencies, QuadrupoleShiftIsCommonMode) {
  const PhysicalConstants c;
  FieldEnvironment env;
  const auto base = transition_frequencies(env, c);
  for (double dq : {-10e3, -1e3, 1e3, 10e3}) {
    env.delta_Q = dq;
    const auto tf = transition_frequencies(env, c);
    EXPECT_NEAR(tf.f1 - base.f1, dq, 1e-8);
    EXPECT_NEAR(tf.f2 - base.f2, dq, 1e-8);
    EXPECT_NEAR(tf.f1 - tf.f2, base.f1 - base.f2, 1e-8);
  }
}

TEST(TransitionFrequencies, FieldDriftMatchesFiniteDifference) {
  const PhysicalConstants c;
  FieldEnvironment env;
  const auto base = transition_frequencies(env, c);
  env.delta_B = 1.0;
  const auto tf = transition_frequencies(env, c);
  const long double fd = dq_oracle(483.0L, c.gamma_e, c.gamma_n, c.D, c.A_perp) -
                         dq_oracle(482.0L, c.gamma_e, c.gamma_n, c.D, c.A_perp);
  EXPECT_NEAR((tf.f1 - tf.f2) - (base.f1 - base.f2), static_cast<double>(fd), 1e-6);
  EXPECT_NEAR(static_cast<double>(fd), 2.0 * c.gamma_n, 0.05 * 2.0 * c.gamma_n);
}

TEST(Pulses, SqPiSwapsPlusAndZero) {
  const SpinState out = apply_pulse(pulse_unitary(PulseSpec::sq_pi_f1()), SpinState::pure(kPlus));
  const auto p = populations(out);
  EXPECT_NEAR(p.p_plus, 0.0, 1e-14);
  EXPECT_NEAR(p.p_zero, 1.0, 1e-14);
  EXPECT_NEAR(p.p_minus, 0.0, 1e-14);
}

TEST(Pulses, DqPulseCreatesDoubleQuantumCoherence) {
  const SpinState out = apply_pulse(pulse_unitary(PulseSpec::dq(0.0, 0.0)), SpinState::pure(kZero));
  const auto p = populations(out);
  EXPECT_NEAR(p.p_plus, 0.5, 1e-14);
  EXPECT_NEAR(p.p_zero, 0.0, 1e-14);
  EXPECT_NEAR(p.p_minus, 0.5, 1e-14);
  EXPECT_NEAR(std::abs(out.dq_coherence()), 0.5, 1e-14);
}

TEST(Pulses, UnitaryForAnyPhasesAndScales) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  std::uniform_real_distribution<double> det(-5e3, 5e3);
  for (int i = 0; i < 200; ++i) {
    PulseSpec p = (i % 2) ? PulseSpec::dq(phase(rng), phase(rng), scale(rng)) : PulseSpec::sq_pi_f1(phase(rng), scale(rng));
    p.duration = (i % 3 == 0) ? 50e-6 : 0.0;
    p.detuning_f1 = det(rng);
    p.detuning_f2 = det(rng);
    const Matrix3c u = pulse_unitary(p);
    EXPECT_LT((u.adjoint() * u - Matrix3c::Identity()).norm(), 1e-12);
  }
}

TEST(Pulses, PreserveStateValidity) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const SpinState s = random_state(rng);
    const SpinState out = apply_pulse(pulse_unitary(PulseSpec::dq(0.3 * i, 0.7 * i, 0.9)), s);
    EXPECT_TRUE(out.is_valid());
  }
}

TEST(Pulses, InvalidSpecRejected) {
  PulseSpec p = PulseSpec::dq(0.0, 0.0, 0.0);
  EXPECT_THROW(pulse_unitary(p), std::invalid_argument);
  p = PulseSpec::dq(0.0, 0.0);
  p.phase_f1 = 7.0;
  EXPECT_THROW(pulse_unitary(p), std::invalid_argument);
}

TEST(ExpMinusI, MatchesSeriesExpansion) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const Matrix3c h = 0.3 * random_hermitian(rng);
    Matrix3c series = Matrix3c::Identity();
    Matrix3c term = Matrix3c::Identity();
    for (int k = 1; k < 40; ++k) {
      term = term * (Complex(0.0, -1.0) * h) / static_cast<double>(k);
      series += term;
    }
    EXPECT_LT((exp_minus_i(h) - series).norm(), 1e-12);
  }
}

TEST(FreeEvolution, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(14);
  const SpinState s = random_state(rng);
  const SpinState out = evolve_free(s, 0.0, FieldEnvironment{}, PhysicalConstants{}, 1.95e-3);
  EXPECT_LT((out.rho() - s.rho()).norm(), 1e-15);
}

TEST(FreeEvolution, OnResonanceOnlyDecays) {
  const PhysicalConstants c;
  const FieldEnvironment env;
  const auto tf = transition_frequencies(env, c);
  const SpinState s = apply_pulse(pulse_unitary(PulseSpec::dq(0.0, 0.0)), SpinState::pure(kZero));
  const double tau = 1.3e-3;
  const SpinState out = evolve_free(s, tau, env, c, 1.95e-3, {tf.f1, tf.f2});
  const Complex ratio = out.dq_coherence() / s.dq_coherence();
  EXPECT_NEAR(ratio.real(), std::exp(-tau / 1.95e-3), 1e-12);
  EXPECT_NEAR(ratio.imag(), 0.0, 1e-12);
}

TEST(FreeEvolution, RotationPhaseIsTwoNuTau) {
  const PhysicalConstants c;
  FieldEnvironment env;
  const auto tf = transition_frequencies(env, c);
  env.nu = 1.0;
  const SpinState s = apply_pulse(pulse_unitary(PulseSpec::dq(0.0, 0.0)), SpinState::pure(kZero));
  const SpinState out = evolve_free(s, 0.25, env, c, 1e9, {tf.f1, tf.f2});
  const double phase = std::arg(out.dq_coherence() / s.dq_coherence());
  EXPECT_NEAR(std::abs(phase), kPi, 1e-6);
}

TEST(FreeEvolution, DephasingLaw) {
  std::mt19937_64 rng(15);
  const PhysicalConstants c;
  const FieldEnvironment env;
  const SpinState s = random_state(rng);
  for (double tau : {1e-4, 1e-3, 3e-3, 1e-2}) {
    const SpinState out = evolve_free(s, tau, env, c, Dephasing(1.95e-3, 0.7e-3));
    EXPECT_NEAR(std::abs(out.dq_coherence()) / std::abs(s.dq_coherence()), std::exp(-tau / 1.95e-3), 1e-10);
    EXPECT_NEAR(std::abs(out(kPlus, kZero)) / std::abs(s(kPlus, kZero)), std::exp(-tau / 0.7e-3), 1e-10);
    const auto p0 = populations(s);
    const auto p1 = populations(out);
    EXPECT_EQ(p0.p_plus, p1.p_plus);
    EXPECT_EQ(p0.p_zero, p1.p_zero);
    EXPECT_EQ(p0.p_minus, p1.p_minus);
    EXPECT_TRUE(out.is_valid());
  }
}

TEST(FreeEvolution, RejectsBadArguments) {
  const SpinState s;
  EXPECT_THROW(evolve_free(s, -1e-3, FieldEnvironment{}, PhysicalConstants{}, 1e-3), std::invalid_argument);
  EXPECT_THROW(evolve_free(s, 1e-3, FieldEnvironment{}, PhysicalConstants{}, 0.0), std::invalid_argument);
}

TEST(Populations, BasicStates) {
  const auto p = populations(SpinState::pure(kPlus));
  EXPECT_EQ(p.p_plus, 1.0);
  EXPECT_EQ(p.p_zero, 0.0);
  const auto m = populations(SpinState::maximally_mixed());
  EXPECT_NEAR(m.p_plus, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.p_zero, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.p_minus, 1.0 / 3.0, 1e-15);
}

TEST(SpinStateValidity, DetectsBadMatrices) {
  Matrix3c rho = Matrix3c::Zero();
  rho(0, 0) = 0.5;
  EXPECT_FALSE(SpinState(rho).is_valid());
  rho(1, 1) = 0.5;
  rho(0, 1) = 0.1;
  EXPECT_FALSE(SpinState(rho).is_valid());
  rho(1, 0) = 0.1;
  EXPECT_TRUE(SpinState(rho).is_valid());
  rho = Matrix3c::Zero();
  rho(0, 0) = 1.5;
  rho(1, 1) = -0.5;
  EXPECT_FALSE(SpinState(rho).is_valid());
}

TEST(PhysicalConstantsValidation, RejectsNonPositive) {
  PhysicalConstants c;
  EXPECT_NO_THROW(c.validate());
  c.D = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.gamma_n = c.gamma_e * 2.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
