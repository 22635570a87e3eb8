#pragma once

// Spin-1 14N nuclear manifold: level structure, RF pulses and free precession.
//
// Basis ordering is (m_I = +1, 0, -1). Level energies are expressed as
// frequencies with |0> at zero; both |+1> and |-1> sit above it by roughly
// the quadrupole splitting Q, separated from each other by f_DQ. The f1 tone
// drives |0> <-> |+1>, the f2 tone drives |0> <-> |-1>, and f1 > f2 at the
// nominal 482 G bias.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "ndgyro/errors.hpp"
#include "ndgyro/units.hpp"

namespace ndgyro {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

enum Level : int { kPlus = 0, kZero = 1, kMinus = 2 };

/// Constants entering the level structure and the shot-noise budget.
/// Defaults are the literature profile (Hz, Hz/G, A*s).
struct PhysicalConstants {
  double gamma_e = 2.8025e6;       // electron gyromagnetic ratio, Hz/G
  double gamma_n = 307.7;          // 14N gyromagnetic ratio, Hz/G
  double D = 2.870e9;              // zero-field splitting, Hz
  double A_perp = 2.62e6;          // transverse hyperfine constant, Hz (sign-free)
  double Q = 4.9425e6;             // quadrupole splitting, Hz
  double q_e = 1.602176634e-19;    // elementary charge, A*s

  static PhysicalConstants literature() { return {}; }

  void validate() const {
    if (!(gamma_e > 0 && gamma_n > 0 && D > 0 && Q > 0 && q_e > 0))
      throw std::invalid_argument("PhysicalConstants: gamma_e, gamma_n, D, Q, q_e must be positive");
    if (!std::isfinite(A_perp))
      throw std::invalid_argument("PhysicalConstants: A_perp must be finite");
    if (!(gamma_e / gamma_n > 1.0))
      throw std::invalid_argument("PhysicalConstants: expected gamma_e >> gamma_n");
  }
};

/// Bias field, rotation and slow perturbations seen by the spins.
struct FieldEnvironment {
  double B = 482.0;        // G
  double nu = 0.0;         // rotation rate about the NV axis, Hz, clockwise positive
  double delta_Q = 0.0;    // quadrupole perturbation, Hz (temperature drift)
  double delta_B = 0.0;    // field drift, G
};

// ---------------------------------------------------------------------------
// Level structure
// ---------------------------------------------------------------------------

/// Splitting between |+1> and |-1> at bias field B (gauss), including the
/// second-order transverse-hyperfine correction.
inline double dq_splitting(double B, const PhysicalConstants& c) {
  if (B < 0.0) throw std::invalid_argument("dq_splitting: B must be non-negative");
  const double gB = c.gamma_e * B;
  const double denom = c.D * c.D - gB * gB;
  if (std::abs(denom) < 1e-9 * c.D * c.D)
    throw SingularDenominatorError("dq_splitting: D^2 - (gamma_e B)^2 vanishes (level anticrossing regime)");
  const double correction = (c.gamma_e / c.gamma_n) * c.A_perp * c.A_perp / denom;
  return 2.0 * B * c.gamma_n * (1.0 - correction);
}

struct TransitionFrequencies {
  double f1;  // |0> <-> |+1>
  double f2;  // |0> <-> |-1>
};

inline TransitionFrequencies transition_frequencies(const FieldEnvironment& env,
                                                    const PhysicalConstants& c) {
  const double center = c.Q + env.delta_Q;
  const double half = 0.5 * dq_splitting(env.B + env.delta_B, c);
  return {center + half, center - half};
}

/// Level energies (Hz) in the lab frame, including the +/- nu rotation shift
/// of |+1> and |-1>.
inline std::array<double, 3> level_energies(const FieldEnvironment& env, const PhysicalConstants& c) {
  const auto tf = transition_frequencies(env, c);
  return {tf.f1 + env.nu, 0.0, tf.f2 - env.nu};
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

class SpinState {
 public:
  SpinState() : rho_(Matrix3c::Zero()) { rho_(kZero, kZero) = 1.0; }
  explicit SpinState(const Matrix3c& rho) : rho_(rho) {}

  static SpinState pure(Level level) {
    Matrix3c rho = Matrix3c::Zero();
    rho(level, level) = 1.0;
    return SpinState(rho);
  }

  static SpinState maximally_mixed() { return SpinState(Matrix3c::Identity() / 3.0); }

  const Matrix3c& rho() const { return rho_; }
  Complex operator()(int row, int col) const { return rho_(row, col); }

  Complex dq_coherence() const { return rho_(kPlus, kMinus); }

  bool is_valid(double tol = 1e-12) const {
    if ((rho_ - rho_.adjoint()).norm() >= tol) return false;
    if (std::abs(rho_.trace() - Complex(1.0)) > tol) return false;
    Eigen::SelfAdjointEigenSolver<Matrix3c> es(rho_);
    return es.eigenvalues().minCoeff() >= -1e-10;
  }

 private:
  Matrix3c rho_;
};

struct Populations {
  double p_plus;
  double p_zero;
  double p_minus;

  double operator[](int level) const {
    return level == kPlus ? p_plus : level == kZero ? p_zero : p_minus;
  }
};

inline Populations populations(const SpinState& s) {
  return {s(kPlus, kPlus).real(), s(kZero, kZero).real(), s(kMinus, kMinus).real()};
}

// ---------------------------------------------------------------------------
// RF pulses
// ---------------------------------------------------------------------------

enum class PulseKind { kSqPiF1, kDqTwoTone };

/// One RF pulse. Phases are in the rotating frame of the RF carriers.
/// duration = 0 is the hard-pulse limit, where detunings have no effect.
struct PulseSpec {
  PulseKind kind = PulseKind::kDqTwoTone;
  double phase_f1 = 0.0;
  double phase_f2 = 0.0;
  double area_scale = 1.0;
  double detuning_f1 = 0.0;  // Hz
  double detuning_f2 = 0.0;  // Hz
  double duration = 0.0;     // s

  static PulseSpec sq_pi_f1(double phase = 0.0, double area_scale = 1.0) {
    PulseSpec p;
    p.kind = PulseKind::kSqPiF1;
    p.phase_f1 = wrap_phase(phase);
    p.area_scale = area_scale;
    return p;
  }

  static PulseSpec dq(double phase_f1, double phase_f2, double area_scale = 1.0) {
    PulseSpec p;
    p.kind = PulseKind::kDqTwoTone;
    p.phase_f1 = wrap_phase(phase_f1);
    p.phase_f2 = wrap_phase(phase_f2);
    p.area_scale = area_scale;
    return p;
  }

  void validate() const {
    if (!(area_scale > 0.0)) throw std::invalid_argument("PulseSpec: area_scale must be positive");
    if (!(phase_f1 >= 0.0 && phase_f1 < kTwoPi && phase_f2 >= 0.0 && phase_f2 < kTwoPi))
      throw std::invalid_argument("PulseSpec: phases must lie in [0, 2pi)");
    if (!(duration >= 0.0)) throw std::invalid_argument("PulseSpec: duration must be non-negative");
  }
};

/// Nominal per-tone rotation angle of the two-tone pulse. Driving both
/// tones at once rotates |0> into the bright combination of |+1> and |-1>
/// sqrt(2) faster than a single tone, so pi/sqrt(2) per tone is a full
/// transfer.
inline constexpr double kDqToneAngle = kPi / std::numbers::sqrt2;

/// exp(-i H) for a Hermitian H via its eigen-decomposition.
inline Matrix3c exp_minus_i(const Matrix3c& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(hermitian);
  const auto& vals = es.eigenvalues();
  Eigen::Vector3cd phases;
  for (int i = 0; i < 3; ++i) phases(i) = std::polar(1.0, -vals(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Rotating-wave propagator of a pulse. The generator (in radians) is
///   (theta1/2)(e^{-i phi1}|+1><0| + h.c.) + (theta2/2)(e^{-i phi2}|-1><0| + h.c.)
///   + 2 pi duration diag(detuning_f1, 0, detuning_f2).
inline Matrix3c pulse_unitary(const PulseSpec& p) {
  p.validate();
  double theta1 = 0.0;
  double theta2 = 0.0;
  if (p.kind == PulseKind::kSqPiF1) {
    theta1 = kPi * p.area_scale;
  } else {
    theta1 = kDqToneAngle * p.area_scale;
    theta2 = kDqToneAngle * p.area_scale;
  }
  Matrix3c h = Matrix3c::Zero();
  const Complex c1 = 0.5 * theta1 * std::polar(1.0, -p.phase_f1);
  const Complex c2 = 0.5 * theta2 * std::polar(1.0, -p.phase_f2);
  h(kPlus, kZero) = c1;
  h(kZero, kPlus) = std::conj(c1);
  h(kMinus, kZero) = c2;
  h(kZero, kMinus) = std::conj(c2);
  h(kPlus, kPlus) = kTwoPi * p.duration * p.detuning_f1;
  h(kMinus, kMinus) = kTwoPi * p.duration * p.detuning_f2;
  return exp_minus_i(h);
}

inline SpinState apply_pulse(const Matrix3c& u, const SpinState& s) {
  return SpinState(u * s.rho() * u.adjoint());
}

// ---------------------------------------------------------------------------
// Free precession
// ---------------------------------------------------------------------------

/// Frame in which coherences are tracked between pulses: |+1> rotates at
/// ref_f1 and |-1> at ref_f2 relative to |0>. The default is the lab frame.
struct RotatingFrame {
  double ref_f1 = 0.0;
  double ref_f2 = 0.0;
};

/// Independent exponential decay times for double- and single-quantum
/// coherences.
struct Dephasing {
  double t2_dq = 1.95e-3;
  double t2_sq = 1.95e-3;

  Dephasing() = default;
  Dephasing(double t2) : t2_dq(t2), t2_sq(t2) {}  // NOLINT: implicit by intent
  Dephasing(double dq, double sq) : t2_dq(dq), t2_sq(sq) {}
};

/// Free evolution for tau seconds. Populations are untouched; each coherence
/// picks up the phase of its level splitting in `frame` and decays.
inline SpinState evolve_free(const SpinState& s, double tau, const FieldEnvironment& env,
                             const PhysicalConstants& c, Dephasing dephasing,
                             RotatingFrame frame = {}) {
  if (!(tau >= 0.0)) throw std::invalid_argument("evolve_free: tau must be non-negative");
  if (!(dephasing.t2_dq > 0.0 && dephasing.t2_sq > 0.0))
    throw std::invalid_argument("evolve_free: T2* must be positive");
  const auto e = level_energies(env, c);
  const std::array<double, 3> detuned = {e[kPlus] - frame.ref_f1, 0.0, e[kMinus] - frame.ref_f2};
  const double sq_decay = std::exp(-tau / dephasing.t2_sq);
  const double dq_decay = std::exp(-tau / dephasing.t2_dq);

  Matrix3c rho = s.rho();
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const bool is_dq = (a == kPlus && b == kMinus);
      const double decay = is_dq ? dq_decay : sq_decay;
      const Complex factor = decay * std::polar(1.0, -kTwoPi * (detuned[a] - detuned[b]) * tau);
      rho(a, b) *= factor;
      rho(b, a) = std::conj(rho(a, b));
    }
  }
  return SpinState(rho);
}

}  // namespace ndgyro
