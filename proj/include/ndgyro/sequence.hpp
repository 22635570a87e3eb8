#pragma once

// Double-quantum Ramsey experiments built from spin-core primitives:
//   pump -> SQ pi(f1) -> DQ pi/sqrt2 -> free precession -> DQ pi/sqrt2 -> readout
// and the 4-Ramsey phase cycle R1 - R2 + R3 - R4 that removes single-quantum
// contamination from RF amplitude errors.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ndgyro/detector.hpp"
#include "ndgyro/series.hpp"
#include "ndgyro/spin.hpp"
#include "ndgyro/units.hpp"

namespace ndgyro {

/// A fraction of the sensing volume that sees RF pulse areas scaled by `scale`.
struct SubEnsemble {
  double weight = 1.0;
  double scale = 1.0;
};

using PhasePair = std::pair<double, double>;  // (phase_f1, phase_f2), rad

/// How the RF phase reference behaves between pulses.
///  - kSynchronized: each pulse starts at its programmed phase in the lab
///    (triggered AWG bursts). Fringes oscillate at the full f1 - f2.
///  - kContinuous: free-running synthesizers; fringes oscillate at the
///    detuning of f1 - f2 from the carrier difference.
enum class PhaseMode { kSynchronized, kContinuous };

/// Extra technical noise on the combined signal, on top of shot noise.
struct NoiseConfig {
  double white_s = 0.0;        // per-sample standard deviation
  double random_walk_s = 0.0;  // per sqrt(second)
};

inline std::array<PhasePair, 4> default_phase_table() {
  return {PhasePair{0.0, 0.0}, PhasePair{kPi, 0.0}, PhasePair{kPi, kPi}, PhasePair{0.0, kPi}};
}

struct SequenceConfig {
  double tau_wp = 1.428e-3;
  double pump_duration = 300e-6;
  double readout_window = 17e-6;
  double cycle_period = 7e-3;
  double pump_fidelity = 1.0;
  std::vector<SubEnsemble> rf_gradient = {SubEnsemble{}};
  std::array<PhasePair, 4> phase_table = default_phase_table();
  PhaseMode phase_mode = PhaseMode::kSynchronized;
  double carrier_f1 = 0.0;   // Hz; 0 means resonant with the undisturbed f1 at env.B
  double carrier_f2 = 0.0;
  double pulse_duration = 0.0;  // s; 0 is the hard-pulse limit
  Dephasing dephasing;
  // Scale applied to R1 - R2 + R3 - R4. 1 keeps the plain alternating sum.
  double combine_scale = 1.0;
  double averages = 1.0;  // readouts averaged into each fringe point
  DetectorConfig detector;
  NoiseConfig noise;

  void validate() const {
    if (rf_gradient.empty()) throw std::invalid_argument("SequenceConfig: rf_gradient is empty");
    double total = 0.0;
    for (const auto& e : rf_gradient) {
      if (!(e.weight >= 0.0 && e.scale > 0.0))
        throw std::invalid_argument("SequenceConfig: rf_gradient needs weight >= 0 and scale > 0");
      total += e.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("SequenceConfig: rf_gradient weights must sum to 1");
    if (!(tau_wp > 0.0)) throw std::invalid_argument("SequenceConfig: tau_wp must be positive");
    if (!(cycle_period > pump_duration + tau_wp))
      throw std::invalid_argument("SequenceConfig: cycle_period must exceed pump_duration + tau_wp");
    if (!(pump_fidelity >= 0.0 && pump_fidelity <= 1.0))
      throw std::invalid_argument("SequenceConfig: pump_fidelity must lie in [0, 1]");
    if (!(averages >= 1.0)) throw std::invalid_argument("SequenceConfig: averages must be >= 1");
    if (!(detector.t_R <= pump_duration)) throw std::invalid_argument("SequenceConfig: t_R exceeds pump_duration");
    if (!(noise.white_s >= 0.0 && noise.random_walk_s >= 0.0))
      throw std::invalid_argument("SequenceConfig: noise levels must be non-negative");
    detector.validate();
  }
};

struct Carriers {
  double f1;
  double f2;
};

inline Carriers resolve_carriers(const SequenceConfig& cfg, const FieldEnvironment& env,
                                 const PhysicalConstants& c) {
  FieldEnvironment nominal;
  nominal.B = env.B;
  const auto tf = transition_frequencies(nominal, c);
  return {cfg.carrier_f1 > 0.0 ? cfg.carrier_f1 : tf.f1, cfg.carrier_f2 > 0.0 ? cfg.carrier_f2 : tf.f2};
}

/// Frequency at which the combined fringe oscillates versus tau.
inline double expected_fringe_frequency(const SequenceConfig& cfg, const FieldEnvironment& env,
                                        const PhysicalConstants& c) {
  const auto tf = transition_frequencies(env, c);
  const double dq = tf.f1 - tf.f2 + 2.0 * env.nu;
  if (cfg.phase_mode == PhaseMode::kSynchronized) return dq;
  const auto carriers = resolve_carriers(cfg, env, c);
  return dq - (carriers.f1 - carriers.f2);
}

/// Optical pumping as a classical reset: fidelity into |+1>, the remainder
/// spread evenly over |0> and |-1>.
inline SpinState pumped_state(double fidelity) {
  Matrix3c rho = Matrix3c::Zero();
  rho(kPlus, kPlus) = fidelity;
  rho(kZero, kZero) = 0.5 * (1.0 - fidelity);
  rho(kMinus, kMinus) = 0.5 * (1.0 - fidelity);
  return SpinState(rho);
}

/// Populations after the four phase-cycled Ramsey sequences at one tau.
struct FourRamseyPopulations {
  std::array<Populations, 4> pops;
};

/// Simulates the DQ Ramsey sequence at a fixed free-precession time. The
/// pulse propagators only depend on (config, tau), so they are built once
/// and reused as the environment changes, e.g. over a gyroscope stream.
class RamseyKernel {
 public:
  RamseyKernel(const SequenceConfig& cfg, const PhysicalConstants& c, const FieldEnvironment& nominal_env,
               double tau, std::array<PhasePair, 4> second_pulse_phases)
      : cfg_(cfg), c_(c), tau_(tau), carriers_(resolve_carriers(cfg, nominal_env, c)) {
    cfg_.validate();
    if (!(tau >= 0.0)) throw std::invalid_argument("RamseyKernel: tau must be non-negative");
    const SpinState pumped = pumped_state(cfg_.pump_fidelity);
    for (const auto& ens : cfg_.rf_gradient) {
      Branch b;
      b.weight = ens.weight;
      const Matrix3c u_sq = make_pulse(PulseSpec::sq_pi_f1(0.0, ens.scale), nominal_env);
      const Matrix3c u_dq = make_pulse(PulseSpec::dq(0.0, 0.0, ens.scale), nominal_env);
      b.prepared = apply_pulse(u_dq, apply_pulse(u_sq, pumped));
      for (std::size_t k = 0; k < 4; ++k) {
        auto [p1, p2] = second_pulse_phases[k];
        if (cfg_.phase_mode == PhaseMode::kSynchronized) {
          // The burst restarts at its programmed lab phase, which in the
          // carrier frame lags by the carrier phase accumulated over tau.
          p1 -= kTwoPi * std::fmod(carriers_.f1 * tau, 1.0);
          p2 -= kTwoPi * std::fmod(carriers_.f2 * tau, 1.0);
        }
        b.readout[k] = make_pulse(PulseSpec::dq(p1, p2, ens.scale), nominal_env);
      }
      branches_.push_back(std::move(b));
    }
    pumped_pops_ = populations(pumped);
  }

  double tau() const { return tau_; }
  const Carriers& carriers() const { return carriers_; }
  const SequenceConfig& config() const { return cfg_; }

  /// Ensemble-averaged populations at readout for each of the four phases.
  FourRamseyPopulations run(const FieldEnvironment& env) const {
    FourRamseyPopulations out{};
    for (auto& p : out.pops) p = {0.0, 0.0, 0.0};
    const RotatingFrame frame{carriers_.f1, carriers_.f2};
    for (const auto& b : branches_) {
      const SpinState evolved = evolve_free(b.prepared, tau_, env, c_, cfg_.dephasing, frame);
      for (std::size_t k = 0; k < 4; ++k) {
        const Populations p = populations(apply_pulse(b.readout[k], evolved));
        out.pops[k].p_plus += b.weight * p.p_plus;
        out.pops[k].p_zero += b.weight * p.p_zero;
        out.pops[k].p_minus += b.weight * p.p_minus;
      }
    }
    return out;
  }

  /// Noise-free pump reference level.
  double pump_voltage() const { return readout_voltage<std::mt19937_64>(pumped_pops_, cfg_.detector, c_); }

  /// S = V / V_pump for one readout, with shot noise when rng is given.
  template <class Rng>
  double signal(const Populations& p, Rng* rng) const {
    return normalize_contrast(readout_voltage(p, cfg_.detector, c_, rng, cfg_.averages), pump_voltage());
  }

 private:
  struct Branch {
    double weight = 1.0;
    SpinState prepared;
    std::array<Matrix3c, 4> readout;
  };

  Matrix3c make_pulse(PulseSpec p, const FieldEnvironment& env) const {
    p.duration = cfg_.pulse_duration;
    if (p.duration > 0.0) {
      const auto tf = transition_frequencies(env, c_);
      p.detuning_f1 = tf.f1 - carriers_.f1;
      p.detuning_f2 = tf.f2 - carriers_.f2;
    }
    return pulse_unitary(p);
  }

  SequenceConfig cfg_;
  PhysicalConstants c_;
  double tau_;
  Carriers carriers_;
  std::vector<Branch> branches_;
  Populations pumped_pops_{};
};

/// One DQ Ramsey measurement with the given second-pulse phases.
template <class Rng = std::mt19937_64>
double run_dq_ramsey(const SequenceConfig& cfg, const FieldEnvironment& env, const PhysicalConstants& c,
                     double tau, PhasePair second_pulse_phases, Rng* rng = nullptr) {
  const RamseyKernel kernel(cfg, c, env, tau, {second_pulse_phases, second_pulse_phases, second_pulse_phases,
                                                second_pulse_phases});
  return kernel.signal(kernel.run(env).pops[0], rng);
}

struct FourRamseyResult {
  std::array<double, 4> r{};
  double combined = 0.0;
};

template <class Rng>
FourRamseyResult combine_four(const RamseyKernel& kernel, const FieldEnvironment& env, Rng* rng) {
  const auto pops = kernel.run(env);
  FourRamseyResult out;
  for (std::size_t k = 0; k < 4; ++k) out.r[k] = kernel.signal(pops.pops[k], rng);
  out.combined = kernel.config().combine_scale * (out.r[0] - out.r[1] + out.r[2] - out.r[3]);
  if (rng != nullptr && kernel.config().noise.white_s > 0.0) {
    std::normal_distribution<double> white(0.0, kernel.config().noise.white_s);
    out.combined += white(*rng);
  }
  return out;
}

template <class Rng = std::mt19937_64>
FourRamseyResult run_4ramsey(const SequenceConfig& cfg, const FieldEnvironment& env, const PhysicalConstants& c,
                             double tau, Rng* rng = nullptr) {
  const RamseyKernel kernel(cfg, c, env, tau, cfg.phase_table);
  return combine_four(kernel, env, rng);
}

/// Combined 4-Ramsey signal R = combine_scale * (R1 - R2 + R3 - R4).
template <class Rng = std::mt19937_64>
double run_4ramsey_point(const SequenceConfig& cfg, const FieldEnvironment& env, const PhysicalConstants& c,
                         double tau, Rng* rng = nullptr) {
  return run_4ramsey(cfg, env, c, tau, rng).combined;
}

/// Standard deviation of a single readout S from shot noise.
inline double readout_noise_sigma(const SequenceConfig& cfg, const PhysicalConstants& c) {
  const double v_pump = readout_voltage<std::mt19937_64>(populations(pumped_state(cfg.pump_fidelity)), cfg.detector, c);
  return psn_fractional_uncertainty(cfg.detector, c, cfg.averages) * cfg.detector.V0 / v_pump;
}

/// Standard deviation of the combined signal: four independent readouts
/// plus the configured white noise.
inline double combined_noise_sigma(const SequenceConfig& cfg, const PhysicalConstants& c) {
  const double shot = 2.0 * std::abs(cfg.combine_scale) * readout_noise_sigma(cfg, c);
  return std::hypot(shot, cfg.noise.white_s);
}

/// The four phase-cycled sweeps and their combination over a tau grid.
struct FourRamseySweep {
  std::array<FringeSeries, 4> components;
  FringeSeries combined;
};

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("tau grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("tau grid must be strictly increasing");
  if (grid.front() < 0.0) throw std::invalid_argument("tau grid must be non-negative");
}

template <class Rng = std::mt19937_64>
FourRamseySweep sweep_4ramsey(const SequenceConfig& cfg, const FieldEnvironment& env, const PhysicalConstants& c,
                              const std::vector<double>& tau_grid, Rng* rng = nullptr) {
  check_grid(tau_grid);
  FourRamseySweep out;
  for (auto& comp : out.components) {
    comp.taus = tau_grid;
    comp.values.reserve(tau_grid.size());
  }
  out.combined.taus = tau_grid;
  out.combined.values.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    const auto point = run_4ramsey(cfg, env, c, tau, rng);
    for (std::size_t k = 0; k < 4; ++k) out.components[k].values.push_back(point.r[k]);
    out.combined.values.push_back(point.combined);
  }
  return out;
}

template <class Rng = std::mt19937_64>
FringeSeries sweep_fringes(const SequenceConfig& cfg, const FieldEnvironment& env, const PhysicalConstants& c,
                           const std::vector<double>& tau_grid, Rng* rng = nullptr) {
  return sweep_4ramsey(cfg, env, c, tau_grid, rng).combined;
}

/// Uniform grid of n points from start to stop inclusive.
inline std::vector<double> linear_grid(double start, double stop, std::size_t n) {
  if (n == 0) throw std::invalid_argument("linear_grid: need at least one point");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = start;
    return g;
  }
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + step * static_cast<double>(i);
  return g;
}

using EnvironmentSource = std::function<FieldEnvironment(double t)>;

/// Working-point operation: one combined 4-Ramsey sample per cycle at
/// cfg.tau_wp. The environment (rotation rate in particular) is sampled at
/// each cycle start and held for the cycle.
template <class Rng = std::mt19937_64>
GyroTimeSeries run_gyro_stream(const SequenceConfig& cfg, const EnvironmentSource& env_source,
                               const PhysicalConstants& c, double duration, Rng* rng = nullptr) {
  if (!(duration > 0.0)) throw std::invalid_argument("run_gyro_stream: duration must be positive");
  const FieldEnvironment nominal = env_source(0.0);
  const RamseyKernel kernel(cfg, c, nominal, cfg.tau_wp, cfg.phase_table);
  const auto n_cycles = static_cast<std::size_t>(std::floor(duration / cfg.cycle_period));

  GyroTimeSeries out;
  out.t.reserve(n_cycles);
  out.S.reserve(n_cycles);
  out.nu_true.reserve(n_cycles);
  out.meta.tau_wp = cfg.tau_wp;

  double drift = 0.0;
  std::normal_distribution<double> unit(0.0, 1.0);
  const double drift_step = cfg.noise.random_walk_s * std::sqrt(cfg.cycle_period);
  for (std::size_t k = 0; k < n_cycles; ++k) {
    const double t = static_cast<double>(k) * cfg.cycle_period;
    const FieldEnvironment env = env_source(t);
    double s = combine_four(kernel, env, rng).combined;
    if (rng != nullptr && drift_step > 0.0) {
      drift += drift_step * unit(*rng);
      s += drift;
    }
    out.t.push_back(t);
    out.S.push_back(s);
    out.nu_true.push_back(env.nu);
  }
  return out;
}

}  // namespace ndgyro
