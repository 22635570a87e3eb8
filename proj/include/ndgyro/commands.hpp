#pragma once

// Subcommands of the ndgyro tool. Each one loads a configuration, runs a
// simulation with a seeded generator, writes CSV/JSON outputs and finally a
// manifest. Results are also returned for programmatic use.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndgyro/analysis/allan.hpp"
#include "ndgyro/analysis/calibration.hpp"
#include "ndgyro/analysis/fit.hpp"
#include "ndgyro/analysis/spectrum.hpp"
#include "ndgyro/analysis/working_point.hpp"
#include "ndgyro/config.hpp"
#include "ndgyro/detector.hpp"
#include "ndgyro/io.hpp"
#include "ndgyro/rate_table.hpp"
#include "ndgyro/sequence.hpp"

namespace ndgyro {

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::optional<std::string> profile_path;
  std::optional<double> duration;  // s
  double epsilon = 1e-4;
};

inline ExperimentConfig resolve_config(const CommandOptions& opts) {
  ExperimentConfig cfg = opts.config_path ? load_config(*opts.config_path) : ExperimentConfig{};
  if (opts.seed) cfg.seed = *opts.seed;
  validate_config(cfg);
  return cfg;
}

inline nlohmann::json fit_json(const FringeFit& fit) {
  nlohmann::json j;
  j["A"] = fit.A;
  j["f_hz"] = fit.f;
  j["phi_rad"] = fit.phi;
  j["T2star_s"] = fit.T2star;
  j["offset"] = fit.offset;
  j["sigma"] = {{"A", fit.sigma(FringeFit::kAmplitude)},
                {"f_hz", fit.sigma(FringeFit::kFrequency)},
                {"phi_rad", fit.sigma(FringeFit::kPhase)},
                {"T2star_s", fit.sigma(FringeFit::kT2)},
                {"offset", fit.sigma(FringeFit::kOffset)}};
  nlohmann::json cov = nlohmann::json::array();
  for (int r = 0; r < 5; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 5; ++c) row.push_back(fit.covariance(r, c));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["residual_rms"] = fit.residual_rms;
  j["iterations"] = fit.iterations;
  return j;
}

// ---------------------------------------------------------------------------
// Shared stages
// ---------------------------------------------------------------------------

/// Noisy fringe scan over the configured grid, fitted with the predicted
/// fringe frequency as alias hint.
struct FringeStage {
  FourRamseySweep sweep;
  FringeFit fit;
  double expected_f = 0.0;
};

inline FringeStage run_fringe_stage(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  FringeStage st;
  const auto grid = linear_grid(cfg.fringes.tau_start, cfg.fringes.tau_stop, cfg.fringes.points);
  st.sweep = sweep_4ramsey(cfg.sequence, cfg.environment, cfg.constants, grid, &rng);
  st.sweep.combined.sigma = std::vector<double>(grid.size(), combined_noise_sigma(cfg.sequence, cfg.constants));
  st.expected_f = expected_fringe_frequency(cfg.sequence, cfg.environment, cfg.constants);
  FitOptions fo;
  fo.frequency_hint = st.expected_f;
  st.fit = fit_decaying_sine(st.sweep.combined, fo);
  return st;
}

/// Working point and calibration from a fringe scan, plus the zero-rate
/// baseline from a short non-rotating acquisition.
struct CalibrationStage {
  FringeStage fringes;
  double tau_wp = 0.0;
  Calibration cal;
  double baseline = 0.0;
};

inline constexpr double kBaselineDuration = 30.0;  // s

inline CalibrationStage run_calibration_stage(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  CalibrationStage st;
  st.fringes = run_fringe_stage(cfg, rng);
  const auto& fit = st.fringes.fit;
  st.tau_wp = cfg.snap_working_point ? snap_to_zero_crossing(cfg.sequence.tau_wp, fit.f, fit.phi) : cfg.sequence.tau_wp;
  st.cal = calibration_from_fringes(fit, st.tau_wp);
  SequenceConfig seq = cfg.sequence;
  seq.tau_wp = st.tau_wp;
  FieldEnvironment rest = cfg.environment;
  rest.nu = 0.0;
  const auto base = run_gyro_stream(seq, [rest](double) { return rest; }, cfg.constants, kBaselineDuration, &rng);
  double sum = 0.0;
  for (double s : base.S) sum += s;
  st.baseline = sum / static_cast<double>(base.size());
  return st;
}

/// Extra white noise on the combined signal that brings the rotation noise
/// up to `arw_hz` (Hz/sqrt(Hz)); shot noise already accounts for part of it.
inline double white_noise_for_floor(const SequenceConfig& seq, const PhysicalConstants& c, double alpha,
                                    double arw_hz) {
  const double target = std::abs(alpha) * arw_hz / std::sqrt(seq.cycle_period);
  SequenceConfig shot_only = seq;
  shot_only.noise.white_s = 0.0;
  const double shot = combined_noise_sigma(shot_only, c);
  return std::sqrt(std::max(0.0, target * target - shot * shot));
}

inline nlohmann::json calibration_json(const CalibrationStage& st) {
  nlohmann::json j;
  j["tau_wp_s"] = st.tau_wp;
  j["alpha_per_hz"] = st.cal.alpha;
  j["alpha_percent_per_dps"] = st.cal.percent_per_dps();
  j["alignment"] = st.cal.alignment;
  j["misaligned"] = st.cal.misaligned;
  j["baseline"] = st.baseline;
  j["fit"] = fit_json(st.fringes.fit);
  j["expected_f_hz"] = st.fringes.expected_f;
  return j;
}

// ---------------------------------------------------------------------------
// fringes
// ---------------------------------------------------------------------------

struct FringesResult {
  FringeStage stage;
  Spectrum combined_spectrum;
  std::array<Spectrum, 4> dense_components;
  Spectrum dense_combined;
};

inline FringesResult cmd_fringes(const CommandOptions& opts, std::ostream& log) {
  const ExperimentConfig cfg = resolve_config(opts);
  RunManifest manifest("fringes", opts.out, cfg);
  std::mt19937_64 rng(cfg.seed);
  FringesResult res;
  res.stage = run_fringe_stage(cfg, rng);
  const auto& sweep = res.stage.sweep;

  Table comps{"fringe-components", {"tau_s", "r1", "r2", "r3", "r4", "combined"}, {sweep.combined.taus}};
  for (const auto& c : sweep.components) comps.columns.push_back(c.values);
  comps.columns.push_back(sweep.combined.values);
  manifest.csv("fringes_components.csv", comps);
  manifest.csv("fringes.csv", fringe_table(sweep.combined));

  res.combined_spectrum = power_spectrum(sweep.combined);
  manifest.csv("spectrum.csv", Table{"spectrum", {"f_hz", "power"},
                                     {res.combined_spectrum.freqs, res.combined_spectrum.power}});

  // Dense scan resolving the single-quantum lines next to the DQ line.
  const auto n_dense = static_cast<std::size_t>(std::floor(cfg.fringes.spectrum_stop / cfg.fringes.spectrum_step)) + 1;
  const auto dense = sweep_4ramsey(cfg.sequence, cfg.environment, cfg.constants,
                                   linear_grid(0.0, cfg.fringes.spectrum_step * static_cast<double>(n_dense - 1), n_dense),
                                   &rng);
  Table spec{"spectrum-dense", {"f_hz", "power_r1", "power_r2", "power_r3", "power_r4", "power_combined"}, {}};
  for (std::size_t k = 0; k < 4; ++k) res.dense_components[k] = power_spectrum(dense.components[k], 1);
  res.dense_combined = power_spectrum(dense.combined, 1);
  spec.columns.push_back(res.dense_combined.freqs);
  for (const auto& s : res.dense_components) spec.columns.push_back(s.power);
  spec.columns.push_back(res.dense_combined.power);
  manifest.csv("spectrum_dense.csv", spec);

  nlohmann::json report = fit_json(res.stage.fit);
  report["expected_f_hz"] = res.stage.expected_f;
  report["sample_rate_hz"] = 1.0 / uniform_step(sweep.combined.taus);
  manifest.json("fit.json", report);
  manifest.finish();

  const auto& fit = res.stage.fit;
  log << "f_DQ fit     " << fit.f << " Hz (sigma " << fit.sigma(FringeFit::kFrequency) << " Hz, expected "
      << res.stage.expected_f << " Hz)\n"
      << "T2*          " << fit.T2star * 1e3 << " ms (sigma " << fit.sigma(FringeFit::kT2) * 1e3 << " ms)\n"
      << "amplitude    " << fit.A * 100.0 << " %\n";
  return res;
}

// ---------------------------------------------------------------------------
// gyro
// ---------------------------------------------------------------------------

struct GyroResult {
  CalibrationStage calibration;
  std::vector<TelemetrySample> telemetry;
  GyroTimeSeries stream;
  std::optional<LinearRegression> regression;  // S on nu (Hz) for sweeps
  double rms_error_hz = 0.0;                   // rms of nu_hat - nu_true
  double shot_noise_hz = 0.0;                  // predicted per-sample rate noise
};

inline GyroResult cmd_gyro(const CommandOptions& opts, std::ostream& log) {
  const ExperimentConfig cfg = resolve_config(opts);
  if (!opts.profile_path) throw ConfigError("gyro needs --profile");
  const RotationProfile profile = read_profile_csv(*opts.profile_path, cfg.table.limits);
  RunManifest manifest("gyro", opts.out, cfg);
  std::mt19937_64 rng(cfg.seed);
  GyroResult res;
  res.calibration = run_calibration_stage(cfg, rng);
  const auto& cal = res.calibration;

  const MotionTrace trace(profile, {}, cfg.table.limits);
  res.telemetry = run_profile(trace, cfg.table.telemetry, &rng);
  SequenceConfig seq = cfg.sequence;
  seq.tau_wp = cal.tau_wp;
  if (cfg.arw_floor_hz > 0.0) seq.noise.white_s = white_noise_for_floor(seq, cfg.constants, cal.cal.alpha, cfg.arw_floor_hz);
  const FieldEnvironment base_env = cfg.environment;
  const EnvironmentSource source = [&trace, base_env](double t) {
    FieldEnvironment e = base_env;
    e.nu = dps_to_hz(trace.rate(t));
    return e;
  };
  const double duration = opts.duration.value_or(trace.end() - trace.start());
  res.stream = run_gyro_stream(seq, source, cfg.constants, duration, &rng);
  res.stream.meta.seed = cfg.seed;
  apply_calibration(res.stream, cal.cal.alpha, cal.baseline);

  const auto [lo, hi] = std::minmax_element(res.stream.nu_true.begin(), res.stream.nu_true.end());
  if (res.stream.size() >= 3 && *hi > *lo) res.regression = calibration_from_sweep(res.stream);
  double acc = 0.0;
  for (std::size_t i = 0; i < res.stream.size(); ++i) {
    const double e = res.stream.nu_hat[i] - res.stream.nu_true[i];
    acc += e * e;
  }
  res.rms_error_hz = res.stream.size() ? std::sqrt(acc / static_cast<double>(res.stream.size())) : 0.0;
  res.shot_noise_hz = combined_noise_sigma(seq, cfg.constants) / std::abs(cal.cal.alpha);

  manifest.csv("profile.csv", profile_table(profile));
  manifest.csv("telemetry.csv", telemetry_table(res.telemetry));
  manifest.csv("stream.csv", stream_table(res.stream));
  nlohmann::json report = calibration_json(cal);
  if (res.regression) {
    report["sweep"] = {{"alpha_per_hz", res.regression->slope},
                       {"alpha_percent_per_dps", 100.0 * res.regression->slope / kDegreesPerRevolution},
                       {"alpha_stderr_percent_per_dps", 100.0 * res.regression->slope_stderr / kDegreesPerRevolution},
                       {"intercept", res.regression->intercept},
                       {"r_squared", res.regression->r_squared}};
  }
  report["rms_error_dps"] = hz_to_dps(res.rms_error_hz);
  report["shot_noise_dps"] = hz_to_dps(res.shot_noise_hz);
  manifest.json("gyro.json", report);
  manifest.finish();

  log << "tau_wp       " << cal.tau_wp * 1e3 << " ms\n"
      << "alpha fringe " << cal.cal.percent_per_dps() << " %/(deg/s)\n";
  if (res.regression)
    log << "alpha sweep  " << 100.0 * res.regression->slope / kDegreesPerRevolution << " +/- "
        << 100.0 * res.regression->slope_stderr / kDegreesPerRevolution << " %/(deg/s)\n";
  log << "rms error    " << hz_to_dps(res.rms_error_hz) << " deg/s (shot noise " << hz_to_dps(res.shot_noise_hz)
      << " deg/s per sample)\n";
  if (cal.cal.misaligned) log << "warning: working point is off the steepest fringe slope\n";
  return res;
}

// ---------------------------------------------------------------------------
// allan
// ---------------------------------------------------------------------------

struct AllanResult {
  CalibrationStage calibration;
  AllanSeries allan;
  AllanSummary summary;
  std::optional<double> adev_300s_hz;
  double psn_prediction_hz = 0.0;  // shot-noise budget at tau_wp, Hz/sqrt(Hz)
};

inline constexpr double kDefaultAllanDuration = 1200.0;  // s
inline constexpr double kArwRangeMax = 1.0;              // s

inline AllanResult cmd_allan(const CommandOptions& opts, std::ostream& log) {
  const ExperimentConfig cfg = resolve_config(opts);
  const double duration = opts.duration.value_or(kDefaultAllanDuration);
  if (!(duration > 0.0)) throw ConfigError("--duration must be positive");
  RunManifest manifest("allan", opts.out, cfg);
  std::mt19937_64 rng(cfg.seed);
  AllanResult res;
  res.calibration = run_calibration_stage(cfg, rng);
  const auto& cal = res.calibration;

  SequenceConfig seq = cfg.sequence;
  seq.tau_wp = cal.tau_wp;
  if (cfg.arw_floor_hz > 0.0) seq.noise.white_s = white_noise_for_floor(seq, cfg.constants, cal.cal.alpha, cfg.arw_floor_hz);
  FieldEnvironment rest = cfg.environment;
  rest.nu = 0.0;
  GyroTimeSeries stream = run_gyro_stream(seq, [rest](double) { return rest; }, cfg.constants, duration, &rng);
  stream.meta.seed = cfg.seed;
  apply_calibration(stream, cal.cal.alpha, cal.baseline);

  const double tau0 = seq.cycle_period;
  res.allan = allan_deviation(stream.nu_hat, tau0);
  res.summary = summarize_allan(res.allan, kArwRangeMax);
  const auto m300 = static_cast<std::size_t>(std::llround(300.0 / tau0));
  if (2 * m300 <= stream.size()) res.adev_300s_hz = allan_deviation_at(stream.nu_hat, tau0, {m300}).adev.front();
  res.psn_prediction_hz = psn_rotation_sensitivity(cfg.sequence.detector, cfg.constants, cal.tau_wp).hz_per_rthz;

  manifest.csv("stream.csv", stream_table(stream));
  manifest.csv("allan.csv", allan_table(res.allan));
  nlohmann::json report = calibration_json(cal);
  report["arw_hz_per_rthz"] = res.summary.arw;
  report["arw_deg_per_rts"] = hz_to_dps(res.summary.arw);
  report["white_slope"] = res.summary.white_slope;
  report["bias_stability_hz"] = res.summary.bias_stability;
  report["bias_stability_dps"] = hz_to_dps(res.summary.bias_stability);
  report["bias_stability_tau_s"] = res.summary.bias_stability_tau;
  if (res.adev_300s_hz) report["adev_300s_hz"] = *res.adev_300s_hz;
  report["psn_prediction_hz_per_rthz"] = res.psn_prediction_hz;
  manifest.json("allan.json", report);
  manifest.finish();

  log << "ARW          " << res.summary.arw * 1e3 << " mHz/sqrt(Hz) = " << hz_to_dps(res.summary.arw)
      << " deg/sqrt(s) (shot-noise budget " << res.psn_prediction_hz * 1e3 << " mHz/sqrt(Hz))\n"
      << "slope        " << res.summary.white_slope << "\n"
      << "bias stab.   " << res.summary.bias_stability * 1e3 << " mHz at " << res.summary.bias_stability_tau << " s\n";
  if (res.adev_300s_hz) log << "adev(300 s)  " << *res.adev_300s_hz * 1e3 << " mHz\n";
  return res;
}

// ---------------------------------------------------------------------------
// budget
// ---------------------------------------------------------------------------

struct BudgetResult {
  RotationSensitivity sensitivity;
  double photoelectrons = 0.0;
  double psn_fraction = 0.0;
  double nu0_hz = 0.0;
  DynamicRange range;
  WorkingPoint working_point;
  double cos_at_wp = 0.0;
};

inline BudgetResult cmd_budget(const CommandOptions& opts, std::ostream& log) {
  const ExperimentConfig cfg = resolve_config(opts);
  if (!(opts.epsilon >= 0.0 && opts.epsilon < 0.1)) throw ConfigError("--epsilon must lie in [0, 0.1)");
  RunManifest manifest("budget", opts.out, cfg);
  const auto& det = cfg.sequence.detector;
  BudgetResult res;
  res.sensitivity = psn_rotation_sensitivity(det, cfg.constants, cfg.budget.tau);
  res.photoelectrons = photoelectron_count(det, cfg.constants);
  res.psn_fraction = psn_fractional_uncertainty(det, cfg.constants);
  res.nu0_hz = nu0_from_tau(cfg.sequence.tau_wp);
  res.range = dynamic_range(opts.epsilon, res.nu0_hz);
  const double f = expected_fringe_frequency(cfg.sequence, cfg.environment, cfg.constants);
  res.working_point = select_working_point(det.T2star, f, cfg.overhead());
  res.cos_at_wp = std::cos(kTwoPi * f * res.working_point.tau_wp);

  nlohmann::json j;
  j["tau_s"] = cfg.budget.tau;
  j["sensitivity_hz_per_rthz"] = res.sensitivity.hz_per_rthz;
  j["sensitivity_deg_per_rts"] = res.sensitivity.dps_per_rts;
  j["photoelectrons"] = res.photoelectrons;
  j["psn_fractional_uncertainty"] = res.psn_fraction;
  j["nu0_hz"] = res.nu0_hz;
  j["epsilon"] = opts.epsilon;
  j["dynamic_range_hz"] = res.range.hz;
  j["dynamic_range_dps"] = res.range.dps;
  j["fringe_frequency_hz"] = f;
  j["overhead_s"] = cfg.overhead();
  j["tau_fixed_cycle_s"] = res.working_point.tau_fixed_cycle;
  j["tau_duty_cycle_s"] = res.working_point.tau_duty_cycle;
  j["tau_wp_s"] = res.working_point.tau_wp;
  j["cos_at_tau_wp"] = res.cos_at_wp;
  manifest.json("budget.json", j);
  manifest.finish();

  log << "sensitivity  " << res.sensitivity.hz_per_rthz * 1e3 << " mHz/sqrt(Hz) = " << res.sensitivity.dps_per_rts
      << " deg/sqrt(s) at tau = " << cfg.budget.tau * 1e3 << " ms\n"
      << "photoelectrons per readout " << res.photoelectrons << "\n"
      << "nu0          " << res.nu0_hz << " Hz at tau_wp = " << cfg.sequence.tau_wp * 1e3 << " ms\n"
      << "dyn. range   +/-" << res.range.hz << " Hz = +/-" << res.range.dps << " deg/s at epsilon = " << opts.epsilon
      << "\n"
      << "working pt.  fixed-cycle " << res.working_point.tau_fixed_cycle * 1e3 << " ms, duty-cycle "
      << res.working_point.tau_duty_cycle * 1e3 << " ms, snapped " << res.working_point.tau_wp * 1e3
      << " ms (cos = " << res.cos_at_wp << ")\n";
  return res;
}

}  // namespace ndgyro
