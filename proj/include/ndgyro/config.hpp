#pragma once

// Key-value experiment configuration. Sections mirror the modules:
//
//   [constants]  gamma_e gamma_n D A_perp Q q_e
//   [environment] B nu delta_Q delta_B
//   [sequence]   tau_wp pump_duration ... phase_table rf_gradient
//   [detector]   V0 G contrast t_R balanced T2star t_meas bright_weights
//   [noise]      white_s random_walk_s arw_floor_hz
//   [fringes]    tau_start tau_stop points spectrum_step spectrum_stop
//   [table]      max_rate_dps poll lag jitter
//   [budget]     tau overhead
//   [run]        seed
//
// Lines are `key = value`; `#` and `;` start comments. Unknown sections and
// keys are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ndgyro/errors.hpp"
#include "ndgyro/rate_table.hpp"
#include "ndgyro/sequence.hpp"
#include "ndgyro/spin.hpp"

namespace ndgyro {

struct FringeScan {
  double tau_start = 0.0;
  double tau_stop = 5e-3;
  std::size_t points = 500;
  double spectrum_step = 50e-9;  // dense grid for SQ/DQ spectra
  double spectrum_stop = 2e-3;
};

struct TableConfig {
  TableLimits limits;
  TelemetryOptions telemetry;
};

struct BudgetConfig {
  double tau = 1.4e-3;
  std::optional<double> overhead;  // s; default cycle_period/4 - tau_wp
};

struct ExperimentConfig {
  PhysicalConstants constants;
  FieldEnvironment environment;
  SequenceConfig sequence;
  bool snap_working_point = true;
  double arw_floor_hz = 0.0;  // Hz/sqrt(Hz); 0 leaves shot noise alone
  FringeScan fringes;
  TableConfig table;
  BudgetConfig budget;
  std::uint64_t seed = 1;

  double overhead() const { return budget.overhead.value_or(sequence.cycle_period / 4.0 - sequence.tau_wp); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<std::pair<double, double>> parse_pairs(std::string_view s) {
  std::vector<std::pair<double, double>> out;
  for (auto item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw std::invalid_argument("expected a:b pairs separated by commas");
    out.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
  }
  return out;
}

template <class Pairs, class First, class Second>
std::string format_pairs(const Pairs& pairs, First first, Second second) {
  std::string out;
  for (const auto& p : pairs) {
    if (!out.empty()) out += ", ";
    out += format_double(first(p)) + ":" + format_double(second(p));
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define NDGYRO_NUMBER(sec, name, member)                                                        \
  Field {                                                                                       \
    sec, name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_double(v); },     \
        [](const ExperimentConfig& c) { return format_double(c.member); }                       \
  }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        NDGYRO_NUMBER("constants", "gamma_e", constants.gamma_e),
        NDGYRO_NUMBER("constants", "gamma_n", constants.gamma_n),
        NDGYRO_NUMBER("constants", "D", constants.D),
        NDGYRO_NUMBER("constants", "A_perp", constants.A_perp),
        NDGYRO_NUMBER("constants", "Q", constants.Q),
        NDGYRO_NUMBER("constants", "q_e", constants.q_e),
        NDGYRO_NUMBER("environment", "B", environment.B),
        NDGYRO_NUMBER("environment", "nu", environment.nu),
        NDGYRO_NUMBER("environment", "delta_Q", environment.delta_Q),
        NDGYRO_NUMBER("environment", "delta_B", environment.delta_B),
        NDGYRO_NUMBER("sequence", "tau_wp", sequence.tau_wp),
        NDGYRO_NUMBER("sequence", "pump_duration", sequence.pump_duration),
        NDGYRO_NUMBER("sequence", "readout_window", sequence.readout_window),
        NDGYRO_NUMBER("sequence", "cycle_period", sequence.cycle_period),
        NDGYRO_NUMBER("sequence", "pump_fidelity", sequence.pump_fidelity),
        NDGYRO_NUMBER("sequence", "carrier_f1", sequence.carrier_f1),
        NDGYRO_NUMBER("sequence", "carrier_f2", sequence.carrier_f2),
        NDGYRO_NUMBER("sequence", "pulse_duration", sequence.pulse_duration),
        NDGYRO_NUMBER("sequence", "t2_dq", sequence.dephasing.t2_dq),
        NDGYRO_NUMBER("sequence", "t2_sq", sequence.dephasing.t2_sq),
        NDGYRO_NUMBER("sequence", "combine_scale", sequence.combine_scale),
        NDGYRO_NUMBER("sequence", "averages", sequence.averages),
        NDGYRO_NUMBER("detector", "V0", sequence.detector.V0),
        NDGYRO_NUMBER("detector", "G", sequence.detector.G),
        NDGYRO_NUMBER("detector", "contrast", sequence.detector.contrast),
        NDGYRO_NUMBER("detector", "t_R", sequence.detector.t_R),
        NDGYRO_NUMBER("detector", "T2star", sequence.detector.T2star),
        NDGYRO_NUMBER("detector", "t_meas", sequence.detector.t_meas),
        NDGYRO_NUMBER("noise", "white_s", sequence.noise.white_s),
        NDGYRO_NUMBER("noise", "random_walk_s", sequence.noise.random_walk_s),
        NDGYRO_NUMBER("noise", "arw_floor_hz", arw_floor_hz),
        NDGYRO_NUMBER("fringes", "tau_start", fringes.tau_start),
        NDGYRO_NUMBER("fringes", "tau_stop", fringes.tau_stop),
        NDGYRO_NUMBER("fringes", "spectrum_step", fringes.spectrum_step),
        NDGYRO_NUMBER("fringes", "spectrum_stop", fringes.spectrum_stop),
        NDGYRO_NUMBER("table", "max_rate_dps", table.limits.max_rate_dps),
        NDGYRO_NUMBER("table", "poll", table.telemetry.poll),
        NDGYRO_NUMBER("table", "lag", table.telemetry.servo_lag),
        NDGYRO_NUMBER("table", "jitter", table.telemetry.jitter),
        NDGYRO_NUMBER("budget", "tau", budget.tau),
    };
    f.push_back({"sequence", "rf_gradient",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.sequence.rf_gradient.clear();
                   for (auto [w, s] : parse_pairs(v)) c.sequence.rf_gradient.push_back({w, s});
                 },
                 [](const ExperimentConfig& c) {
                   return format_pairs(c.sequence.rf_gradient, [](const SubEnsemble& e) { return e.weight; },
                                       [](const SubEnsemble& e) { return e.scale; });
                 }});
    f.push_back({"sequence", "phase_table",
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto pairs = parse_pairs(v);
                   if (pairs.size() != 4) throw std::invalid_argument("phase_table needs exactly 4 entries");
                   for (std::size_t k = 0; k < 4; ++k)
                     c.sequence.phase_table[k] = {deg_to_rad(pairs[k].first), deg_to_rad(pairs[k].second)};
                 },
                 [](const ExperimentConfig& c) {
                   return format_pairs(c.sequence.phase_table, [](const PhasePair& p) { return rad_to_deg(p.first); },
                                       [](const PhasePair& p) { return rad_to_deg(p.second); });
                 }});
    f.push_back({"sequence", "phase_mode",
                 [](ExperimentConfig& c, std::string_view v) {
                   v = trim(v);
                   if (v == "synchronized") c.sequence.phase_mode = PhaseMode::kSynchronized;
                   else if (v == "continuous") c.sequence.phase_mode = PhaseMode::kContinuous;
                   else throw std::invalid_argument("expected synchronized or continuous");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.sequence.phase_mode == PhaseMode::kSynchronized ? "synchronized"
                                                                                        : "continuous");
                 }});
    f.push_back({"sequence", "snap_working_point",
                 [](ExperimentConfig& c, std::string_view v) { c.snap_working_point = parse_bool(v); },
                 [](const ExperimentConfig& c) { return std::string(c.snap_working_point ? "true" : "false"); }});
    f.push_back({"detector", "balanced",
                 [](ExperimentConfig& c, std::string_view v) { c.sequence.detector.balanced = parse_bool(v); },
                 [](const ExperimentConfig& c) {
                   return std::string(c.sequence.detector.balanced ? "true" : "false");
                 }});
    f.push_back({"detector", "bright_weights",
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto parts = split(v, ',');
                   if (parts.size() != 3) throw std::invalid_argument("bright_weights needs 3 values (+1, 0, -1)");
                   for (std::size_t k = 0; k < 3; ++k) c.sequence.detector.bright_weights[k] = parse_double(parts[k]);
                 },
                 [](const ExperimentConfig& c) {
                   const auto& w = c.sequence.detector.bright_weights;
                   return format_double(w[0]) + ", " + format_double(w[1]) + ", " + format_double(w[2]);
                 }});
    f.push_back({"fringes", "points",
                 [](ExperimentConfig& c, std::string_view v) { c.fringes.points = parse_uint(v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.fringes.points); }});
    f.push_back({"budget", "overhead",
                 [](ExperimentConfig& c, std::string_view v) { c.budget.overhead = parse_double(v); },
                 [](const ExperimentConfig& c) { return format_double(c.overhead()); }});
    f.push_back({"run", "seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_uint(v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    return f;
  }();
  return table;
}

#undef NDGYRO_NUMBER

inline const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

inline bool known_section(std::string_view section) {
  for (const auto& f : fields())
    if (f.section == section) return true;
  return false;
}

}  // namespace detail

/// Checks cross-field consistency; failures are reported as ConfigError.
inline void validate_config(const ExperimentConfig& c) {
  try {
    c.constants.validate();
    c.sequence.validate();
    if (!(c.environment.B >= 0.0)) throw std::invalid_argument("environment.B must be non-negative");
    if (!(c.arw_floor_hz >= 0.0)) throw std::invalid_argument("noise.arw_floor_hz must be non-negative");
    if (!(c.fringes.tau_stop > c.fringes.tau_start && c.fringes.tau_start >= 0.0 && c.fringes.points >= 1))
      throw std::invalid_argument("fringes: need 0 <= tau_start < tau_stop and points >= 1");
    if (!(c.fringes.spectrum_step > 0.0 && c.fringes.spectrum_stop > c.fringes.spectrum_step))
      throw std::invalid_argument("fringes: need 0 < spectrum_step < spectrum_stop");
    if (!(c.table.limits.max_rate_dps > 0.0 && c.table.telemetry.poll > 0.0 && c.table.telemetry.servo_lag >= 0.0 &&
          c.table.telemetry.jitter >= 0.0 && c.table.telemetry.jitter < 0.5 * c.table.telemetry.poll))
      throw std::invalid_argument("table: need positive limits and poll, lag >= 0, 0 <= jitter < poll/2");
    if (!(c.budget.tau > 0.0)) throw std::invalid_argument("budget.tau must be positive");
    if (!(c.overhead() >= 0.0)) throw std::invalid_argument("budget.overhead must be non-negative");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Applies `text` on top of `base`. `default_section` names the section for
/// keys that appear before any [section] header (empty: not allowed).
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {},
                                     std::string_view default_section = {}) {
  std::string section(default_section);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!detail::known_section(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside of any section", line_no, key);
    const auto* field = detail::find_field(section, key);
    if (field == nullptr) throw ConfigError("unknown key in [" + section + "]", line_no, key);
    try {
      field->set(base, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), line_no, key);
    }
  }
  validate_config(base);
  return base;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// A constants profile: PhysicalConstants keys, optionally under [constants].
inline PhysicalConstants parse_constants_profile(std::string_view text) {
  const ExperimentConfig c = parse_config(text, {}, "constants");
  return c.constants;
}

/// Every key with its effective value, in table order, as "section.key".
inline std::vector<std::pair<std::string, std::string>> config_snapshot(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : detail::fields()) out.emplace_back(f.section + "." + f.key, f.get(c));
  return out;
}

/// Round-trippable text form of the configuration.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::vector<std::string> sections;
  for (const auto& f : detail::fields())
    if (std::find(sections.begin(), sections.end(), f.section) == sections.end()) sections.push_back(f.section);
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += "\n";
    out += "[" + s + "]\n";
    for (const auto& f : detail::fields())
      if (f.section == s) out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace ndgyro
