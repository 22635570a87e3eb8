#pragma once

// CSV and JSON files written by the command-line tool. Numbers are printed
// with std::to_chars (shortest round-trip form), so identical inputs give
// identical bytes. Every CSV starts with a schema line
//   # ndgyro-csv v1 <kind>
// followed by a header row whose column names carry SI unit suffixes.

#include <chrono>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ndgyro/config.hpp"
#include "ndgyro/errors.hpp"
#include "ndgyro/rate_table.hpp"
#include "ndgyro/series.hpp"

namespace ndgyro {

inline constexpr std::string_view kToolVersion = "ndgyro 1.0.0";
inline constexpr std::string_view kCsvSchema = "ndgyro-csv v1";

struct Table {
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

  const std::vector<double>& column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return columns[i];
    throw SeriesError("table has no column '" + std::string(name) + "'");
  }
};

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  if (t.header.size() != t.columns.size()) throw std::invalid_argument("write_csv: header/column count mismatch");
  for (const auto& c : t.columns)
    if (c.size() != t.rows()) throw std::invalid_argument("write_csv: ragged columns");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "# " << kCsvSchema << ' ' << t.kind << '\n';
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t.columns[i][r]);
      if (i) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

/// Reads a numeric CSV. Lines starting with '#' are skipped; the first
/// remaining line is the header. Errors carry the line number.
inline Table read_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path.string());
  Table t;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      if (!have_header && trimmed.starts_with("# ")) {
        const auto rest = trimmed.substr(2);
        if (rest.starts_with(kCsvSchema)) t.kind = std::string(detail::trim(rest.substr(kCsvSchema.size())));
      }
      continue;
    }
    const auto cells = detail::split(trimmed, ',');
    if (!have_header) {
      for (auto c : cells) t.header.emplace_back(c);
      t.columns.resize(t.header.size());
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(path.string() + ": expected " + std::to_string(t.header.size()) + " fields", line_no);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        t.columns[i].push_back(detail::parse_double(cells[i]));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what(), line_no, t.header[i]);
      }
    }
  }
  if (!have_header) throw ConfigError(path.string() + ": missing header row");
  return t;
}

/// Rotation program with columns duration_s, rate_dps, accel_dps2.
inline RotationProfile read_profile_csv(const std::filesystem::path& path, const TableLimits& limits = {}) {
  const Table t = read_csv(path);
  RotationProfile p;
  try {
    const auto& d = t.column("duration_s");
    const auto& r = t.column("rate_dps");
    const auto& a = t.column("accel_dps2");
    for (std::size_t i = 0; i < t.rows(); ++i) p.push_back({d[i], r[i], a[i]});
    if (p.empty()) throw std::invalid_argument("profile has no instructions");
    validate_profile(p, limits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return p;
}

inline Table profile_table(const RotationProfile& p) {
  Table t{"profile", {"duration_s", "rate_dps", "accel_dps2"}, {{}, {}, {}}};
  for (const auto& ins : p) {
    t.columns[0].push_back(ins.duration);
    t.columns[1].push_back(ins.rate_setpoint);
    t.columns[2].push_back(ins.accel);
  }
  return t;
}

inline Table telemetry_table(const std::vector<TelemetrySample>& samples) {
  Table t{"telemetry", {"t_s", "angle_deg", "rate_dps", "accel_dps2"}, {{}, {}, {}, {}}};
  for (const auto& s : samples) {
    t.columns[0].push_back(s.t);
    t.columns[1].push_back(s.angle);
    t.columns[2].push_back(s.rate);
    t.columns[3].push_back(s.accel);
  }
  return t;
}

inline Table fringe_table(const FringeSeries& s) {
  Table t{"fringe", {"tau_s", "signal", "sigma"}, {s.taus, s.values, {}}};
  t.columns[2] = s.sigma ? *s.sigma : std::vector<double>(s.size(), 0.0);
  return t;
}

inline Table stream_table(const GyroTimeSeries& g) {
  Table t{"stream", {"t_s", "signal", "nu_true_dps", "nu_hat_dps"}, {g.t, g.S, {}, {}}};
  for (double v : g.nu_true) t.columns[2].push_back(hz_to_dps(v));
  for (std::size_t i = 0; i < g.size(); ++i) t.columns[3].push_back(g.nu_hat.empty() ? 0.0 : hz_to_dps(g.nu_hat[i]));
  return t;
}

inline Table allan_table(const AllanSeries& a) {
  Table t{"allan", {"tau_s", "adev_hz", "adev_dps", "n_samples"}, {a.tau_avg, a.adev, {}, {}}};
  for (double v : a.adev) t.columns[2].push_back(hz_to_dps(v));
  for (auto n : a.n_samples) t.columns[3].push_back(static_cast<double>(n));
  return t;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config_snapshot(c)) j[k] = v;
  return j;
}

/// Files written by one command. The manifest itself is written last and
/// refuses to list files that do not exist.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir, const ExperimentConfig& cfg)
      : command_(std::move(command)), dir_(std::move(out_dir)), cfg_(cfg),
        start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path csv(const std::string& name, const Table& t) {
    const auto p = dir_ / name;
    write_csv(p, t);
    outputs_.push_back(name);
    return p;
  }

  std::filesystem::path json(const std::string& name, const nlohmann::json& j) {
    const auto p = dir_ / name;
    write_json(p, j);
    outputs_.push_back(name);
    return p;
  }

  std::filesystem::path finish() {
    for (const auto& name : outputs_)
      if (!std::filesystem::exists(dir_ / name)) throw std::runtime_error("manifest: missing output " + name);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json j;
    j["command"] = command_;
    j["version"] = std::string(kToolVersion);
    j["seed"] = cfg_.seed;
    j["config"] = config_json(cfg_);
    j["outputs"] = outputs_;
    j["wall_time_s"] = wall;
    const auto p = dir_ / "manifest.json";
    write_json(p, j);
    return p;
  }

 private:
  std::string command_;
  std::filesystem::path dir_;
  ExperimentConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

}  // namespace ndgyro
