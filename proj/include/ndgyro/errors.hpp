#pragma once

#include <stdexcept>
#include <string>

namespace ndgyro {

/// Thrown by dq_splitting when D^2 - (gamma_e B)^2 vanishes, i.e. near the
/// ground-state level anticrossing where the perturbative correction fails.
class SingularDenominatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
 public:
  enum class Kind { kInsufficientSpan, kNonConvergence };

  FitError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Input sampling that an operation cannot handle (non-uniform grid,
/// too-short series, ...).
class SeriesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration file problems. Carries the offending line and key so the
/// CLI can point at them.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : std::runtime_error(format(what, line, key)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "key '" + key + "': ";
    return out + what;
  }

  int line_;
  std::string key_;
};

}  // namespace ndgyro
