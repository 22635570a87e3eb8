// ndgyro: fringes | gyro | allan | budget
//
// Exit codes: 0 success, 1 domain error (fit/series/physics), 2 usage or
// configuration error.

#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "ndgyro/commands.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

void add_common(CLI::App* cmd, ndgyro::CommandOptions& opts) {
  cmd->add_option_function<std::string>("--config", [&opts](const std::string& v) { opts.config_path = v; },
                                        "Configuration file (key = value with [sections])");
  cmd->add_option_function<std::uint64_t>("--seed", [&opts](std::uint64_t v) { opts.seed = v; },
                                          "RNG seed, overrides [run] seed");
  cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diamond 14N nuclear-spin gyroscope simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ndgyro::kToolVersion));

  ndgyro::CommandOptions opts;
  auto* fringes = app.add_subcommand("fringes", "DQ 4-Ramsey fringe scan, spectra and fit");
  add_common(fringes, opts);

  auto* gyro = app.add_subcommand("gyro", "Working-point operation on a rate-table profile");
  add_common(gyro, opts);
  gyro->add_option_function<std::string>("--profile", [&opts](const std::string& v) { opts.profile_path = v; },
                                         "Profile CSV (duration_s, rate_dps, accel_dps2)")
      ->required();
  gyro->add_option_function<double>("--duration", [&opts](double v) { opts.duration = v; },
                                    "Stream length in s (default: profile length)");

  auto* allan = app.add_subcommand("allan", "Non-rotating stream and Allan deviation");
  add_common(allan, opts);
  allan->add_option_function<double>("--duration", [&opts](double v) { opts.duration = v; },
                                     "Stream length in s (default 1200)");

  auto* budget = app.add_subcommand("budget", "Shot-noise budget, dynamic range and working point");
  add_common(budget, opts);
  budget->add_option("--epsilon", opts.epsilon, "Linearity tolerance for the dynamic range")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fringes) ndgyro::cmd_fringes(opts, std::cout);
    else if (*gyro) ndgyro::cmd_gyro(opts, std::cout);
    else if (*allan) ndgyro::cmd_allan(opts, std::cout);
    else if (*budget) ndgyro::cmd_budget(opts, std::cout);
  } catch (const ndgyro::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ndgyro::FitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}
