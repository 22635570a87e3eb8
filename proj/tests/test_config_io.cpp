#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ndgyro/config.hpp"
#include "ndgyro/io.hpp"

using namespace ndgyro;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ndgyro_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

}  // namespace

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(validate_config(c));
  EXPECT_NEAR(c.overhead(), 7e-3 / 4.0 - 1.428e-3, 1e-15);
}

TEST(Config, ParsesSectionsAndComments) {
  const auto c = parse_config(
      "# comment\n"
      "[environment]\n"
      "B = 470   ; trailing comment\n"
      "nu = 0.25\n"
      "[sequence]\n"
      "rf_gradient = 0.5:0.9, 0.5:1.1\n"
      "phase_table = 0:0, 180:0, 180:180, 0:180\n"
      "phase_mode = continuous\n"
      "[detector]\n"
      "balanced = false\n"
      "[run]\n"
      "seed = 42\n");
  EXPECT_EQ(c.environment.B, 470.0);
  EXPECT_EQ(c.environment.nu, 0.25);
  ASSERT_EQ(c.sequence.rf_gradient.size(), 2u);
  EXPECT_EQ(c.sequence.rf_gradient[1].scale, 1.1);
  EXPECT_NEAR(c.sequence.phase_table[1].first, kPi, 1e-15);
  EXPECT_EQ(c.sequence.phase_mode, PhaseMode::kContinuous);
  EXPECT_FALSE(c.sequence.detector.balanced);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, UnknownKeyReportsLineAndKey) {
  try {
    parse_config("[environment]\nB = 482\n\nBfield = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.key(), "Bfield");
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(Config, MalformedInputRejected) {
  EXPECT_THROW(parse_config("[nosuch]\n"), ConfigError);
  EXPECT_THROW(parse_config("[environment\n"), ConfigError);
  EXPECT_THROW(parse_config("B = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[environment]\nB 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[environment]\nB = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("[environment]\nB = 1.0x\n"), ConfigError);
  EXPECT_THROW(parse_config("[detector]\nbalanced = maybe\n"), ConfigError);
}

TEST(Config, CrossFieldValidation) {
  EXPECT_THROW(parse_config("[sequence]\ncycle_period = 1e-3\n"), ConfigError);
  EXPECT_THROW(parse_config("[detector]\ncontrast = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[sequence]\nrf_gradient = 0.4:1.0\n"), ConfigError);
  EXPECT_THROW(parse_config("[noise]\narw_floor_hz = -1\n"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig c;
  c.environment.B = 481.25;
  c.sequence.rf_gradient = {SubEnsemble{0.3, 0.95}, SubEnsemble{0.7, 1.02}};
  c.sequence.dephasing = Dephasing(1.7e-3, 0.9e-3);
  c.sequence.phase_table[2] = {1.0, 2.0};
  c.budget.overhead = 0.52e-3;
  c.seed = 77;
  c.arw_floor_hz = 0.013;
  const std::string text = to_config_text(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(to_config_text(back), text);
  EXPECT_EQ(config_snapshot(back), config_snapshot(c));
  EXPECT_EQ(back.sequence.dephasing.t2_sq, 0.9e-3);
  EXPECT_EQ(back.budget.overhead, 0.52e-3);
}

TEST(Config, ConstantsProfileWithoutHeader) {
  const auto c = parse_constants_profile("D = 2.87e9\nq_e = 1.6e-19\n");
  EXPECT_EQ(c.D, 2.87e9);
  EXPECT_EQ(c.q_e, 1.6e-19);
  EXPECT_THROW(parse_constants_profile("B = 3\n"), ConfigError);
}

TEST(Config, LoadMissingFileIsConfigError) { EXPECT_THROW(load_config("/nonexistent/ndgyro.ini"), ConfigError); }

TEST(Csv, WriteReadRoundTripIsExact) {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Table t{"fringe", {"tau_s", "signal", "sigma"}, {{}, {}, {}}};
  for (int i = 0; i < 50; ++i)
    for (auto& col : t.columns) col.push_back(u(rng) * std::pow(10.0, i % 9 - 4));
  write_csv(dir.path() / "a.csv", t);
  const Table back = read_csv(dir.path() / "a.csv");
  EXPECT_EQ(back.kind, "fringe");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.columns, t.columns);
  write_csv(dir.path() / "b.csv", back);
  EXPECT_EQ(slurp(dir.path() / "a.csv"), slurp(dir.path() / "b.csv"));
}

TEST(Csv, LayoutHasSchemaLineAndHeader) {
  TempDir dir;
  const Table t{"allan", {"tau_s", "adev_hz"}, {{0.5, 1.0}, {2.0, 1.5}}};
  write_csv(dir.path() / "t.csv", t);
  EXPECT_EQ(slurp(dir.path() / "t.csv"), "# ndgyro-csv v1 allan\ntau_s,adev_hz\n0.5,2\n1,1.5\n");
}

TEST(Csv, RaggedRowReportsLine) {
  TempDir dir;
  write_file(dir.path() / "p.csv", "duration_s,rate_dps,accel_dps2\n10,20,1\n5,3\n");
  try {
    read_csv(dir.path() / "p.csv");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Csv, ProfileReaderValidates) {
  TempDir dir;
  write_file(dir.path() / "ok.csv", "# rotation program\nduration_s,rate_dps,accel_dps2\n100,180,1.8\n50,0,1.8\n");
  const auto p = read_profile_csv(dir.path() / "ok.csv");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].rate_setpoint, 180.0);
  write_file(dir.path() / "fast.csv", "duration_s,rate_dps,accel_dps2\n10,900,1\n");
  EXPECT_THROW(read_profile_csv(dir.path() / "fast.csv"), ConfigError);
  write_file(dir.path() / "cols.csv", "t,rate\n1,2\n");
  EXPECT_THROW(read_profile_csv(dir.path() / "cols.csv"), ConfigError);
}

TEST(Manifest, ListsOutputsAndConfig) {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.seed = 9;
  RunManifest m("fringes", dir.path() / "run", cfg);
  m.csv("x.csv", Table{"x", {"a_s"}, {{1.0, 2.0}}});
  m.json("y.json", nlohmann::json{{"k", 1}});
  const auto path = m.finish();
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j["command"], "fringes");
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["outputs"], (std::vector<std::string>{"x.csv", "y.json"}));
  EXPECT_EQ(j["config"]["environment.B"], "482");
  EXPECT_EQ(j["version"], std::string(kToolVersion));
}
