#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "tfdcool/cli.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tfd;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("tfdcool_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& content = {}) const {
    const auto p = path_ / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

TEST(Cool, DefaultCurve) {
  const auto r = invoke({"cool", "--t-max", "2", "--steps", "8"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kappa_t", "tau_closed", "tau_numeric", "nbar", "trace_error"}));
  EXPECT_EQ(std::stod(rows[1][0]), 0.0);
  EXPECT_EQ(std::stod(rows[1][1]), 1.0);
  EXPECT_NEAR(std::stod(rows[3][0]), 0.5, 1e-15);
  EXPECT_NEAR(std::stod(rows[3][1]), 0.576260710432, 1e-11);
  EXPECT_NEAR(std::stod(rows[3][2]), 0.576260710432, 1e-7);
  EXPECT_NEAR(std::stod(rows[3][3]), 0.214097265698, 1e-10);
  EXPECT_LT(std::stod(rows[9][1]), std::stod(rows[1][1]));
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
}

TEST(Cool, Methods) {
  const auto closed = parse_csv(invoke({"cool", "--method", "closed", "--steps", "4"}).out);
  ASSERT_EQ(closed.size(), 6u);
  EXPECT_EQ(closed[2].size(), 5u);
  EXPECT_TRUE(closed[2][2].empty());

  const auto both = invoke({"cool", "--method", "both", "--steps", "2", "--t-max", "1"});
  ASSERT_EQ(both.code, 0) << both.err;
  const auto rows = parse_csv(both.out);
  ASSERT_EQ(rows[0].back(), "tau_numeric_lindblad");
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_NEAR(std::stod(rows[i][5]), std::stod(rows[i][1]), 1e-5);

  const auto lind = parse_csv(invoke({"cool", "--method", "lindblad", "--steps", "2", "--t-max", "1"}).out);
  EXPECT_NEAR(std::stod(lind[3][2]), std::stod(lind[3][1]), 1e-5);
}

TEST(Cool, InvalidConfigurationIsExitTwo) {
  EXPECT_EQ(invoke({"cool", "--tau0", "-1"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--tau0", "0"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--kappa", "0"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--t-max", "0"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--steps", "0"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--cutoff", "1"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--cutoff", "many"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--method", "euler"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--tol", "x=1"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--no-such-flag"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"two-mode", "--cutoff", "64"}).code, cli::kExitConfig);
  const auto r = invoke({"cool", "--tau0", "-1"});
  EXPECT_NE(r.err.find("tau0"), std::string::npos) << r.err;
}

TEST(Cool, UnwritableOutputIsExitTwo) {
  EXPECT_EQ(invoke({"cool", "--out", "/nonexistent_dir/x.csv"}).code, cli::kExitConfig);
}

TEST(TwoMode, NumericalFailureIsExitThree) {
  // Six levels cannot hold the purification at tau0 = 3.
  const auto r = invoke({"two-mode", "--tau0", "3", "--cutoff", "6", "--steps", "1"});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("kappa*t = 0"), std::string::npos) << r.err;
}

TEST(Config, FileIsReadAndFlagsOverride) {
  TempDir dir;
  const auto cfg = dir.file("run.cfg", "# comment\ntau0 = 1\nt-max = 1\nsteps = 2\nmethod = closed\n");
  const auto from_file = parse_csv(invoke({"cool", "--config", cfg.string()}).out);
  ASSERT_EQ(from_file.size(), 4u);
  EXPECT_EQ(std::stod(from_file[1][1]), 1.0);
  EXPECT_TRUE(from_file[1][2].empty());  // method = closed was honoured
  EXPECT_NEAR(std::stod(from_file[3][0]), 1.0, 1e-15);

  const auto overridden = parse_csv(invoke({"cool", "--config", cfg.string(), "--tau0", "2"}).out);
  ASSERT_EQ(overridden.size(), 4u);
  EXPECT_EQ(std::stod(overridden[1][1]), 2.0);
}

TEST(Config, EmptyFileGivesDefaults) {
  TempDir dir;
  const auto cfg = dir.file("empty.cfg", "\n");
  EXPECT_EQ(invoke({"cool", "--config", cfg.string()}).out, invoke({"cool"}).out);
}

TEST(Config, UnknownKeyIsExitTwo) {
  TempDir dir;
  const auto cfg = dir.file("bad.cfg", "bogus = 1\n");
  EXPECT_EQ(invoke({"cool", "--config", cfg.string()}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"cool", "--config", (dir.file("missing.cfg")).string()}).code, cli::kExitConfig);
}

TEST(TwoMode, Columns) {
  const auto r = invoke({"two-mode", "--t-max", "1", "--steps", "2", "--cutoff", "24"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kappa_t", "trace_dist_analytic_vs_kraus", "sys_tau_numeric",
                                               "sys_tau_closed", "tilde_nbar", "purity_total"}));
  const double sinh2 = std::pow(std::sinh(theta_from_tau(1.0)), 2);
  EXPECT_LT(std::stod(rows[1][1]), 1e-10);
  EXPECT_NEAR(std::stod(rows[1][5]), 1.0, 1e-10);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(std::stod(rows[i][1]), 1e-8);
    EXPECT_NEAR(std::stod(rows[i][2]), std::stod(rows[i][3]), 1e-7);
    EXPECT_NEAR(std::stod(rows[i][4]), sinh2, 1e-8);
  }
  // The damped purification is mixed.
  EXPECT_LT(std::stod(rows[3][5]), 0.99);
}

TEST(Verify, ThermoSuitePasses) {
  const auto r = invoke({"verify", "--suite", "thermo"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS eq32_vs_nbar_oracle"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Verify, ZeroToleranceFails) {
  const auto r = invoke({"verify", "--suite", "thermo", "--tol", "theta_tau_round_trip=0"});
  EXPECT_EQ(r.code, cli::kExitCheckFailed);
  EXPECT_NE(r.out.find("FAIL theta_tau_round_trip"), std::string::npos) << r.out;
}

TEST(Verify, BadInputsAreExitTwo) {
  EXPECT_EQ(invoke({"verify", "--suite", "nope"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"verify", "--suite", "thermo", "--tol", "no_such_check=1"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"verify", "--suite", "thermo", "--tol", "theta_tau_round_trip"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"verify", "--suite", "thermo", "--tol", "theta_tau_round_trip=abc"}).code, cli::kExitConfig);
}

TEST(Output, FilesAndDeterminism) {
  TempDir dir;
  const auto csv1 = dir.file("a.csv");
  const auto csv2 = dir.file("b.csv");
  const auto svg = dir.file("a.svg");
  ASSERT_EQ(invoke({"cool", "--tau0", "1.5", "--out", csv1.string(), "--svg", svg.string()}).code, 0);
  ASSERT_EQ(invoke({"cool", "--tau0", "1.5", "--out", csv2.string()}).code, 0);
  EXPECT_FALSE(slurp(csv1).empty());
  EXPECT_EQ(slurp(csv1), slurp(csv2));
  const auto picture = slurp(svg);
  EXPECT_EQ(picture.rfind("<svg", 0), 0u);
  EXPECT_NE(picture.find("</svg>"), std::string::npos);
  EXPECT_NE(picture.find("<polyline"), std::string::npos);
}

#ifdef TFDCOOL_CLI_PATH
TEST(Binary, ExitCodesAndDeterministicOutput) {
  TempDir dir;
  const std::string bin = TFDCOOL_CLI_PATH;
  const auto a = dir.file("a.csv");
  const auto b = dir.file("b.csv");
  auto sh = [](const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(sh("\"" + bin + "\" cool --out \"" + a.string() + "\""), 0);
  EXPECT_EQ(sh("\"" + bin + "\" cool --out \"" + b.string() + "\""), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), invoke({"cool"}).out);
  EXPECT_EQ(sh("\"" + bin + "\" cool --tau0 -1 2>/dev/null"), 2);
  EXPECT_EQ(sh("\"" + bin + "\" verify --suite thermo --tol theta_tau_round_trip=0 >/dev/null 2>&1"), 1);
  EXPECT_EQ(sh("\"" + bin + "\" --help >/dev/null"), 0);
}
#endif

}  // namespace
