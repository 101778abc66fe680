#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "hsdp/cli.h"
#include "hsdp/divergences.h"

using namespace hsdp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code = 0;
  std::string out;
  std::string err;
};

CliRun Run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun result;
  result.exit_code = RunCli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("hsdp_cli_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }

  fs::path File(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string GaussianFigureConfigText() {
  return "eta = 0.5\n"
         "n = 40\n"
         "noise.family = gaussian\n"
         "noise.scale = 2\n"
         "domain.kind = interval\n"
         "domain.params = 0 1\n"
         "reg.L = 1\n"
         "reg.beta = 0.5\n"
         "reg.rho = 0\n";
}

std::string SmallPropagationConfigText() {
  return "eta = 0.2\n"
         "n = 4\n"
         "noise.family = gaussian\n"
         "noise.scale = 1\n"
         "domain.kind = interval\n"
         "domain.params = 0 1\n"
         "reg.L = 1\n"
         "reg.beta = 1\n"
         "reg.rho = 1\n";
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Column `index` of a csv line.
std::string Field(const std::string& line, int index) {
  std::stringstream ss(line);
  std::string token;
  for (int i = 0; i <= index; ++i) std::getline(ss, token, ',');
  return token;
}

}  // namespace

TEST_CASE("formatting is fixed at 17 significant digits") {
  CHECK(FormatSig17(0.0) == "0");
  CHECK(FormatSig17(1.0) == "1");
  CHECK(FormatSig17(0.1) == "0.10000000000000001");
  // Round trip through parsing restores the exact double.
  const double value = 0.3829249225480262;
  CHECK(std::stod(FormatSig17(value)) == value);
}

TEST_CASE("grid spec parsing") {
  const std::vector<double> grid = ParseGridSpec("0:5:11");
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 5.0);
  CHECK(grid[1] == 0.5);
  CHECK(ParseGridSpec("2:9:1") == std::vector<double>{2.0});
  CHECK_THROWS_AS(ParseGridSpec("0:5"), std::invalid_argument);
  CHECK_THROWS_AS(ParseGridSpec("5:0:10"), std::invalid_argument);
  CHECK_THROWS_AS(ParseGridSpec("a:b:c"), std::invalid_argument);
}

TEST_CASE("eval prints values with 17 significant digits") {
  const CliRun theta = Run({"eval", "theta", "--gamma", "1", "--r", "1"});
  CHECK(theta.exit_code == kExitOk);
  CHECK(theta.out ==
        FormatSig17(1.0 - 2.0 * QFunction(0.5)) + "\n");

  const CliRun zero = Run(
      {"eval", "egamma-laplace", "--m1", "0", "--m2", "0", "--v", "1",
       "--gamma", "2"});
  CHECK(zero.exit_code == kExitOk);
  CHECK(zero.out == "0\n");

  // Oracle cross-check of the printed gaussian divergence.
  const CliRun gauss = Run({"eval", "egamma-gaussian", "--shift", "2",
                            "--sigma", "1", "--gamma", "2.718281828459045"});
  CHECK(gauss.exit_code == kExitOk);
  const double printed = std::stod(gauss.out);
  const double quadrature =
      EgammaQuadrature(MakeGaussianDensity(0.0, 1.0),
                       MakeGaussianDensity(2.0, 1.0),
                       Gamma(2.718281828459045))
          .value;
  CHECK(std::abs(printed - quadrature) <= 1e-6);
}

TEST_CASE("eval rejects invalid flag combinations") {
  CHECK(Run({"eval", "theta", "--gamma", "2", "--epsilon", "1", "--r", "1"})
            .exit_code == kExitUsage);
  CHECK(Run({"eval", "theta", "--r", "-1", "--gamma", "2"}).exit_code ==
        kExitUsage);
  CHECK(Run({"eval", "theta"}).exit_code == kExitUsage);
  CHECK(Run({"eval"}).exit_code == kExitUsage);
  CHECK(Run({"bogus"}).exit_code == kExitUsage);
  CHECK(Run({}).exit_code == kExitUsage);
  CHECK(Run({"--help"}).exit_code == kExitOk);
}

TEST_CASE("curve writes csv, manifest and svg deterministically") {
  TempDir dir;
  const fs::path config = dir.File("fig.cfg");
  WriteFile(config, GaussianFigureConfigText());
  const fs::path csv = dir.File("curve.csv");
  const fs::path svg = dir.File("curve.svg");

  const CliRun run = Run({"curve", config.string(), "--i", "39", "--eps-grid",
                          "0:5:21", "--out", csv.string(), "--svg",
                          svg.string()});
  CHECK(run.exit_code == kExitOk);

  const std::vector<std::string> lines = ReadLines(csv);
  REQUIRE(lines.size() == 22);
  CHECK(lines[0] == "epsilon,delta_thm,delta_baseline,method,i,n");
  CHECK(Field(lines[1], 0) == "0");
  CHECK(Field(lines[1], 2) == "1");  // baseline is 1 at eps = 0
  CHECK(Field(lines[1], 3) == "thm4");
  CHECK(Field(lines[1], 4) == "39");
  CHECK(Field(lines[1], 5) == "40");

  const std::string svg_text = ReadAll(svg);
  CHECK(svg_text.rfind("<svg", 0) == 0);
  CHECK(svg_text.find("polyline") != std::string::npos);

  const nlohmann::json manifest =
      nlohmann::json::parse(ReadAll(csv.string() + ".manifest.json"));
  CHECK(manifest["command"] == "curve");
  CHECK(manifest["config"]["eta"] == 0.5);
  CHECK(manifest["options"]["i"] == 39);
  CHECK(manifest["outputs"].size() == 2);

  // Bytes reproduce on a re-run.
  const std::string first = ReadAll(csv);
  const CliRun rerun = Run({"curve", config.string(), "--i", "39",
                            "--eps-grid", "0:5:21", "--out", csv.string()});
  CHECK(rerun.exit_code == kExitOk);
  CHECK(ReadAll(csv) == first);
}

TEST_CASE("curve validates config and records every violation") {
  TempDir dir;
  const fs::path config = dir.File("bad.cfg");
  WriteFile(config,
            "eta = 9\n"
            "n = 40\n"
            "noise.family = laplace\n"
            "noise.scale = 2\n"
            "domain.kind = ball\n"
            "domain.params = 1 1\n"
            "reg.L = 1\n"
            "reg.beta = 0.5\n"
            "reg.rho = 0\n");
  const CliRun run = Run({"curve", config.string(), "--i", "5", "--out",
                          dir.File("x.csv").string()});
  CHECK(run.exit_code == kExitUsage);
  CHECK(run.err.find("eta must satisfy") != std::string::npos);
  CHECK(run.err.find("laplace noise requires an interval domain") !=
        std::string::npos);
}

TEST_CASE("curve with thm5 ignores the record index") {
  TempDir dir;
  const fs::path config = dir.File("fig.cfg");
  WriteFile(config, GaussianFigureConfigText());
  const fs::path csv1 = dir.File("a.csv");
  const fs::path csv39 = dir.File("b.csv");

  const CliRun run1 = Run({"curve", config.string(), "--i", "1", "--method",
                           "thm5", "--eps-grid", "0:2:5", "--out",
                           csv1.string()});
  const CliRun run39 = Run({"curve", config.string(), "--i", "39", "--method",
                            "thm5", "--eps-grid", "0:2:5", "--out",
                            csv39.string()});
  CHECK(run1.exit_code == kExitOk);
  CHECK(run1.err.find("ignored") != std::string::npos);

  const std::vector<std::string> lines1 = ReadLines(csv1);
  const std::vector<std::string> lines39 = ReadLines(csv39);
  REQUIRE(lines1.size() == lines39.size());
  for (std::size_t row = 1; row < lines1.size(); ++row) {
    CHECK(Field(lines1[row], 1) == Field(lines39[row], 1));
    CHECK(Field(lines1[row], 2).empty());  // no baseline column for thm5
  }
}

TEST_CASE("verify runs suites and reports failures via exit codes") {
  const CliRun run = Run({"verify", "--suite", "divergences"});
  CHECK(run.exit_code == kExitOk);
  CHECK(run.out.find("PASS") != std::string::npos);
  CHECK(run.out.find("FAIL") == std::string::npos);

  CHECK(Run({"verify", "--suite", "bogus"}).exit_code == kExitUsage);
  CHECK(Run({"verify"}).exit_code == kExitUsage);
}

TEST_CASE("verify accepts an external kernel csv") {
  TempDir dir;
  const fs::path kernel = dir.File("kernel.csv");
  WriteFile(kernel, "0.5,0.5,0\n0,0.5,0.5\n0.5,0,0.5\n");
  const CliRun run = Run({"verify", "--suite", "contraction", "--seed", "5",
                          "--kernel", kernel.string()});
  CHECK(run.exit_code == kExitOk);
  CHECK(run.out.find("FAIL") == std::string::npos);
}

TEST_CASE("propagate compares empirical and theoretical deltas") {
  TempDir dir;
  const fs::path config = dir.File("prop.cfg");
  WriteFile(config, SmallPropagationConfigText());
  const fs::path data = dir.File("d.csv");
  const fs::path prime = dir.File("dprime.csv");
  WriteFile(data, "0.2\n0.6\n0.4\n0.8\n");
  WriteFile(prime, "0.2\n0.6\n0.9\n0.8\n");
  const fs::path csv = dir.File("prop.csv");

  const CliRun run = Run({"propagate", config.string(), "--data",
                          data.string(), "--data-prime", prime.string(),
                          "--eps-grid", "0:2:9", "--grid-size", "32", "--out",
                          csv.string()});
  CHECK(run.exit_code == kExitOk);
  CHECK(run.err.find("VIOLATION") == std::string::npos);

  const std::vector<std::string> lines = ReadLines(csv);
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] == "epsilon,empirical_delta,theoretical_delta,slack");
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const double empirical = std::stod(Field(lines[row], 1));
    const double theoretical = std::stod(Field(lines[row], 2));
    CHECK(empirical <= theoretical + 5.0 / 32.0);
  }
  CHECK(fs::exists(csv.string() + ".manifest.json"));

  // Byte-identical on a re-run.
  const std::string first = ReadAll(csv);
  Run({"propagate", config.string(), "--data", data.string(), "--data-prime",
       prime.string(), "--eps-grid", "0:2:9", "--grid-size", "32", "--out",
       csv.string()});
  CHECK(ReadAll(csv) == first);
}

TEST_CASE("propagate can dump the propagated laws") {
  TempDir dir;
  const fs::path config = dir.File("prop.cfg");
  WriteFile(config, SmallPropagationConfigText());
  const fs::path data = dir.File("d.csv");
  const fs::path prime = dir.File("dprime.csv");
  WriteFile(data, "0.2\n0.6\n0.4\n0.8\n");
  WriteFile(prime, "0.2\n0.6\n0.9\n0.8\n");
  const fs::path csv = dir.File("prop.csv");
  const fs::path prefix = dir.File("laws");

  const CliRun run = Run({"propagate", config.string(), "--data",
                          data.string(), "--data-prime", prime.string(),
                          "--eps-grid", "0:1:3", "--grid-size", "32", "--out",
                          csv.string(), "--densities-out", prefix.string()});
  CHECK(run.exit_code == kExitOk);
  const std::vector<std::string> mu = ReadLines(prefix.string() + ".mu.csv");
  const std::vector<std::string> nu = ReadLines(prefix.string() + ".nu.csv");
  REQUIRE(mu.size() == 33);
  CHECK(mu[0] == "cell_center,mass");
  double mass = 0.0;
  for (std::size_t row = 1; row < mu.size(); ++row) {
    mass += std::stod(Field(mu[row], 1));
  }
  CHECK(std::abs(mass - 1.0) <= 1e-9);
  CHECK(mu != nu);  // the differing record leaves a visible footprint
}

TEST_CASE("propagate with identical datasets reports zero divergence") {
  TempDir dir;
  const fs::path config = dir.File("prop.cfg");
  WriteFile(config, SmallPropagationConfigText());
  const fs::path data = dir.File("d.csv");
  WriteFile(data, "0.2\n0.6\n0.4\n0.8\n");
  const fs::path csv = dir.File("prop.csv");

  const CliRun run = Run({"propagate", config.string(), "--data",
                          data.string(), "--data-prime", data.string(),
                          "--eps-grid", "0:2:5", "--grid-size", "32", "--out",
                          csv.string()});
  CHECK(run.exit_code == kExitOk);
  const std::vector<std::string> lines = ReadLines(csv);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    CHECK(Field(lines[row], 1) == "0");
  }
}

TEST_CASE("propagate rejects mismatched datasets") {
  TempDir dir;
  const fs::path config = dir.File("prop.cfg");
  WriteFile(config, SmallPropagationConfigText());
  const fs::path data = dir.File("d.csv");
  const fs::path shorter = dir.File("short.csv");
  WriteFile(data, "0.2\n0.6\n0.4\n0.8\n");
  WriteFile(shorter, "0.2\n0.6\n");
  CHECK(Run({"propagate", config.string(), "--data", data.string(),
             "--data-prime", shorter.string(), "--out",
             dir.File("x.csv").string()})
            .exit_code == kExitUsage);
}
