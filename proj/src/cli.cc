#include "hsdp/cli.h"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "hsdp/config.h"
#include "hsdp/manifest.h"
#include "hsdp/propagator.h"
#include "hsdp/svg.h"
#include "hsdp/verify.h"

namespace hsdp {
namespace {

// Deltas below this are indistinguishable from zero in double precision and
// are written out as 0.
constexpr double kDeltaOutputFloor = 1e-300;

double FloorDelta(double delta) {
  return delta < kDeltaOutputFloor ? 0.0 : delta;
}

struct EvalOptions {
  double gamma = 1.0;
  double epsilon = 0.0;
  bool has_gamma = false;
  bool has_epsilon = false;
  double r = 0.0;
  double t = 0.0;
  double shift = 0.0;
  double sigma = 1.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double v = 1.0;
  double eta = 1.0;
  double lipschitz_m = 1.0;
  double a = 0.0;
  double b = 1.0;
  double diameter = 1.0;
  double reg_l = 1.0;
  double reg_beta = 1.0;
  double reg_rho = 0.0;
  std::string kernel_path;
};

struct CurveOptions {
  std::string config_path;
  int record_index = 0;  // 0 = default to n
  std::string method;
  std::string eps_grid = "0:5:200";
  std::string out_path;
  std::string svg_path;
};

struct VerifyOptions {
  std::string suite;
  std::uint64_t seed = 1;
  std::string kernel_path;
};

struct PropagateOptions {
  std::string config_path;
  std::string data_path;
  std::string data_prime_path;
  std::string eps_grid = "0:4:50";
  int grid_size = 128;
  std::string out_path;
  std::string densities_prefix;
};

Gamma GammaFromOptions(const EvalOptions& opt) {
  if (opt.has_gamma && opt.has_epsilon) {
    throw CLI::ValidationError("pass either --gamma or --epsilon, not both");
  }
  if (opt.has_epsilon) return Gamma::FromEpsilon(opt.epsilon);
  return Gamma(opt.gamma);
}

Method ResolveMethod(const PnsgdConfig& cfg, const std::string& name,
                     std::ostream& err) {
  if (name.empty()) {
    return cfg.noise.family() == NoiseFamily::kLaplace ? Method::kThm3
                                                       : Method::kThm4;
  }
  const std::optional<Method> method = MethodFromName(name);
  if (!method) {
    throw CLI::ValidationError("unknown method '" + name +
                               "' (expected thm3, thm4, thm5 or prop1)");
  }
  if (*method == Method::kThm5) {
    err << "notice: method thm5 is record-independent; --i is ignored\n";
  }
  return *method;
}

void WriteCurveCsv(const std::string& path,
                   const std::vector<CurvePoint>& points, Method method,
                   int record_index, int n) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "epsilon,delta_thm,delta_baseline,method,i,n\n";
  for (const CurvePoint& p : points) {
    out << FormatSig17(p.epsilon) << "," << FormatSig17(FloorDelta(p.delta_thm))
        << ",";
    if (p.delta_baseline) out << FormatSig17(FloorDelta(*p.delta_baseline));
    out << "," << MethodName(method) << "," << record_index << "," << n << "\n";
  }
}

int DoCurve(const CurveOptions& opt, const std::vector<std::string>& argv,
            std::ostream& out, std::ostream& err) {
  const PnsgdConfig cfg = ParsePnsgdConfig(opt.config_path);
  const int record_index = opt.record_index == 0 ? cfg.n : opt.record_index;
  const Method method = ResolveMethod(cfg, opt.method, err);
  const std::vector<double> grid = ParseGridSpec(opt.eps_grid);
  const std::vector<CurvePoint> points =
      ComputeCurve(cfg, record_index, grid, method);
  WriteCurveCsv(opt.out_path, points, method, record_index, cfg.n);

  RunManifest manifest;
  manifest.command = "curve";
  manifest.argv = argv;
  manifest.config = ToJson(cfg);
  manifest.options = {{"i", record_index},
                      {"method", MethodName(method)},
                      {"eps_grid", opt.eps_grid},
                      {"out", opt.out_path}};
  manifest.outputs = {opt.out_path};

  if (!opt.svg_path.empty()) {
    std::vector<SvgSeries> series;
    SvgSeries thm{std::string(MethodName(method)), "#1f77b4", {}};
    SvgSeries baseline{"prop1", "#d62728", {}};
    for (const CurvePoint& p : points) {
      thm.points.emplace_back(p.epsilon, p.delta_thm);
      if (p.delta_baseline) baseline.points.emplace_back(p.epsilon, *p.delta_baseline);
    }
    series.push_back(std::move(thm));
    if (!baseline.points.empty()) series.push_back(std::move(baseline));
    WriteLogLineChart(opt.svg_path, "epsilon", "delta (log scale)", series);
    manifest.options["svg"] = opt.svg_path;
    manifest.outputs.push_back(opt.svg_path);
  }
  WriteManifest(opt.out_path + ".manifest.json", manifest);
  out << "wrote " << opt.out_path << " (" << points.size() << " rows)\n";
  return kExitOk;
}

int DoVerify(const VerifyOptions& opt, std::ostream& out) {
  std::optional<DiscreteKernel> kernel;
  if (!opt.kernel_path.empty()) {
    kernel = DiscreteKernel::FromCsv(opt.kernel_path);
  }
  std::vector<VerifyReport> reports;
  if (opt.suite == "divergences" || opt.suite == "all") {
    reports.push_back(VerifyDivergences());
  }
  if (opt.suite == "contraction" || opt.suite == "all") {
    reports.push_back(VerifyContraction(opt.seed, kernel));
  }
  if (opt.suite == "accountant" || opt.suite == "all") {
    reports.push_back(VerifyAccountant(opt.seed));
  }
  if (opt.suite == "propagator" || opt.suite == "all") {
    reports.push_back(VerifyPropagator(opt.seed));
  }

  int failures = 0;
  int total = 0;
  for (const VerifyReport& report : reports) {
    out << "suite " << report.suite << ":\n";
    for (const CheckResult& check : report.checks) {
      ++total;
      if (!check.pass) ++failures;
      out << "  " << (check.pass ? "PASS" : "FAIL") << "  " << check.name
          << "  (margin " << FormatSig17(check.margin) << "; " << check.detail
          << ")\n";
    }
  }
  out << "verify: " << total - failures << "/" << total << " checks passed\n";
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

int DoPropagate(const PropagateOptions& opt,
                const std::vector<std::string>& argv, std::ostream& out,
                std::ostream& err) {
  const PnsgdConfig cfg = ParsePnsgdConfig(opt.config_path);
  if (cfg.geom.kind() != DomainKind::kInterval || cfg.noise.dim() != 1) {
    throw std::invalid_argument(
        "propagate requires a 1-dimensional interval domain");
  }
  const Dataset data = Dataset::FromCsv(opt.data_path);
  const Dataset data_prime = Dataset::FromCsv(opt.data_prime_path);
  if (data.points.size() != static_cast<std::size_t>(cfg.n)) {
    throw std::invalid_argument("dataset size does not match config n");
  }

  // The executable instance is the quadratic loss with curvature reg.beta;
  // the declared constants from the configuration are spot-checked against
  // it before anything runs.
  const double curvature = cfg.reg.smoothness;
  LossModel loss;
  loss.gradient = [curvature](double y, double x) { return curvature * (y - x); };
  loss.declared = cfg.reg;
  loss.x_lo = cfg.geom.a();
  loss.x_hi = cfg.geom.b();
  loss.y_lo = cfg.geom.a();
  loss.y_hi = cfg.geom.b();
  loss.ValidateOnGrid();

  const std::vector<double> grid = ParseGridSpec(opt.eps_grid);
  const PropagatedPair pair =
      PropagatePair(cfg, loss, data, data_prime, opt.grid_size);
  const int record_index = pair.differing_index.value_or(cfg.n);
  const Method method = cfg.noise.family() == NoiseFamily::kLaplace
                            ? Method::kThm3
                            : Method::kThm4;
  const double allowed = 5.0 / opt.grid_size;

  std::ofstream csv(opt.out_path);
  if (!csv) throw std::runtime_error("cannot write csv: " + opt.out_path);
  csv << "epsilon,empirical_delta,theoretical_delta,slack\n";
  int violations = 0;
  for (double eps : grid) {
    const double empirical = EmpiricalDeltaFromPair(pair, eps);
    const double theoretical = EvaluateDelta(method, eps, cfg, record_index);
    const double slack = empirical - theoretical;
    csv << FormatSig17(eps) << "," << FormatSig17(empirical) << ","
        << FormatSig17(FloorDelta(theoretical)) << "," << FormatSig17(slack)
        << "\n";
    if (slack > allowed) {
      ++violations;
      err << "VIOLATION at epsilon=" << FormatSig17(eps) << ": empirical "
          << FormatSig17(empirical) << " > theoretical "
          << FormatSig17(theoretical) << " + " << FormatSig17(allowed) << "\n";
    }
  }
  csv.close();

  RunManifest manifest;
  manifest.command = "propagate";
  manifest.argv = argv;
  manifest.config = ToJson(cfg);
  manifest.options = {{"data", opt.data_path},
                      {"data_prime", opt.data_prime_path},
                      {"eps_grid", opt.eps_grid},
                      {"grid_size", opt.grid_size},
                      {"i", record_index},
                      {"method", MethodName(method)},
                      {"out", opt.out_path}};
  manifest.outputs = {opt.out_path};
  if (!opt.densities_prefix.empty()) {
    const std::string mu_path = opt.densities_prefix + ".mu.csv";
    const std::string nu_path = opt.densities_prefix + ".nu.csv";
    WriteDensityCsv(mu_path, pair.mu_n);
    WriteDensityCsv(nu_path, pair.nu_n);
    manifest.options["densities_out"] = opt.densities_prefix;
    manifest.outputs.push_back(mu_path);
    manifest.outputs.push_back(nu_path);
  }
  WriteManifest(opt.out_path + ".manifest.json", manifest);

  out << "wrote " << opt.out_path << " (" << grid.size() << " rows, "
      << violations << " violations, differing index " << record_index
      << ")\n";
  return violations == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

std::string FormatSig17(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::vector<double> ParseGridSpec(const std::string& spec) {
  std::array<std::string, 3> parts;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = spec.find(':', start);
    if ((i < 2) != (colon != std::string::npos)) {
      throw std::invalid_argument("grid spec must be 'lo:hi:count', got '" +
                                  spec + "'");
    }
    parts[i] = spec.substr(start, colon - start);
    start = colon + 1;
  }
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid spec must be 'lo:hi:count', got '" +
                                spec + "'");
  }
  if (count < 1 || (count > 1 && !(lo < hi))) {
    throw std::invalid_argument("grid spec needs lo < hi and count >= 1");
  }
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return grid;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"hockey-stick divergence accounting for projected noisy SGD"};
  app.require_subcommand(1);

  EvalOptions eval;
  CurveOptions curve;
  VerifyOptions verify;
  PropagateOptions propagate;

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "print one divergence or bound value");
  eval_cmd->require_subcommand(1);
  auto add_gamma = [&eval](CLI::App* cmd) {
    cmd->add_option("--gamma", eval.gamma, "likelihood ratio gamma >= 1")
        ->check(CLI::Range(1.0, std::numeric_limits<double>::max()))
        ->each([&eval](const std::string&) { eval.has_gamma = true; });
    cmd->add_option("--epsilon", eval.epsilon, "privacy parameter, gamma = e^eps")
        ->check(CLI::NonNegativeNumber)
        ->each([&eval](const std::string&) { eval.has_epsilon = true; });
  };

  CLI::App* eval_q = eval_cmd->add_subcommand("q", "gaussian upper tail Q(t)");
  eval_q->add_option("--t", eval.t, "argument")->required();

  CLI::App* eval_theta =
      eval_cmd->add_subcommand("theta", "gaussian privacy profile theta(r)");
  add_gamma(eval_theta);
  eval_theta->add_option("--r", eval.r, "normalized mean distance")->required();

  CLI::App* eval_gauss = eval_cmd->add_subcommand(
      "egamma-gaussian", "divergence of equal-variance gaussians");
  add_gamma(eval_gauss);
  eval_gauss->add_option("--shift", eval.shift, "norm of the mean difference")
      ->required();
  eval_gauss->add_option("--sigma", eval.sigma, "standard deviation")
      ->required();

  CLI::App* eval_lap = eval_cmd->add_subcommand(
      "egamma-laplace", "divergence of equal-scale laplace distributions");
  add_gamma(eval_lap);
  eval_lap->add_option("--m1", eval.m1, "first mean")->required();
  eval_lap->add_option("--m2", eval.m2, "second mean")->required();
  eval_lap->add_option("--v", eval.v, "scale")->required();

  CLI::App* eval_m = eval_cmd->add_subcommand(
      "lipschitz-m", "contraction factor of the gradient-step map");
  eval_m->add_option("--eta", eval.eta, "learning rate")->required();
  eval_m->add_option("--L", eval.reg_l, "loss Lipschitz constant")->required();
  eval_m->add_option("--beta", eval.reg_beta, "gradient Lipschitz constant")
      ->required();
  eval_m->add_option("--rho", eval.reg_rho, "strong convexity")->required();

  CLI::App* eval_cg = eval_cmd->add_subcommand(
      "contraction-gaussian", "projected gaussian step contraction bound");
  add_gamma(eval_cg);
  eval_cg->add_option("--M", eval.lipschitz_m, "gradient-step Lipschitz factor")
      ->required();
  eval_cg->add_option("--diameter", eval.diameter, "domain diameter")
      ->required();
  eval_cg->add_option("--eta", eval.eta, "learning rate")->required();
  eval_cg->add_option("--sigma", eval.sigma, "noise sigma")->required();

  CLI::App* eval_cl = eval_cmd->add_subcommand(
      "contraction-laplace", "projected laplace step contraction bound");
  eval_cl->add_option("--epsilon", eval.epsilon, "privacy parameter")
      ->required();
  eval_cl->add_option("--M", eval.lipschitz_m, "gradient-step Lipschitz factor")
      ->required();
  eval_cl->add_option("--a", eval.a, "interval lower end")->required();
  eval_cl->add_option("--b", eval.b, "interval upper end")->required();
  eval_cl->add_option("--eta", eval.eta, "learning rate")->required();
  eval_cl->add_option("--v", eval.v, "noise scale")->required();

  CLI::App* eval_cd = eval_cmd->add_subcommand(
      "contraction-discrete", "exact contraction of a csv kernel");
  add_gamma(eval_cd);
  eval_cd->add_option("--kernel", eval.kernel_path, "kernel csv path")
      ->required();

  CLI::App* curve_cmd = app.add_subcommand(
      "curve", "write an epsilon-delta curve as csv (and optionally svg)");
  curve_cmd->add_option("config", curve.config_path, "configuration file")
      ->required();
  curve_cmd->add_option("--i", curve.record_index,
                        "record index (default: n)");
  curve_cmd->add_option("--method", curve.method,
                        "thm3 | thm4 | thm5 | prop1 (default by noise family)");
  curve_cmd->add_option("--eps-grid", curve.eps_grid, "grid as lo:hi:count")
      ->capture_default_str();
  curve_cmd->add_option("--out", curve.out_path, "output csv path")->required();
  curve_cmd->add_option("--svg", curve.svg_path, "also render a log-scale chart");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the built-in oracle property suites");
  verify_cmd
      ->add_option("--suite", verify.suite,
                   "divergences | contraction | accountant | propagator | all")
      ->required()
      ->check(CLI::IsMember(
          {"divergences", "contraction", "accountant", "propagator", "all"}));
  verify_cmd->add_option("--seed", verify.seed, "random seed")
      ->capture_default_str();
  verify_cmd->add_option("--kernel", verify.kernel_path,
                         "extra kernel csv for the contraction suite");

  CLI::App* propagate_cmd = app.add_subcommand(
      "propagate", "propagate two neighboring datasets and compare deltas");
  propagate_cmd
      ->add_option("config", propagate.config_path, "configuration file")
      ->required();
  propagate_cmd->add_option("--data", propagate.data_path, "dataset csv")
      ->required();
  propagate_cmd
      ->add_option("--data-prime", propagate.data_prime_path,
                   "neighboring dataset csv")
      ->required();
  propagate_cmd->add_option("--eps-grid", propagate.eps_grid,
                            "grid as lo:hi:count")
      ->capture_default_str();
  propagate_cmd
      ->add_option("--grid-size", propagate.grid_size, "number of cells")
      ->capture_default_str()
      ->check(CLI::Range(16, 1 << 20));
  propagate_cmd->add_option("--out", propagate.out_path, "output csv path")
      ->required();
  propagate_cmd->add_option(
      "--densities-out", propagate.densities_prefix,
      "also write the propagated laws to <prefix>.mu.csv / <prefix>.nu.csv");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hsdp");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(eval_cmd)) {
      double value = 0.0;
      if (eval_cmd->got_subcommand(eval_q)) {
        value = QFunction(eval.t);
      } else if (eval_cmd->got_subcommand(eval_theta)) {
        value = ThetaGamma(GammaFromOptions(eval), eval.r);
      } else if (eval_cmd->got_subcommand(eval_gauss)) {
        value = EgammaGaussian(0.0, eval.shift, eval.sigma,
                               GammaFromOptions(eval));
      } else if (eval_cmd->got_subcommand(eval_lap)) {
        value = EgammaLaplace(eval.m1, eval.m2, eval.v, GammaFromOptions(eval));
      } else if (eval_cmd->got_subcommand(eval_m)) {
        value = LipschitzM(eval.eta,
                           LossRegularity{eval.reg_l, eval.reg_beta, eval.reg_rho});
      } else if (eval_cmd->got_subcommand(eval_cg)) {
        value = ContractionGaussianProjected(
            GammaFromOptions(eval), eval.lipschitz_m,
            DomainGeometry::Ball(eval.diameter, 1), eval.eta, eval.sigma);
      } else if (eval_cmd->got_subcommand(eval_cl)) {
        value = ContractionLaplaceProjected(eval.epsilon, eval.lipschitz_m,
                                            eval.a, eval.b, eval.eta, eval.v);
      } else if (eval_cmd->got_subcommand(eval_cd)) {
        value = ContractionDiscrete(DiscreteKernel::FromCsv(eval.kernel_path),
                                    GammaFromOptions(eval));
      }
      out << FormatSig17(value) << "\n";
      return kExitOk;
    }
    if (app.got_subcommand(curve_cmd)) return DoCurve(curve, args, out, err);
    if (app.got_subcommand(verify_cmd)) return DoVerify(verify, out);
    if (app.got_subcommand(propagate_cmd)) {
      return DoPropagate(propagate, args, out, err);
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hsdp
