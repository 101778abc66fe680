#include "hsdp/verify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "hsdp/accountant.h"
#include "hsdp/propagator.h"

namespace hsdp {
namespace {

constexpr double kE = 2.718281828459045;

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// A check passes when the measured margin (distance to the failure boundary)
// is nonnegative.
CheckResult MarginCheck(std::string name, double margin, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.pass = margin >= 0.0;
  r.margin = margin + 0.0;  // normalizes -0
  r.detail = std::move(detail);
  return r;
}

std::vector<double> LinSpace(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

// Total variation coded independently of the hockey-stick sum.
double RowTvMax(const DiscreteKernel& kernel) {
  double best = 0.0;
  for (std::size_t i = 0; i < kernel.num_states(); ++i) {
    for (std::size_t j = i + 1; j < kernel.num_states(); ++j) {
      double abs_sum = 0.0;
      for (std::size_t s = 0; s < kernel.num_states(); ++s) {
        abs_sum += std::abs(kernel.row(i)[s] - kernel.row(j)[s]);
      }
      best = std::max(best, 0.5 * abs_sum);
    }
  }
  return best;
}

DiscreteKernel RandomKernel(std::size_t states, std::mt19937_64& rng) {
  std::vector<std::vector<double>> rows(states);
  for (auto& row : rows) row = SampleSimplex(states, rng);
  return DiscreteKernel(std::move(rows));
}

PnsgdConfig GaussianFigureConfig() {
  return PnsgdConfig{0.5,
                     NoiseSpec::Gaussian(2.0),
                     DomainGeometry::Interval(0.0, 1.0),
                     40,
                     LossRegularity{1.0, 0.5, 0.0}};
}

PnsgdConfig DefaultPropagationConfig() {
  return PnsgdConfig{0.2,
                     NoiseSpec::Gaussian(1.0),
                     DomainGeometry::Interval(0.0, 1.0),
                     10,
                     LossRegularity{1.0, 1.0, 1.0}};
}

Dataset DefaultDataset(int n) {
  Dataset data;
  for (int t = 1; t <= n; ++t) {
    data.points.push_back(static_cast<double>(t * 37 % 101) / 101.0);
  }
  return data;
}

}  // namespace

bool VerifyReport::AllPass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

VerifyReport VerifyDivergences() {
  VerifyReport report;
  report.suite = "divergences";
  const std::vector<double> gammas = {1.0, 1.5, kE, 5.0, 10.0};
  const std::vector<double> shifts = {0.0, 0.1, 1.0, 3.0};
  const std::vector<double> scales = {0.5, 1.0, 2.0};

  double worst_gauss = 0.0;
  double worst_laplace = 0.0;
  double range_excess = 0.0;
  for (double g : gammas) {
    const Gamma gamma(g);
    for (double shift : shifts) {
      for (double scale : scales) {
        const double closed_g = EgammaGaussian(0.0, shift, scale, gamma);
        const double quad_g =
            EgammaQuadrature(MakeGaussianDensity(0.0, scale),
                             MakeGaussianDensity(shift, scale), gamma)
                .value;
        worst_gauss = std::max(worst_gauss, std::abs(closed_g - quad_g));
        const double closed_l = EgammaLaplace(0.0, shift, scale, gamma);
        const double quad_l =
            EgammaQuadrature(MakeLaplaceDensity(0.0, scale),
                             MakeLaplaceDensity(shift, scale), gamma)
                .value;
        worst_laplace = std::max(worst_laplace, std::abs(closed_l - quad_l));
        for (double value : {closed_g, closed_l, quad_g, quad_l}) {
          range_excess = std::max(
              range_excess, std::max(-value, value - 1.0));
        }
      }
    }
  }
  report.checks.push_back(MarginCheck(
      "gaussian closed form vs quadrature", 1e-6 - worst_gauss,
      "max |diff| = " + Fmt(worst_gauss) + " over 60 cases, tol 1e-6"));
  report.checks.push_back(MarginCheck(
      "laplace closed form vs quadrature", 1e-6 - worst_laplace,
      "max |diff| = " + Fmt(worst_laplace) + " over 60 cases, tol 1e-6"));
  report.checks.push_back(MarginCheck("divergences stay in [0, 1]",
                                      -range_excess,
                                      "max range excess = " + Fmt(range_excess)));

  double q_sym = 0.0;
  for (double t : {0.5, 1.0, 3.0}) {
    q_sym = std::max(q_sym, std::abs(QFunction(-t) + QFunction(t) - 1.0));
  }
  report.checks.push_back(MarginCheck("q-function symmetry", 1e-12 - q_sym,
                                      "max |Q(-t)+Q(t)-1| = " + Fmt(q_sym)));

  double gamma_mono = 0.0;  // largest increase along growing gamma
  for (double shift : {0.5, 1.0, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double g : LinSpace(1.0, 10.0, 40)) {
      const double value = EgammaGaussian(0.0, shift, 1.0, Gamma(g));
      gamma_mono = std::max(gamma_mono, value - prev);
      prev = value;
    }
  }
  report.checks.push_back(
      MarginCheck("gamma -> E_gamma nonincreasing", -gamma_mono,
                  "max increase = " + Fmt(gamma_mono)));

  double r_mono = 0.0;  // largest decrease along growing r
  for (double g : {1.0, 1.5, kE, 5.0}) {
    const Gamma gamma(g);
    double prev = -std::numeric_limits<double>::infinity();
    for (double r : LinSpace(0.0, 10.0, 41)) {
      const double value = ThetaGamma(gamma, r);
      r_mono = std::max(r_mono, prev - value);
      prev = value;
    }
  }
  report.checks.push_back(MarginCheck("r -> theta nondecreasing", -r_mono,
                                      "max decrease = " + Fmt(r_mono)));

  double identity_diff = 0.0;
  for (double shift : {0.0, 0.3, 1.7}) {
    for (double g : {1.0, 2.0, 7.0}) {
      const double lhs = EgammaGaussian(0.0, shift, 0.8, Gamma(g));
      const double rhs = ThetaGamma(Gamma(g), shift / 0.8);
      identity_diff = std::max(identity_diff, std::abs(lhs - rhs));
    }
  }
  report.checks.push_back(
      MarginCheck("gaussian divergence equals theta", -identity_diff,
                  "max |diff| = " + Fmt(identity_diff) + " (exact identity)"));

  const DiscreteDistribution p({0.7, 0.3});
  const DiscreteDistribution q({0.3, 0.7});
  const double tv = EgammaDiscrete(p, q, Gamma(1.0));
  report.checks.push_back(MarginCheck("discrete E_1 equals TV",
                                      1e-12 - std::abs(tv - 0.4),
                                      "E_1 = " + Fmt(tv) + ", expected 0.4"));
  return report;
}

VerifyReport VerifyContraction(std::uint64_t seed,
                               const std::optional<DiscreteKernel>& kernel) {
  VerifyReport report;
  report.suite = "contraction";
  std::mt19937_64 rng(seed);
  const std::size_t sizes[] = {3, 4, 6};
  const std::vector<double> gammas = {1.0, 2.0, kE};

  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_witness = -std::numeric_limits<double>::infinity();
  double worst_dobrushin = 0.0;
  std::vector<DiscreteKernel> kernels;
  for (int k = 0; k < 20; ++k) {
    kernels.push_back(RandomKernel(sizes[k % 3], rng));
  }
  if (kernel) kernels.push_back(*kernel);
  for (const DiscreteKernel& k : kernels) {
    for (double g : gammas) {
      const Gamma gamma(g);
      const double exact = ContractionDiscrete(k, gamma);
      const double brute = ContractionBruteforceRatio(k, gamma, 2000, rng());
      worst_excess = std::max(worst_excess, brute - exact);
      worst_witness = std::max(worst_witness, exact - brute);
    }
    worst_dobrushin = std::max(
        worst_dobrushin,
        std::abs(ContractionDiscrete(k, Gamma(1.0)) - RowTvMax(k)));
  }
  report.checks.push_back(MarginCheck(
      "brute force below discrete supremum", 1e-9 - worst_excess,
      "max (brute - exact) = " + Fmt(worst_excess) + ", tol 1e-9"));
  report.checks.push_back(MarginCheck(
      "point-mass witness attains supremum", 1e-12 - worst_witness,
      "max (exact - brute) = " + Fmt(worst_witness) + ", tol 1e-12"));
  report.checks.push_back(MarginCheck(
      "dobrushin coefficient at gamma = 1", 1e-12 - worst_dobrushin,
      "max |E_1 sup - max row TV| = " + Fmt(worst_dobrushin)));

  double gauss_mono = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  const DomainGeometry unit = DomainGeometry::Interval(0.0, 1.0);
  for (double g : LinSpace(1.0, 12.0, 30)) {
    const double value =
        ContractionGaussianProjected(Gamma(g), 0.9, unit, 0.5, 1.0);
    gauss_mono = std::max(gauss_mono, value - prev);
    prev = value;
  }
  double laplace_mono = 0.0;
  prev = std::numeric_limits<double>::infinity();
  for (double eps : LinSpace(0.0, 4.0, 30)) {
    const double value =
        ContractionLaplaceProjected(eps, 0.9, 0.0, 1.0, 0.5, 1.0);
    laplace_mono = std::max(laplace_mono, value - prev);
    prev = value;
  }
  report.checks.push_back(
      MarginCheck("projected bounds nonincreasing in gamma",
                  -std::max(gauss_mono, laplace_mono),
                  "max increase = " + Fmt(std::max(gauss_mono, laplace_mono))));

  double diameter_mono = 0.0;
  prev = -std::numeric_limits<double>::infinity();
  for (double d : LinSpace(0.1, 8.0, 30)) {
    const double value = ContractionGaussianProjected(
        Gamma(kE), 1.0, DomainGeometry::Interval(0.0, d), 0.5, 1.0);
    diameter_mono = std::max(diameter_mono, prev - value);
    prev = value;
  }
  report.checks.push_back(MarginCheck("gaussian bound nondecreasing in D",
                                      -diameter_mono,
                                      "max decrease = " + Fmt(diameter_mono)));

  // Without a projection the diameter is unbounded and the coefficient tends
  // to the trivial value 1 along a growing-diameter grid.
  double wide = 0.0;
  double wide_mono = 0.0;
  for (double d : {1e1, 1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double value = ContractionGaussianProjected(
        Gamma(kE), 1.0, DomainGeometry::Interval(0.0, d), 0.5, 1.0);
    wide_mono = std::max(wide_mono, wide - value);
    wide = value;
  }
  report.checks.push_back(MarginCheck(
      "unbounded domain loses contraction",
      wide_mono > 0.0 ? -wide_mono : 1e-12 - (1.0 - wide),
      "theta rises to " + Fmt(wide) + " at D = 1e6"));
  return report;
}

VerifyReport VerifyAccountant(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "accountant";
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * ((static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53);
  };

  // Pure-DP threshold of the Laplace bound on random configurations.
  double threshold_margin = std::numeric_limits<double>::infinity();
  bool threshold_exact = true;
  for (int trial = 0; trial < 10; ++trial) {
    const double beta = uniform(0.3, 1.0);
    const double rho = uniform(0.0, beta);
    const PnsgdConfig cfg{uniform(0.2, 0.9) * 2.0 / (beta + rho),
                          NoiseSpec::Laplace(uniform(0.5, 2.0)),
                          DomainGeometry::Interval(0.0, uniform(0.5, 3.0)),
                          3 + static_cast<int>(rng() % 10),
                          LossRegularity{uniform(0.5, 2.0), beta, rho}};
    const int index = 1 + static_cast<int>(rng() % (cfg.n - 1));
    const double m = LipschitzM(cfg.eta, cfg.reg);
    const double v = cfg.noise.scale();
    const double threshold =
        std::min(2.0 * cfg.reg.lipschitz / v,
                 m * (cfg.geom.b() - cfg.geom.a()) / (cfg.eta * v));
    threshold_exact =
        threshold_exact &&
        DeltaLaplacePnsgd(threshold, cfg, index) == 0.0 &&
        DeltaLaplacePnsgd(1.5 * threshold, cfg, index) == 0.0;
    threshold_margin = std::min(
        threshold_margin, DeltaLaplacePnsgd(0.99 * threshold, cfg, index));
  }
  const bool threshold_ok = threshold_exact && threshold_margin > 0.0;
  report.checks.push_back(MarginCheck(
      "laplace delta hits exact zero at threshold",
      threshold_ok ? threshold_margin : -1.0,
      "delta(0.99 * threshold) >= " + Fmt(threshold_margin) + " and zero above"));

  // The per-record deltas are the composed products, bit for bit.
  const PnsgdConfig fig = GaussianFigureConfig();
  double compose_diff = 0.0;
  for (double eps : {0.0, 0.5, 1.0, 2.5}) {
    for (int i : {1, 20, 39, 40}) {
      const double m = LipschitzM(fig.eta, fig.reg);
      const std::vector<double> coeffs(
          fig.n - i, ContractionGaussianProjected(Gamma::FromEpsilon(eps), m,
                                                  fig.geom, fig.eta,
                                                  fig.noise.scale()));
      const double composed = ComposeSdpi(
          InitialDivergenceGaussian(eps, fig.reg.lipschitz, fig.noise.scale()),
          coeffs);
      if (composed != DeltaGaussianPnsgd(eps, fig, i)) compose_diff = 1.0;
    }
  }
  const PnsgdConfig lap{1.0, NoiseSpec::Laplace(1.0),
                        DomainGeometry::Interval(0.0, 1.0), 3,
                        LossRegularity{1.0, 1.0, 0.0}};
  for (double eps : {0.0, 0.3, 1.0}) {
    for (int i : {1, 2, 3}) {
      const double m = LipschitzM(lap.eta, lap.reg);
      const std::vector<double> coeffs(
          lap.n - i,
          ContractionLaplaceProjected(eps, m, lap.geom.a(), lap.geom.b(),
                                      lap.eta, lap.noise.scale()));
      const double composed = ComposeSdpi(
          InitialDivergenceLaplace(eps, lap.reg.lipschitz, lap.noise.scale()),
          coeffs);
      if (composed != DeltaLaplacePnsgd(eps, lap, i)) compose_diff = 1.0;
    }
  }
  report.checks.push_back(MarginCheck("delta equals composed product",
                                      -compose_diff,
                                      compose_diff == 0.0 ? "bit-identical"
                                                          : "mismatch"));

  // Closed-form baseline vs grid minimization.
  double worst_rel = 0.0;
  for (double kappa : {0.05, 0.1, 0.25, 0.5, 1.0}) {
    for (double factor : {1.5, 3.0, 6.0, 12.0}) {
      const double eps = kappa * factor;
      const double gap = eps - kappa;
      const double closed = std::exp(-gap * gap / (4.0 * kappa));
      const double grid = RdpDeltaGridInfimum(eps, kappa);
      worst_rel = std::max(worst_rel, std::abs(closed - grid) / closed);
    }
  }
  report.checks.push_back(MarginCheck(
      "baseline closed form vs grid infimum", 1e-6 - worst_rel,
      "max relative diff = " + Fmt(worst_rel) + ", tol 1e-6"));

  // Random stopping dominates the averaged per-record bounds.
  double stop_margin = std::numeric_limits<double>::infinity();
  for (double eps : {0.5, 1.0, 2.0}) {
    const double stopped = DeltaRandomStop(eps, fig).delta;
    const double m = LipschitzM(fig.eta, fig.reg);
    const double head =
        InitialDivergenceGaussian(eps, fig.reg.lipschitz, fig.noise.scale());
    const double factor = ContractionGaussianProjected(
        Gamma::FromEpsilon(eps), m, fig.geom, fig.eta, fig.noise.scale());
    for (int i = 1; i <= fig.n; ++i) {
      double sum = 0.0;
      double power = 1.0;
      for (int r = i; r <= fig.n; ++r) {
        sum += head * power;
        power *= factor;
      }
      stop_margin = std::min(stop_margin, stopped - sum / fig.n + 1e-12);
    }
  }
  report.checks.push_back(MarginCheck(
      "random stopping dominates averaged bounds", stop_margin,
      "min margin = " + Fmt(stop_margin) + " (tol 1e-12 included)"));

  // Monotonicity in epsilon for every method.
  double mono = 0.0;
  const std::vector<double> grid = LinSpace(0.0, 5.0, 60);
  for (Method method :
       {Method::kThm4, Method::kThm5, Method::kProp1}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : grid) {
      const double value = EvaluateDelta(method, eps, fig, 39);
      mono = std::max(mono, value - prev);
      prev = value;
    }
  }
  {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : grid) {
      const double value = EvaluateDelta(Method::kThm3, eps, lap, 2);
      mono = std::max(mono, value - prev);
      prev = value;
    }
  }
  report.checks.push_back(MarginCheck("delta nonincreasing in epsilon", -mono,
                                      "max increase = " + Fmt(mono)));

  // Inversion round trip.
  const double target = 1e-3;
  const double eps_hat = EpsilonForDelta(target, fig, 39, Method::kThm4);
  const double at = DeltaGaussianPnsgd(eps_hat, fig, 39);
  const double below = DeltaGaussianPnsgd(std::max(eps_hat - 1e-6, 0.0), fig, 39);
  const double round_trip_margin =
      std::min(target - at, below - target);
  report.checks.push_back(MarginCheck(
      "epsilon-for-delta round trip", round_trip_margin,
      "delta(eps) = " + Fmt(at) + ", delta(eps - 1e-6) = " + Fmt(below)));
  return report;
}

VerifyReport VerifyPropagator(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "propagator";
  const PnsgdConfig cfg = DefaultPropagationConfig();
  const LossModel loss = QuadraticLoss(1.0, 0.0, 1.0, 0.0, 1.0);
  loss.ValidateOnGrid();
  const Dataset data = DefaultDataset(cfg.n);

  // Step-kernel mass and contraction against the closed-form bound.
  const int cells = 64;
  double worst_row = 0.0;
  double contraction_margin = std::numeric_limits<double>::infinity();
  const double m = LipschitzM(cfg.eta, cfg.reg);
  for (double x : {0.1, 0.6, 0.9}) {
    const DiscreteKernel kernel =
        BuildStepKernel(loss, cfg.eta, x, cfg.noise, cfg.geom, cells);
    for (std::size_t i = 0; i < kernel.num_states(); ++i) {
      double sum = 0.0;
      for (double w : kernel.row(i)) sum += w;
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
    }
    for (double eps : {0.0, 0.5, 1.5}) {
      const double bound =
          ContractionGaussianProjected(Gamma::FromEpsilon(eps), m, cfg.geom,
                                       cfg.eta, cfg.noise.scale()) +
          5.0 / cells;
      const double discrete =
          ContractionDiscrete(kernel, Gamma::FromEpsilon(eps));
      contraction_margin = std::min(contraction_margin, bound - discrete);
    }
  }
  report.checks.push_back(MarginCheck("step-kernel rows sum to one",
                                      1e-12 - worst_row,
                                      "max |row sum - 1| = " + Fmt(worst_row)));
  report.checks.push_back(MarginCheck(
      "step-kernel contraction below closed form", contraction_margin,
      "min (bound + 5/G - discrete) = " + Fmt(contraction_margin)));

  // Soundness of the per-record bound against the propagated divergence.
  double soundness_margin = std::numeric_limits<double>::infinity();
  double mass_drift = 0.0;
  for (int i : {1, 5, 10}) {
    Dataset prime = data;
    prime.points[i - 1] = data.points[i - 1] <= 0.5 ? 1.0 : 0.0;
    const PropagatedPair pair = PropagatePair(cfg, loss, data, prime, cells);
    mass_drift = std::max(mass_drift, std::abs(pair.mu_n.Sum() - 1.0));
    for (double eps : LinSpace(0.0, 4.0, 9)) {
      const double empirical = EmpiricalDeltaFromPair(pair, eps);
      const double theoretical = DeltaGaussianPnsgd(eps, cfg, i);
      soundness_margin = std::min(
          soundness_margin, theoretical + 5.0 / cells - empirical);
    }
  }
  report.checks.push_back(MarginCheck(
      "empirical delta below theoretical + 5/G", soundness_margin,
      "min margin = " + Fmt(soundness_margin)));
  report.checks.push_back(MarginCheck("propagated mass conserved",
                                      1e-9 - mass_drift,
                                      "max |mass - 1| = " + Fmt(mass_drift)));

  // Determinism of the sampler.
  const std::vector<double> run1 = SimulatePnsgd(cfg, data, loss, seed, 512);
  const std::vector<double> run2 = SimulatePnsgd(cfg, data, loss, seed, 512);
  report.checks.push_back(MarginCheck("simulation determinism",
                                      run1 == run2 ? 0.0 : -1.0,
                                      "two runs compared byte for byte"));

  // Monte Carlo histogram against the propagated law.
  const int trials = 20000;
  const std::vector<double> samples =
      SimulatePnsgd(cfg, data, loss, seed + 1, trials);
  const GridDensity mu0 = UniformGridDensity(cfg.geom.a(), cfg.geom.b(), cells);
  const GridDensity mu_n = Propagate(mu0, data, cfg, loss, cells).back();
  std::vector<double> histogram(cells, 0.0);
  for (double y : samples) {
    const double pos = (y - cfg.geom.a()) / (cfg.geom.b() - cfg.geom.a());
    const int bin = std::min(cells - 1, static_cast<int>(pos * cells));
    histogram[bin] += 1.0 / trials;
  }
  double tv = 0.0;
  for (int i = 0; i < cells; ++i) {
    tv += 0.5 * std::abs(histogram[i] - mu_n.weights[i]);
  }
  const double mc_threshold =
      3.0 * std::sqrt(static_cast<double>(cells) / trials);
  report.checks.push_back(MarginCheck(
      "monte carlo histogram near propagated law", mc_threshold - tv,
      "TV = " + Fmt(tv) + ", threshold = " + Fmt(mc_threshold)));
  return report;
}

}  // namespace hsdp
