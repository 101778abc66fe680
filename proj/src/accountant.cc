#include "hsdp/accountant.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsdp {
namespace {

// Largest epsilon probed by the bisection bracket; e^708 is still finite.
constexpr double kEpsilonCap = 708.0;
constexpr double kBisectionTol = 1e-9;

void RequireEpsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::domain_error("epsilon must be finite and >= 0");
  }
}

void RequireRecordIndex(const PnsgdConfig& cfg, int record_index) {
  if (record_index < 1 || record_index > cfg.n) {
    throw std::invalid_argument("record index " + std::to_string(record_index) +
                                " outside [1, " + std::to_string(cfg.n) + "]");
  }
}

void RequireFamily(const PnsgdConfig& cfg, NoiseFamily family,
                   const char* method) {
  if (cfg.noise.family() != family) {
    throw std::invalid_argument(std::string(method) +
                                " does not apply to this noise family");
  }
}

double ClampUnit(double x) { return std::clamp(x, 0.0, 1.0); }

double LaplacePureDpThreshold(const PnsgdConfig& cfg) {
  const double m = LipschitzM(cfg.eta, cfg.reg);
  const double v = cfg.noise.scale();
  return std::min(2.0 * cfg.reg.lipschitz / v,
                  m * (cfg.geom.b() - cfg.geom.a()) / (cfg.eta * v));
}

}  // namespace

std::vector<std::string> PnsgdConfig::Violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(eta) || eta <= 0.0) {
    out.push_back("eta must be positive and finite");
  }
  if (n < 1) out.push_back("n must be at least 1");
  if (!std::isfinite(reg.lipschitz) || reg.lipschitz <= 0.0) {
    out.push_back("reg.L must be positive and finite");
  }
  if (!std::isfinite(reg.smoothness) || reg.smoothness <= 0.0) {
    out.push_back("reg.beta must be positive and finite");
  }
  if (!std::isfinite(reg.strong_convexity) || reg.strong_convexity < 0.0) {
    out.push_back("reg.rho must be >= 0 and finite");
  } else if (std::isfinite(eta) && eta > 0.0 &&
             std::isfinite(reg.smoothness) && reg.smoothness > 0.0 &&
             !(eta < 2.0 / (reg.smoothness + reg.strong_convexity))) {
    out.push_back("eta must satisfy eta < 2/(reg.beta + reg.rho)");
  }
  if (noise.family() == NoiseFamily::kLaplace &&
      geom.kind() != DomainKind::kInterval) {
    out.push_back("laplace noise requires an interval domain");
  }
  if (noise.dim() != geom.dim()) {
    out.push_back("noise dimension must match the domain dimension");
  }
  return out;
}

void PnsgdConfig::Validate() const {
  const std::vector<std::string> violations = Violations();
  if (violations.empty()) return;
  std::string message = "invalid configuration:";
  for (const std::string& v : violations) message += "\n  - " + v;
  throw std::invalid_argument(message);
}

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kThm3:
      return "thm3";
    case Method::kThm4:
      return "thm4";
    case Method::kThm5:
      return "thm5";
    case Method::kProp1:
      return "prop1";
  }
  throw std::logic_error("unknown method");
}

std::optional<Method> MethodFromName(std::string_view name) {
  if (name == "thm3") return Method::kThm3;
  if (name == "thm4") return Method::kThm4;
  if (name == "thm5") return Method::kThm5;
  if (name == "prop1") return Method::kProp1;
  return std::nullopt;
}

double ComposeSdpi(double initial_div, std::span<const double> coefficients) {
  if (!std::isfinite(initial_div) || initial_div < 0.0 || initial_div > 1.0) {
    throw std::domain_error("initial divergence must lie in [0, 1]");
  }
  double acc = initial_div;
  for (double c : coefficients) {
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw std::domain_error("contraction coefficients must lie in [0, 1]");
    }
    acc *= c;
  }
  return ClampUnit(acc);
}

double InitialDivergenceLaplace(double epsilon, double lipschitz, double v) {
  RequireEpsilon(epsilon);
  if (!std::isfinite(lipschitz) || lipschitz <= 0.0) {
    throw std::domain_error("lipschitz constant must be positive");
  }
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::domain_error("laplace scale must be positive");
  }
  if (epsilon >= 2.0 * lipschitz / v) return 0.0;
  return ClampUnit(1.0 - std::exp(0.5 * epsilon - lipschitz / v));
}

double InitialDivergenceGaussian(double epsilon, double lipschitz,
                                 double sigma) {
  RequireEpsilon(epsilon);
  if (!std::isfinite(lipschitz) || lipschitz <= 0.0) {
    throw std::domain_error("lipschitz constant must be positive");
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw std::domain_error("sigma must be positive");
  }
  return ThetaGamma(Gamma::FromEpsilon(epsilon), 2.0 * lipschitz / sigma);
}

double DeltaLaplacePnsgd(double epsilon, const PnsgdConfig& cfg,
                         int record_index) {
  cfg.Validate();
  RequireFamily(cfg, NoiseFamily::kLaplace, "the Laplace bound");
  RequireRecordIndex(cfg, record_index);
  RequireEpsilon(epsilon);
  const double m = LipschitzM(cfg.eta, cfg.reg);
  const double v = cfg.noise.scale();
  const double initial = InitialDivergenceLaplace(epsilon, cfg.reg.lipschitz, v);
  const double factor = ContractionLaplaceProjected(
      epsilon, m, cfg.geom.a(), cfg.geom.b(), cfg.eta, v);
  const std::vector<double> coefficients(cfg.n - record_index, factor);
  return ComposeSdpi(initial, coefficients);
}

double DeltaGaussianPnsgd(double epsilon, const PnsgdConfig& cfg,
                          int record_index) {
  cfg.Validate();
  RequireFamily(cfg, NoiseFamily::kGaussian, "the Gaussian bound");
  RequireRecordIndex(cfg, record_index);
  RequireEpsilon(epsilon);
  const double m = LipschitzM(cfg.eta, cfg.reg);
  const double sigma = cfg.noise.scale();
  const double initial =
      InitialDivergenceGaussian(epsilon, cfg.reg.lipschitz, sigma);
  const double factor = ContractionGaussianProjected(
      Gamma::FromEpsilon(epsilon), m, cfg.geom, cfg.eta, sigma);
  const std::vector<double> coefficients(cfg.n - record_index, factor);
  return ComposeSdpi(initial, coefficients);
}

RandomStopDelta DeltaRandomStop(double epsilon, const PnsgdConfig& cfg) {
  cfg.Validate();
  RequireFamily(cfg, NoiseFamily::kGaussian, "the random-stopping bound");
  RequireEpsilon(epsilon);
  const double m = LipschitzM(cfg.eta, cfg.reg);
  const double sigma = cfg.noise.scale();
  const double initial =
      InitialDivergenceGaussian(epsilon, cfg.reg.lipschitz, sigma);
  const double factor = ContractionGaussianProjected(
      Gamma::FromEpsilon(epsilon), m, cfg.geom, cfg.eta, sigma);
  if (factor >= 1.0) return {1.0, true};
  return {ClampUnit(initial / (static_cast<double>(cfg.n) * (1.0 - factor))),
          false};
}

double RdpKappa(const PnsgdConfig& cfg, int record_index) {
  cfg.Validate();
  RequireFamily(cfg, NoiseFamily::kGaussian, "the RDP baseline");
  RequireRecordIndex(cfg, record_index);
  const double lipschitz_sq = cfg.reg.lipschitz * cfg.reg.lipschitz;
  const double sigma_sq = cfg.noise.scale() * cfg.noise.scale();
  if (record_index == cfg.n) return 2.0 * lipschitz_sq / sigma_sq;
  const double m = LipschitzM(cfg.eta, cfg.reg);
  const int remaining = cfg.n - record_index;
  return 2.0 * lipschitz_sq * std::pow(m, remaining + 1) /
         (static_cast<double>(remaining) * sigma_sq);
}

double DeltaRdpBaseline(double epsilon, const PnsgdConfig& cfg,
                        int record_index) {
  RequireEpsilon(epsilon);
  const double kappa = RdpKappa(cfg, record_index);
  if (epsilon <= kappa) return 1.0;
  const double gap = epsilon - kappa;
  return ClampUnit(std::exp(-gap * gap / (4.0 * kappa)));
}

double RdpDeltaGridInfimum(double epsilon, double kappa) {
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw std::domain_error("kappa must be positive");
  }
  if (!(epsilon > kappa)) {
    throw std::domain_error("the baseline requires epsilon > kappa");
  }
  // Minimizing exp(g) is minimizing the exponent g.
  auto exponent = [epsilon, kappa](double alpha) {
    return -(alpha - 1.0) * (epsilon - kappa * alpha);
  };

  constexpr int kGridPoints = 4001;
  double lo = 1.0 + 1e-9;
  double hi = 4.0;
  for (int pass = 0; pass < 4; ++pass) {
    int best_idx = 0;
    double best = exponent(lo);
    for (int i = 1; i < kGridPoints; ++i) {
      const double alpha =
          lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
      const double g = exponent(alpha);
      if (g < best) {
        best = g;
        best_idx = i;
      }
    }
    if (pass == 0 && best_idx == kGridPoints - 1) {
      // The minimum is past the window; widen and rescan.
      hi *= 4.0;
      --pass;
      continue;
    }
    const double step = (hi - lo) / (kGridPoints - 1);
    const double center = lo + step * best_idx;
    lo = std::max(1.0 + 1e-9, center - step);
    hi = center + step;
  }
  return std::exp(exponent(0.5 * (lo + hi)));
}

double EvaluateDelta(Method method, double epsilon, const PnsgdConfig& cfg,
                     int record_index) {
  switch (method) {
    case Method::kThm3:
      return DeltaLaplacePnsgd(epsilon, cfg, record_index);
    case Method::kThm4:
      return DeltaGaussianPnsgd(epsilon, cfg, record_index);
    case Method::kThm5:
      return DeltaRandomStop(epsilon, cfg).delta;
    case Method::kProp1:
      return DeltaRdpBaseline(epsilon, cfg, record_index);
  }
  throw std::logic_error("unknown method");
}

DpPoint EvaluatePoint(Method method, double epsilon, const PnsgdConfig& cfg,
                      int record_index) {
  return DpPoint{epsilon, EvaluateDelta(method, epsilon, cfg, record_index),
                 method};
}

double EpsilonForDelta(double delta_target, const PnsgdConfig& cfg,
                       int record_index, Method method) {
  if (!std::isfinite(delta_target) || delta_target <= 0.0 ||
      delta_target >= 1.0) {
    throw std::invalid_argument("delta target must lie in (0, 1)");
  }
  auto delta_at = [&](double eps) {
    return EvaluateDelta(method, eps, cfg, record_index);
  };

  double lo = 0.0;
  double delta_lo = delta_at(lo);
  if (delta_lo <= delta_target) return 0.0;

  double hi = 1.0;
  double delta_hi = delta_at(hi);
  while (delta_hi >= delta_target) {
    lo = hi;
    delta_lo = delta_hi;
    hi = std::min(2.0 * hi, kEpsilonCap);
    delta_hi = delta_at(hi);
    if (hi >= kEpsilonCap && delta_hi >= delta_target) {
      throw std::runtime_error("delta target unreachable within epsilon range");
    }
  }

  while (hi - lo > kBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    const double delta_mid = delta_at(mid);
    if (delta_mid > delta_lo + 1e-12 || delta_mid < delta_hi - 1e-12) {
      throw std::logic_error("delta map is not monotone under bisection");
    }
    if (delta_mid >= delta_target) {
      lo = mid;
      delta_lo = delta_mid;
    } else {
      hi = mid;
      delta_hi = delta_mid;
    }
  }
  if (method == Method::kThm3) {
    // Delta is exactly zero from the pure-DP threshold onward, so the
    // conservative answer never needs to exceed it.
    hi = std::min(hi, LaplacePureDpThreshold(cfg));
  }
  return hi;
}

std::vector<CurvePoint> ComputeCurve(const PnsgdConfig& cfg, int record_index,
                                     std::span<const double> eps_grid,
                                     Method method) {
  if (eps_grid.empty()) {
    throw std::invalid_argument("epsilon grid must be nonempty");
  }
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i) {
    if (!(eps_grid[i] < eps_grid[i + 1])) {
      throw std::invalid_argument("epsilon grid must be strictly increasing");
    }
  }
  std::vector<CurvePoint> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const DpPoint evaluated = EvaluatePoint(method, eps, cfg, record_index);
    CurvePoint point;
    point.epsilon = evaluated.epsilon;
    point.delta_thm = evaluated.delta;
    if (method == Method::kThm4) {
      point.delta_baseline = DeltaRdpBaseline(eps, cfg, record_index);
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace hsdp
