#include "hsdp/divergences.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsdp {
namespace {

constexpr double kQuadratureTol = 1e-8;
constexpr double kNormalizationTol = 1e-6;
constexpr double kNormalizationQuadTol = 1e-9;
constexpr double kRootArgTol = 1e-12;
constexpr double kWindowFloorRatio = 1e-16;
constexpr int kScanPoints = 2048;
constexpr int kMaxPanelDepth = 24;

double ClampUnit(double x) { return std::clamp(x, 0.0, 1.0); }

void RequireFinite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(what) + " must be finite");
  }
}

double SimpsonRec(const std::function<double(double)>& f, double a, double fa,
                  double m, double fm, double b, double fb, double whole,
                  double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return SimpsonRec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         SimpsonRec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                       double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return SimpsonRec(f, a, fa, m, fm, b, fb, whole, tol, kMaxPanelDepth);
}

// Integrates f over [lo, hi] split at `nodes` (sorted, deduplicated, within
// range). The absolute tolerance is distributed over the panels by length, so
// narrow features cannot hide between the initial Simpson nodes.
double IntegratePanels(const std::function<double(double)>& f,
                       const std::vector<double>& nodes, double tol) {
  double total = 0.0;
  const double width = nodes.back() - nodes.front();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    if (!(b > a)) continue;
    total += AdaptiveSimpson(f, a, b, tol * ((b - a) / width));
  }
  return total;
}

std::vector<double> BuildNodes(double lo, double hi,
                               std::span<const double> extra) {
  std::vector<double> nodes;
  nodes.reserve(kScanPoints + extra.size() + 2);
  for (int i = 0; i <= kScanPoints; ++i) {
    nodes.push_back(lo + (hi - lo) * static_cast<double>(i) / kScanPoints);
  }
  for (double x : extra) {
    if (x > lo && x < hi) nodes.push_back(x);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

void ValidateDensity(const ScalarDensity& d, const char* name) {
  if (!d.pdf) {
    throw std::invalid_argument(std::string(name) + ": pdf is not set");
  }
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi)) {
    throw std::invalid_argument(std::string(name) +
                                ": window must satisfy lo < hi and be finite");
  }
  const std::vector<double> nodes = BuildNodes(d.lo, d.hi, d.breakpoints);
  const double mass = IntegratePanels(d.pdf, nodes, kNormalizationQuadTol);
  if (std::abs(mass - 1.0) > kNormalizationTol) {
    throw std::invalid_argument(std::string(name) +
                                ": density integrates to " +
                                std::to_string(mass) + ", expected 1");
  }
}

// Sign-change roots of g on the node grid, bisected to kRootArgTol. Values
// whose magnitude is below a noise floor relative to the largest sample are
// treated as zero so that roundoff in near-identical densities does not spray
// spurious brackets.
std::vector<double> LocateRoots(const std::function<double(double)>& g,
                                const std::vector<double>& nodes) {
  std::vector<double> values(nodes.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    values[i] = g(nodes[i]);
    peak = std::max(peak, std::abs(values[i]));
  }
  const double floor = 1e-13 * peak;
  auto signum = [floor](double v) -> int {
    if (std::abs(v) <= floor) return 0;
    return v > 0 ? 1 : -1;
  };

  std::vector<double> roots;
  int prev_sign = 0;
  std::size_t prev_idx = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int s = signum(values[i]);
    if (s == 0) continue;
    if (prev_sign != 0 && s != prev_sign) {
      double a = nodes[prev_idx];
      double b = nodes[i];
      double fa = values[prev_idx];
      while (b - a > kRootArgTol) {
        const double m = 0.5 * (a + b);
        const double fm = g(m);
        if ((fa > 0) == (fm > 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_sign = s;
    prev_idx = i;
  }
  return roots;
}

}  // namespace

Gamma::Gamma(double value) : value_(value) {
  if (!std::isfinite(value) || value < 1.0) {
    throw std::domain_error("gamma must be finite and >= 1, got " +
                            std::to_string(value));
  }
}

Gamma Gamma::FromEpsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::domain_error("epsilon must be finite and >= 0, got " +
                            std::to_string(epsilon));
  }
  return Gamma(std::exp(epsilon));
}

double Gamma::epsilon() const { return std::log(value_); }

double QFunction(double t) {
  RequireFinite(t, "q-function argument");
  return 0.5 * std::erfc(t / std::sqrt(2.0));
}

double ThetaGamma(const Gamma& gamma, double r) {
  if (!std::isfinite(r) || r < 0.0) {
    throw std::domain_error("theta argument r must be finite and >= 0");
  }
  if (r == 0.0) return 0.0;
  const double a = std::log(gamma.value()) / r;
  const double upper = QFunction(a - 0.5 * r);
  const double lower = QFunction(a + 0.5 * r);
  // When the second tail underflows the scaled term is exactly zero.
  const double scaled = lower == 0.0 ? 0.0 : gamma.value() * lower;
  return ClampUnit(upper - scaled);
}

double EgammaGaussian(std::span<const double> m1, std::span<const double> m2,
                      double sigma, const Gamma& gamma) {
  if (m1.empty() || m1.size() != m2.size()) {
    throw std::domain_error("mean vectors must be nonempty and equal length");
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw std::domain_error("sigma must be finite and positive");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    RequireFinite(m1[i], "mean coordinate");
    RequireFinite(m2[i], "mean coordinate");
    const double d = m2[i] - m1[i];
    sum_sq += d * d;
  }
  return ThetaGamma(gamma, std::sqrt(sum_sq) / sigma);
}

double EgammaGaussian(double m1, double m2, double sigma, const Gamma& gamma) {
  const double mm1[] = {m1};
  const double mm2[] = {m2};
  return EgammaGaussian(mm1, mm2, sigma, gamma);
}

double EgammaLaplace(double m1, double m2, double v, const Gamma& gamma) {
  RequireFinite(m1, "m1");
  RequireFinite(m2, "m2");
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::domain_error("laplace scale v must be finite and positive");
  }
  const double dist = std::abs(m1 - m2);
  const double vlg = v * std::log(gamma.value());
  if (dist <= vlg) return 0.0;
  return ClampUnit(1.0 - std::exp((vlg - dist) / (2.0 * v)));
}

ScalarDensity MakeGaussianDensity(double mean, double sigma) {
  RequireFinite(mean, "mean");
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw std::domain_error("sigma must be finite and positive");
  }
  const double half_width = sigma * std::sqrt(-2.0 * std::log(kWindowFloorRatio));
  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  ScalarDensity d;
  d.pdf = [mean, sigma, inv_norm](double y) {
    const double z = (y - mean) / sigma;
    return inv_norm * std::exp(-0.5 * z * z);
  };
  d.lo = mean - half_width;
  d.hi = mean + half_width;
  return d;
}

ScalarDensity MakeLaplaceDensity(double mean, double v) {
  RequireFinite(mean, "mean");
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::domain_error("laplace scale v must be finite and positive");
  }
  const double half_width = -v * std::log(kWindowFloorRatio);
  ScalarDensity d;
  d.pdf = [mean, v](double y) {
    return 0.5 / v * std::exp(-std::abs(y - mean) / v);
  };
  d.lo = mean - half_width;
  d.hi = mean + half_width;
  d.breakpoints = {mean};
  return d;
}

QuadratureResult EgammaQuadrature(const ScalarDensity& p,
                                  const ScalarDensity& q, const Gamma& gamma) {
  ValidateDensity(p, "p");
  ValidateDensity(q, "q");

  QuadratureResult result;
  result.lo = std::min(p.lo, q.lo);
  result.hi = std::max(p.hi, q.hi);

  const double g = gamma.value();
  auto diff = [&](double y) { return p.pdf(y) - g * q.pdf(y); };

  std::vector<double> extra(p.breakpoints);
  extra.insert(extra.end(), q.breakpoints.begin(), q.breakpoints.end());
  std::vector<double> nodes = BuildNodes(result.lo, result.hi, extra);

  result.kinks = LocateRoots(diff, nodes);

  // Re-split the panels at the exact kinks so each panel is smooth.
  nodes.insert(nodes.end(), result.kinks.begin(), result.kinks.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto positive_part = [&](double y) { return std::max(diff(y), 0.0); };
  result.value = ClampUnit(IntegratePanels(positive_part, nodes, kQuadratureTol));
  return result;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("distribution must have at least one weight");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("weights sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
  }
}

DiscreteDistribution DiscreteDistribution::PointMass(std::size_t index,
                                                     std::size_t size) {
  if (index >= size) {
    throw std::invalid_argument("point mass index out of range");
  }
  std::vector<double> w(size, 0.0);
  w[index] = 1.0;
  return DiscreteDistribution(std::move(w));
}

double EgammaDiscrete(std::span<const double> p, std::span<const double> q,
                      const Gamma& gamma) {
  if (p.empty() || p.size() != q.size()) {
    throw std::domain_error("distributions must be nonempty and equal length");
  }
  const double g = gamma.value();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g * q[i];
    if (d > 0.0) sum += d;
  }
  return ClampUnit(sum);
}

double EgammaDiscrete(const DiscreteDistribution& p,
                      const DiscreteDistribution& q, const Gamma& gamma) {
  return EgammaDiscrete(p.weights(), q.weights(), gamma);
}

}  // namespace hsdp
