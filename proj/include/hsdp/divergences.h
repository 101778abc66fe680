#ifndef HSDP_DIVERGENCES_H_
#define HSDP_DIVERGENCES_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hsdp {

// Multiplicative likelihood-ratio threshold gamma >= 1, interchangeable with
// a privacy parameter epsilon >= 0 through gamma = exp(epsilon).
class Gamma {
 public:
  explicit Gamma(double value);
  static Gamma FromEpsilon(double epsilon);

  double value() const { return value_; }
  double epsilon() const;

 private:
  double value_;
};

// Standard Gaussian upper-tail probability P(N(0,1) >= t). Evaluated through
// erfc so that large t does not go through a 1 - CDF subtraction.
double QFunction(double t);

// Hockey-stick divergence between unit-variance Gaussians whose means are r
// apart. The r = 0 singularity of the closed form is resolved by its limit,
// which is 0.
double ThetaGamma(const Gamma& gamma, double r);

// E_gamma(N(m1, sigma^2 I) || N(m2, sigma^2 I)). Computed as
// ThetaGamma(gamma, |m2 - m1| / sigma), so the two agree bit for bit.
double EgammaGaussian(std::span<const double> m1, std::span<const double> m2,
                      double sigma, const Gamma& gamma);
double EgammaGaussian(double m1, double m2, double sigma, const Gamma& gamma);

// E_gamma(Laplace(m1, v) || Laplace(m2, v)) with v the scale parameter:
// [1 - exp((v log(gamma) - |m1 - m2|) / 2v)]_+. Exactly zero whenever
// |m1 - m2| <= v log(gamma).
double EgammaLaplace(double m1, double m2, double v, const Gamma& gamma);

// Probability density on the real line restricted to a finite quadrature
// window [lo, hi] outside of which it is numerically negligible.
// `breakpoints` lists interior points where the density is not smooth (for
// example the mean of a Laplace density).
struct ScalarDensity {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
};

// Factory densities with windows cut where the density falls below 1e-16 of
// its peak value.
ScalarDensity MakeGaussianDensity(double mean, double sigma);
ScalarDensity MakeLaplaceDensity(double mean, double v);

struct QuadratureResult {
  double value = 0.0;
  // Integration window actually used (union of the two input windows).
  double lo = 0.0;
  double hi = 0.0;
  // Sign-change roots of p - gamma*q located before integrating piecewise.
  std::vector<double> kinks;
};

// E_gamma(P || Q) by adaptive quadrature of [p(y) - gamma*q(y)]_+ with
// absolute tolerance 1e-8. The integrand's kinks are bracketed on a scan grid
// and bisected to 1e-12 before integrating piecewise. Each input must
// integrate to 1 over its window within 1e-6.
QuadratureResult EgammaQuadrature(const ScalarDensity& p,
                                  const ScalarDensity& q, const Gamma& gamma);

// Probability vector: nonnegative weights summing to 1 within 1e-12.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> weights);
  static DiscreteDistribution PointMass(std::size_t index, std::size_t size);

  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
};

// E_gamma(P || Q) = sum_i [p_i - gamma * q_i]_+. At gamma = 1 this is the
// total variation distance.
double EgammaDiscrete(std::span<const double> p, std::span<const double> q,
                      const Gamma& gamma);
double EgammaDiscrete(const DiscreteDistribution& p,
                      const DiscreteDistribution& q, const Gamma& gamma);

}  // namespace hsdp

#endif  // HSDP_DIVERGENCES_H_
