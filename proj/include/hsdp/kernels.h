#ifndef HSDP_KERNELS_H_
#define HSDP_KERNELS_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hsdp/divergences.h"

namespace hsdp {

// Regularity constants of a loss y -> loss(y, x), uniform over the data
// alphabet.
struct LossRegularity {
  double lipschitz = 0.0;         // L: Lipschitz constant of the loss in y
  double smoothness = 0.0;        // beta: Lipschitz constant of the gradient
  double strong_convexity = 0.0;  // rho >= 0

  void Validate() const;
};

enum class NoiseFamily { kLaplace, kGaussian };

// Additive noise description. Laplace noise is supported in one dimension
// only; `scale` is the Laplace scale v or the Gaussian standard deviation
// sigma.
class NoiseSpec {
 public:
  static NoiseSpec Laplace(double v);
  static NoiseSpec Gaussian(double sigma, int dim = 1);

  NoiseFamily family() const { return family_; }
  double scale() const { return scale_; }
  int dim() const { return dim_; }

 private:
  NoiseSpec(NoiseFamily family, double scale, int dim);

  NoiseFamily family_;
  double scale_;
  int dim_;
};

enum class DomainKind { kInterval, kBall };

// Compact convex parameter domain: an interval [a, b] in one dimension or a
// ball described by its diameter.
class DomainGeometry {
 public:
  static DomainGeometry Interval(double a, double b);
  static DomainGeometry Ball(double diameter, int dim);

  DomainKind kind() const { return kind_; }
  double diameter() const { return diameter_; }
  int dim() const { return dim_; }
  // Interval endpoints; throws for ball domains.
  double a() const;
  double b() const;

 private:
  DomainGeometry(DomainKind kind, double a, double b, double diameter, int dim);

  DomainKind kind_;
  double a_;
  double b_;
  double diameter_;
  int dim_;
};

// Row-stochastic transition matrix on a finite state space. Rows must sum to
// 1 within 1e-12.
class DiscreteKernel {
 public:
  explicit DiscreteKernel(std::vector<std::vector<double>> rows);
  // Parses S lines of S comma-separated probabilities.
  static DiscreteKernel FromCsv(const std::string& path);

  std::size_t num_states() const { return size_; }
  std::span<const double> row(std::size_t i) const;

  // Output distribution mu * K for an input distribution mu.
  std::vector<double> Apply(std::span<const double> mu) const;

 private:
  std::size_t size_;
  std::vector<double> flat_;  // row-major
};

// Lipschitz constant of the gradient-step map y -> y - eta * grad(y, x) for a
// beta-smooth, rho-strongly-convex loss: sqrt(1 - 2*eta*beta*rho/(beta+rho)).
// Requires eta < 2/(beta + rho); exactly 1 when rho == 0.
double LipschitzM(double eta, const LossRegularity& reg);

// Upper bound on the E_gamma contraction coefficient of one projected
// noisy-gradient step with Gaussian noise:
// theta_gamma(M * D / (eta * sigma)) with D the domain diameter.
double ContractionGaussianProjected(const Gamma& gamma, double m_lipschitz,
                                    const DomainGeometry& geom, double eta,
                                    double sigma);

// Laplace-noise counterpart on an interval [a, b]:
// [1 - exp(eps/2 - M(b-a)/(2*eta*v))]_+, exactly 0 once
// eps >= M * (b - a) / (eta * v).
double ContractionLaplaceProjected(double epsilon, double m_lipschitz,
                                   double a, double b, double eta, double v);

// Exact E_gamma contraction coefficient of a finite kernel: the maximum
// E_gamma between two rows. At gamma = 1 this is the Dobrushin coefficient.
double ContractionDiscrete(const DiscreteKernel& kernel, const Gamma& gamma);

// Empirical sup of E_gamma(mu K || nu K) / E_gamma(mu || nu) over `trials`
// random simplex pairs drawn from a generator seeded with `seed`, plus every
// ordered point-mass pair. Pairs whose denominator is at most 1e-12 are
// skipped. Point-mass pairs have unit denominator, so they reproduce
// ContractionDiscrete exactly and the result never falls below it.
double ContractionBruteforceRatio(const DiscreteKernel& kernel,
                                  const Gamma& gamma, int trials,
                                  std::uint64_t seed);

// Uniform sample from the probability simplex via normalized exponential
// spacings.
std::vector<double> SampleSimplex(std::size_t size, std::mt19937_64& rng);

}  // namespace hsdp

#endif  // HSDP_KERNELS_H_
