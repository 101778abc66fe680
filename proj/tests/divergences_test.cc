#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hsdp/divergences.h"

using namespace hsdp;

namespace {

constexpr double kE = 2.718281828459045;

// High-precision reference values, frozen from 40-digit evaluations of the
// tail integrals; the theta and shifted-gaussian values were confirmed by
// independent quadrature of [p - gamma*q]_+ at the same precision.
constexpr double kQHalf = 0.30853753872598689636;
constexpr double kOneMinusTwoQHalf = 0.38292492254802620728;
constexpr double kThetaE1 = 0.1269367375066439458;
constexpr double kGaussShift2SigmaOneGammaE = 0.50986166005467015308;
constexpr double kOneMinusInvE = 0.6321205588285576784;

}  // namespace

TEST_CASE("gamma accepts values >= 1 and round-trips epsilon") {
  CHECK(Gamma(1.0).value() == 1.0);
  CHECK(Gamma(1.0).epsilon() == 0.0);
  CHECK_THROWS_AS(Gamma(0.999), std::domain_error);
  CHECK_THROWS_AS(Gamma(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(Gamma::FromEpsilon(-1e-9), std::domain_error);
  CHECK_THROWS_AS(Gamma::FromEpsilon(1e9), std::domain_error);  // overflows

  for (double eps : {0.0, 1e-6, 0.3, 1.0, 5.0, 100.0}) {
    const double back = Gamma::FromEpsilon(eps).epsilon();
    CHECK(std::abs(back - eps) <= 1e-12 * std::max(eps, 1.0));
  }
}

TEST_CASE("q-function values and stability") {
  CHECK(QFunction(0.0) == 0.5);
  for (double t : {0.5, 1.0, 3.0}) {
    CHECK(std::abs(QFunction(-t) + QFunction(t) - 1.0) <= 1e-15);
  }
  CHECK(std::abs(QFunction(0.5) - kQHalf) <= 1e-15);
  // 97.5% quantile of the standard normal.
  CHECK(std::abs(QFunction(1.959963984540054) - 0.025) <= 1e-9);
  // Far tail must not collapse into 1 - CDF cancellation garbage.
  CHECK(QFunction(38.0) > 0.0);
  CHECK(QFunction(38.0) < 1e-300);
  CHECK_THROWS_AS(QFunction(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(QFunction(INFINITY), std::domain_error);
}

TEST_CASE("theta handles the r = 0 limit and the TV special case") {
  for (double g : {1.0, 1.5, kE, 5.0}) {
    CHECK(ThetaGamma(Gamma(g), 0.0) == 0.0);
  }
  for (double r : {0.25, 1.0, 2.0, 6.0}) {
    CHECK(std::abs(ThetaGamma(Gamma(1.0), r) -
                   (1.0 - 2.0 * QFunction(r / 2.0))) <= 1e-15);
  }
  CHECK(std::abs(ThetaGamma(Gamma(kE), 1.0) - kThetaE1) <= 1e-15);
  CHECK_THROWS_AS(ThetaGamma(Gamma(2.0), -0.1), std::domain_error);
  CHECK_THROWS_AS(ThetaGamma(Gamma(2.0), INFINITY), std::domain_error);
}

TEST_CASE("theta is nondecreasing in r and vanishing in gamma") {
  for (double g : {1.0, 1.5, kE, 5.0}) {
    double prev = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double value = ThetaGamma(Gamma(g), 10.0 * i / 40.0);
      CHECK(value >= prev);
      CHECK(value >= 0.0);
      CHECK(value <= 1.0);
      prev = value;
    }
  }
  double prev = 2.0;
  for (double eps : {0.0, 1.0, 2.0, 4.0, 8.0, 32.0}) {
    const double value = ThetaGamma(Gamma::FromEpsilon(eps), 1.0);
    CHECK(value <= prev);
    prev = value;
  }
  CHECK(ThetaGamma(Gamma::FromEpsilon(64.0), 1.0) == 0.0);
}

TEST_CASE("gaussian divergence reduces to theta and handles equal means") {
  const Gamma g(3.0);
  CHECK(EgammaGaussian(0.7, 0.7, 2.0, g) == 0.0);
  const std::vector<double> m1 = {0.0, 0.0, 0.0};
  CHECK(EgammaGaussian(m1, m1, 0.1, g) == 0.0);

  CHECK(std::abs(EgammaGaussian(0.0, 1.0, 1.0, Gamma(1.0)) -
                 kOneMinusTwoQHalf) <= 1e-15);
  CHECK(std::abs(EgammaGaussian(0.0, 2.0, 1.0, Gamma(kE)) -
                 kGaussShift2SigmaOneGammaE) <= 1e-15);

  // The multivariate form depends on the means through their distance only;
  // a 3-4-5 difference keeps the norm exact so the identity is bitwise.
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {4.0, 6.0};
  CHECK(EgammaGaussian(a, b, 2.0, g) == ThetaGamma(g, 5.0 / 2.0));

  CHECK_THROWS_AS(EgammaGaussian(0.0, 1.0, 0.0, g), std::domain_error);
  CHECK_THROWS_AS(EgammaGaussian(0.0, 1.0, -1.0, g), std::domain_error);
  const std::vector<double> short_vec = {0.0};
  CHECK_THROWS_AS(EgammaGaussian(short_vec, a, 1.0, g), std::domain_error);
}

TEST_CASE("laplace divergence has an exact zero region") {
  const Gamma g(2.0);
  CHECK(EgammaLaplace(0.4, 0.4, 1.0, g) == 0.0);
  // On the boundary |m1 - m2| = v log gamma the bracket vanishes exactly.
  for (double v : {0.5, 1.0, 2.0}) {
    const double gap = v * std::log(g.value());
    CHECK(EgammaLaplace(0.0, gap, v, g) == 0.0);
    CHECK(EgammaLaplace(0.0, 0.5 * gap, v, g) == 0.0);
    CHECK(EgammaLaplace(0.0, 1.01 * gap, v, g) > 0.0);
  }
  CHECK(std::abs(EgammaLaplace(0.0, 3.0, 1.0, Gamma(kE)) - kOneMinusInvE) <=
        1e-15);
  CHECK_THROWS_AS(EgammaLaplace(0.0, 1.0, 0.0, g), std::domain_error);
  CHECK_THROWS_AS(EgammaLaplace(0.0, 1.0, -2.0, g), std::domain_error);
}

TEST_CASE("quadrature agrees with both closed forms") {
  for (double g : {1.0, 2.0, 5.0}) {
    for (double shift : {0.0, 0.6, 2.0}) {
      const Gamma gamma(g);
      const double gauss =
          EgammaQuadrature(MakeGaussianDensity(0.0, 1.3),
                           MakeGaussianDensity(shift, 1.3), gamma)
              .value;
      CHECK(std::abs(gauss - EgammaGaussian(0.0, shift, 1.3, gamma)) <= 1e-6);
      const double laplace =
          EgammaQuadrature(MakeLaplaceDensity(0.0, 0.7),
                           MakeLaplaceDensity(shift, 0.7), gamma)
              .value;
      CHECK(std::abs(laplace - EgammaLaplace(0.0, shift, 0.7, gamma)) <= 1e-6);
    }
  }
}

TEST_CASE("quadrature of identical densities is zero") {
  const ScalarDensity p = MakeGaussianDensity(0.3, 0.9);
  const QuadratureResult same = EgammaQuadrature(p, p, Gamma(1.0));
  CHECK(std::abs(same.value) <= 1e-8);
  CHECK(EgammaQuadrature(p, p, Gamma(4.0)).value <= 1e-8);
}

TEST_CASE("quadrature locates the kink and reports its window") {
  const QuadratureResult result =
      EgammaQuadrature(MakeGaussianDensity(0.0, 1.0),
                       MakeGaussianDensity(2.0, 1.0), Gamma(kE));
  // p = gamma*q at y = (4 - 2 log gamma) / 4 = 1/2 for gamma = e.
  REQUIRE(result.kinks.size() == 1);
  CHECK(std::abs(result.kinks[0] - 0.5) <= 1e-9);
  CHECK(result.lo <= -8.0);
  CHECK(result.hi >= 10.0);
}

TEST_CASE("quadrature rejects unnormalized densities") {
  ScalarDensity bogus = MakeGaussianDensity(0.0, 1.0);
  const auto pdf = bogus.pdf;
  bogus.pdf = [pdf](double y) { return 0.9 * pdf(y); };
  CHECK_THROWS_AS(
      EgammaQuadrature(bogus, MakeGaussianDensity(0.0, 1.0), Gamma(1.0)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      EgammaQuadrature(MakeGaussianDensity(0.0, 1.0), bogus, Gamma(1.0)),
      std::invalid_argument);
}

TEST_CASE("discrete divergence examples") {
  const Gamma one(1.0);
  const DiscreteDistribution p({0.7, 0.3});
  const DiscreteDistribution q({0.3, 0.7});
  CHECK(std::abs(EgammaDiscrete(p, q, one) - 0.4) <= 1e-15);
  CHECK(EgammaDiscrete(p, p, Gamma(7.0)) == 0.0);

  const DiscreteDistribution at0 = DiscreteDistribution::PointMass(0, 2);
  const DiscreteDistribution at1 = DiscreteDistribution::PointMass(1, 2);
  CHECK(EgammaDiscrete(at0, at1, Gamma(2.0)) == 1.0);

  const std::vector<double> three = {0.2, 0.3, 0.5};
  const std::vector<double> two = {0.5, 0.5};
  CHECK_THROWS_AS(EgammaDiscrete(std::span<const double>(three),
                                 std::span<const double>(two), one),
                  std::domain_error);
}

TEST_CASE("discrete distribution validates its weights") {
  CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution({-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution::PointMass(3, 3), std::invalid_argument);
  CHECK_NOTHROW(DiscreteDistribution({0.25, 0.25, 0.25, 0.25}));
}

TEST_CASE("gamma monotonicity of the divergence on a grid") {
  const DiscreteDistribution p({0.6, 0.3, 0.1});
  const DiscreteDistribution q({0.2, 0.3, 0.5});
  double prev = 2.0;
  for (int i = 0; i <= 30; ++i) {
    const double g = 1.0 + 9.0 * i / 30.0;
    const double value = EgammaDiscrete(p, q, Gamma(g));
    CHECK(value <= prev);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
    prev = value;
  }
}
