#include "hsdp/kernels.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hsdp {
namespace {

constexpr double kRatioDenominatorFloor = 1e-12;

void RequirePositiveFinite(double x, const char* what) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error(std::string(what) + " must be finite and positive");
  }
}

void RequireUnitRange(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    throw std::domain_error(std::string(what) + " must lie in [0, 1]");
  }
}

double ParseCsvNumber(const std::string& token, std::size_t line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument("kernel csv line " + std::to_string(line_no) +
                                ": cannot parse '" + token + "'");
  }
  for (std::size_t i = consumed; i < token.size(); ++i) {
    if (!std::isspace(static_cast<unsigned char>(token[i]))) {
      throw std::invalid_argument("kernel csv line " + std::to_string(line_no) +
                                  ": trailing characters in '" + token + "'");
    }
  }
  return value;
}

}  // namespace

void LossRegularity::Validate() const {
  if (!std::isfinite(lipschitz) || lipschitz <= 0.0) {
    throw std::invalid_argument("loss Lipschitz constant must be positive");
  }
  if (!std::isfinite(smoothness) || smoothness <= 0.0) {
    throw std::invalid_argument("loss smoothness constant must be positive");
  }
  if (!std::isfinite(strong_convexity) || strong_convexity < 0.0) {
    throw std::invalid_argument("strong convexity must be >= 0 and finite");
  }
}

NoiseSpec::NoiseSpec(NoiseFamily family, double scale, int dim)
    : family_(family), scale_(scale), dim_(dim) {}

NoiseSpec NoiseSpec::Laplace(double v) {
  RequirePositiveFinite(v, "laplace scale");
  return NoiseSpec(NoiseFamily::kLaplace, v, 1);
}

NoiseSpec NoiseSpec::Gaussian(double sigma, int dim) {
  RequirePositiveFinite(sigma, "gaussian sigma");
  if (dim < 1) throw std::domain_error("noise dimension must be >= 1");
  return NoiseSpec(NoiseFamily::kGaussian, sigma, dim);
}

DomainGeometry::DomainGeometry(DomainKind kind, double a, double b,
                               double diameter, int dim)
    : kind_(kind), a_(a), b_(b), diameter_(diameter), dim_(dim) {}

DomainGeometry DomainGeometry::Interval(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw std::domain_error("interval requires finite a < b");
  }
  return DomainGeometry(DomainKind::kInterval, a, b, b - a, 1);
}

DomainGeometry DomainGeometry::Ball(double diameter, int dim) {
  RequirePositiveFinite(diameter, "ball diameter");
  if (dim < 1) throw std::domain_error("ball dimension must be >= 1");
  return DomainGeometry(DomainKind::kBall, 0.0, 0.0, diameter, dim);
}

double DomainGeometry::a() const {
  if (kind_ != DomainKind::kInterval) {
    throw std::domain_error("endpoint a() is defined for interval domains only");
  }
  return a_;
}

double DomainGeometry::b() const {
  if (kind_ != DomainKind::kInterval) {
    throw std::domain_error("endpoint b() is defined for interval domains only");
  }
  return b_;
}

DiscreteKernel::DiscreteKernel(std::vector<std::vector<double>> rows) {
  size_ = rows.size();
  if (size_ == 0) throw std::invalid_argument("kernel must have rows");
  flat_.reserve(size_ * size_);
  for (std::size_t i = 0; i < size_; ++i) {
    if (rows[i].size() != size_) {
      throw std::invalid_argument("kernel row " + std::to_string(i) +
                                  " has length " +
                                  std::to_string(rows[i].size()) +
                                  ", expected " + std::to_string(size_));
    }
    double sum = 0.0;
    for (double w : rows[i]) {
      if (!std::isfinite(w) || w < 0.0) {
        throw std::invalid_argument("kernel entries must be finite and >= 0");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("kernel row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) +
                                  ", expected 1 within 1e-12");
    }
    flat_.insert(flat_.end(), rows[i].begin(), rows[i].end());
  }
}

DiscreteKernel DiscreteKernel::FromCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open kernel csv: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      row.push_back(ParseCsvNumber(token, line_no));
    }
    rows.push_back(std::move(row));
  }
  return DiscreteKernel(std::move(rows));
}

std::span<const double> DiscreteKernel::row(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("kernel row index out of range");
  return {flat_.data() + i * size_, size_};
}

std::vector<double> DiscreteKernel::Apply(std::span<const double> mu) const {
  if (mu.size() != size_) {
    throw std::domain_error("input distribution length does not match kernel");
  }
  std::vector<double> out(size_, 0.0);
  for (std::size_t i = 0; i < size_; ++i) {
    const double m = mu[i];
    if (m == 0.0) continue;
    const double* row_i = flat_.data() + i * size_;
    for (std::size_t j = 0; j < size_; ++j) out[j] += m * row_i[j];
  }
  return out;
}

double LipschitzM(double eta, const LossRegularity& reg) {
  reg.Validate();
  RequirePositiveFinite(eta, "eta");
  const double beta = reg.smoothness;
  const double rho = reg.strong_convexity;
  if (!(eta < 2.0 / (beta + rho))) {
    throw std::invalid_argument(
        "eta must satisfy eta < 2/(beta + rho); got eta=" +
        std::to_string(eta) + " with beta=" + std::to_string(beta) +
        ", rho=" + std::to_string(rho));
  }
  if (rho == 0.0) return 1.0;
  const double radicand = 1.0 - 2.0 * eta * beta * rho / (beta + rho);
  return std::sqrt(std::max(radicand, 0.0));
}

double ContractionGaussianProjected(const Gamma& gamma, double m_lipschitz,
                                    const DomainGeometry& geom, double eta,
                                    double sigma) {
  RequireUnitRange(m_lipschitz, "lipschitz factor M");
  RequirePositiveFinite(eta, "eta");
  RequirePositiveFinite(sigma, "sigma");
  return ThetaGamma(gamma, m_lipschitz * geom.diameter() / (eta * sigma));
}

double ContractionLaplaceProjected(double epsilon, double m_lipschitz,
                                   double a, double b, double eta, double v) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::domain_error("epsilon must be finite and >= 0");
  }
  RequireUnitRange(m_lipschitz, "lipschitz factor M");
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw std::domain_error("interval requires finite a < b");
  }
  RequirePositiveFinite(eta, "eta");
  RequirePositiveFinite(v, "laplace scale");
  if (epsilon >= m_lipschitz * (b - a) / (eta * v)) return 0.0;
  const double value =
      1.0 - std::exp(0.5 * epsilon - m_lipschitz * (b - a) / (2.0 * eta * v));
  return std::clamp(value, 0.0, 1.0);
}

double ContractionDiscrete(const DiscreteKernel& kernel, const Gamma& gamma) {
  const std::size_t s = kernel.num_states();
  double best = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      best = std::max(best, EgammaDiscrete(kernel.row(i), kernel.row(j), gamma));
    }
  }
  return best;
}

double ContractionBruteforceRatio(const DiscreteKernel& kernel,
                                  const Gamma& gamma, int trials,
                                  std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const std::size_t s = kernel.num_states();

  double best = 0.0;
  auto consider = [&](std::span<const double> mu, std::span<const double> nu) {
    const double denominator = EgammaDiscrete(mu, nu, gamma);
    if (denominator <= kRatioDenominatorFloor) return;
    const double numerator =
        EgammaDiscrete(kernel.Apply(mu), kernel.Apply(nu), gamma);
    best = std::max(best, numerator / denominator);
  };

  // Point-mass pairs: these are the witnesses that attain the supremum.
  std::vector<double> mass1(s, 0.0);
  std::vector<double> mass2(s, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (i == j) continue;
      mass1[i] = 1.0;
      mass2[j] = 1.0;
      consider(mass1, mass2);
      mass1[i] = 0.0;
      mass2[j] = 0.0;
    }
  }

  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const std::vector<double> mu = SampleSimplex(s, rng);
    const std::vector<double> nu = SampleSimplex(s, rng);
    consider(mu, nu);
  }
  return best;
}

std::vector<double> SampleSimplex(std::size_t size, std::mt19937_64& rng) {
  if (size == 0) throw std::invalid_argument("simplex dimension must be >= 1");
  std::vector<double> w(size);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    // Uniform on (0, 1), strictly inside so the logarithm is finite.
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    w[i] = -std::log(u);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace hsdp
