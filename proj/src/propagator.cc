#include "hsdp/propagator.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hsdp {
namespace {

constexpr double kMassDriftTol = 1e-9;
constexpr double kGridCheckSlack = 1e-9;
constexpr int kMinCells = 16;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform on (0, 1), strictly inside both endpoints.
double UniformOpen(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianDraw(std::mt19937_64& rng) {
  const double u1 = UniformOpen(rng);
  const double u2 = UniformOpen(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double LaplaceDraw(std::mt19937_64& rng) {
  const double w = UniformOpen(rng) - 0.5;
  const double sign = w < 0.0 ? -1.0 : 1.0;
  return -sign * std::log(1.0 - 2.0 * std::abs(w));
}

double GaussianCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double LaplaceCdf(double z) {
  if (z < 0.0) return 0.5 * std::exp(z);
  return 1.0 - 0.5 * std::exp(-z);
}

void RequireIntervalConfig(const PnsgdConfig& cfg) {
  cfg.Validate();
  if (cfg.geom.kind() != DomainKind::kInterval || cfg.noise.dim() != 1) {
    throw std::invalid_argument(
        "density propagation requires a 1-dimensional interval domain");
  }
}

void RequireDatasetInDomain(const Dataset& data, const LossModel& loss) {
  for (double x : data.points) {
    if (!std::isfinite(x) || x < loss.x_lo || x > loss.x_hi) {
      throw std::invalid_argument("data point " + std::to_string(x) +
                                  " outside the data domain [" +
                                  std::to_string(loss.x_lo) + ", " +
                                  std::to_string(loss.x_hi) + "]");
    }
  }
}

}  // namespace

void LossModel::ValidateOnGrid(int grid_points) const {
  if (!gradient) throw std::invalid_argument("loss gradient is not set");
  if (grid_points < 2) throw std::invalid_argument("grid needs >= 2 points");
  declared.Validate();
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) {
    throw std::invalid_argument("loss domains must satisfy lo < hi");
  }
  const double l = declared.lipschitz;
  const double beta = declared.smoothness;
  const double rho = declared.strong_convexity;
  auto grid = [grid_points](double lo, double hi, int i) {
    return lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
  };
  for (int xi = 0; xi < grid_points; ++xi) {
    const double x = grid(x_lo, x_hi, xi);
    std::vector<double> g(grid_points);
    for (int yi = 0; yi < grid_points; ++yi) {
      const double y = grid(y_lo, y_hi, yi);
      g[yi] = gradient(y, x);
      if (!(std::abs(g[yi]) <= l + kGridCheckSlack)) {
        throw std::invalid_argument(
            "gradient bound violated: |g(" + std::to_string(y) + ", " +
            std::to_string(x) + ")| = " + std::to_string(std::abs(g[yi])) +
            " > L = " + std::to_string(l));
      }
    }
    for (int a = 0; a < grid_points; ++a) {
      for (int b = a + 1; b < grid_points; ++b) {
        const double dy = grid(y_lo, y_hi, b) - grid(y_lo, y_hi, a);
        const double slope = (g[b] - g[a]) * dy;
        if (!(slope >= rho * dy * dy - kGridCheckSlack)) {
          throw std::invalid_argument(
              "gradient is not rho-strongly monotone at x = " +
              std::to_string(x));
        }
        if (!(slope <= beta * dy * dy + kGridCheckSlack)) {
          throw std::invalid_argument(
              "gradient is not beta-Lipschitz at x = " + std::to_string(x));
        }
      }
    }
  }
}

LossModel QuadraticLoss(double curvature, double y_lo, double y_hi,
                        double x_lo, double x_hi) {
  if (!std::isfinite(curvature) || curvature <= 0.0) {
    throw std::invalid_argument("curvature must be positive");
  }
  if (!(y_lo < y_hi) || !(x_lo < x_hi)) {
    throw std::invalid_argument("loss domains must satisfy lo < hi");
  }
  const double width = std::max(std::abs(y_hi - x_lo), std::abs(x_hi - y_lo));
  LossModel loss;
  loss.gradient = [curvature](double y, double x) { return curvature * (y - x); };
  loss.declared = LossRegularity{curvature * width, curvature, curvature};
  loss.x_lo = x_lo;
  loss.x_hi = x_hi;
  loss.y_lo = y_lo;
  loss.y_hi = y_hi;
  return loss;
}

double GridDensity::CellCenter(std::size_t i) const {
  return lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                  static_cast<double>(weights.size());
}

double GridDensity::Sum() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

GridDensity UniformGridDensity(double lo, double hi, int cells) {
  if (!(lo < hi)) throw std::invalid_argument("grid requires lo < hi");
  if (cells < 1) throw std::invalid_argument("grid needs at least one cell");
  GridDensity d;
  d.lo = lo;
  d.hi = hi;
  d.weights.assign(cells, 1.0 / cells);
  return d;
}

Dataset Dataset::FromCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset csv: " + path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(line, &consumed);
    } catch (const std::exception&) {
      throw std::invalid_argument("dataset csv line " +
                                  std::to_string(line_no) + ": cannot parse '" +
                                  line + "'");
    }
    while (consumed < line.size() &&
           std::isspace(static_cast<unsigned char>(line[consumed]))) {
      ++consumed;
    }
    if (consumed != line.size()) {
      throw std::invalid_argument("dataset csv line " +
                                  std::to_string(line_no) +
                                  ": trailing characters in '" + line + "'");
    }
    data.points.push_back(value);
  }
  return data;
}

void WriteDensityCsv(const std::string& path, const GridDensity& density) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write density csv: " + path);
  out << "cell_center,mass\n";
  char buffer[64];
  auto format = [&buffer](double v) {
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                      std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
  };
  for (std::size_t i = 0; i < density.weights.size(); ++i) {
    out << format(density.CellCenter(i)) << "," << format(density.weights[i])
        << "\n";
  }
}

std::optional<int> DifferingIndex(const Dataset& data,
                                  const Dataset& data_prime) {
  if (data.points.size() != data_prime.points.size()) {
    throw std::invalid_argument("datasets must have equal size");
  }
  std::optional<int> index;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    if (data.points[i] != data_prime.points[i]) {
      if (index) {
        throw std::invalid_argument(
            "datasets differ in more than one coordinate");
      }
      index = static_cast<int>(i) + 1;
    }
  }
  return index;
}

double PsiMap(const LossModel& loss, double eta, double x, double y) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw std::domain_error("eta must be finite and positive");
  }
  if (!(y >= loss.y_lo && y <= loss.y_hi)) {
    throw std::domain_error("y = " + std::to_string(y) +
                            " outside the parameter domain");
  }
  return y - eta * loss.gradient(y, x);
}

DiscreteKernel BuildStepKernel(const LossModel& loss, double eta, double x,
                               const NoiseSpec& noise,
                               const DomainGeometry& geom, int cells) {
  if (geom.kind() != DomainKind::kInterval) {
    throw std::invalid_argument("step kernels require an interval domain");
  }
  if (cells < kMinCells) {
    throw std::invalid_argument("grid must have at least " +
                                std::to_string(kMinCells) + " cells");
  }
  if (noise.dim() != 1) {
    throw std::invalid_argument("step kernels require 1-dimensional noise");
  }
  const bool gaussian = noise.family() == NoiseFamily::kGaussian;
  const double a = geom.a();
  const double b = geom.b();
  const double h = (b - a) / cells;
  const double scale = eta * noise.scale();

  std::vector<std::vector<double>> rows(cells);
  for (int i = 0; i < cells; ++i) {
    const double center = a + (static_cast<double>(i) + 0.5) * h;
    const double mean = PsiMap(loss, eta, x, center);
    std::vector<double>& row = rows[i];
    row.resize(cells);
    // CDF at the interior cell edges; the telescoping differences put the
    // projected tails into the boundary cells exactly.
    double prev = 0.0;
    for (int j = 1; j < cells; ++j) {
      const double edge = a + static_cast<double>(j) * h;
      const double z = (edge - mean) / scale;
      const double cdf = gaussian ? GaussianCdf(z) : LaplaceCdf(z);
      row[j - 1] = j == 1 ? cdf : std::max(cdf - prev, 0.0);
      prev = cdf;
    }
    row[cells - 1] = std::max(1.0 - prev, 0.0);
  }
  return DiscreteKernel(std::move(rows));
}

std::vector<GridDensity> Propagate(const GridDensity& mu0, const Dataset& data,
                                   const PnsgdConfig& cfg,
                                   const LossModel& loss, int cells) {
  RequireIntervalConfig(cfg);
  RequireDatasetInDomain(data, loss);
  if (!data.points.empty() &&
      data.points.size() != static_cast<std::size_t>(cfg.n)) {
    throw std::invalid_argument("dataset size does not match config n");
  }
  if (mu0.weights.size() != static_cast<std::size_t>(cells) ||
      mu0.lo != cfg.geom.a() || mu0.hi != cfg.geom.b()) {
    throw std::invalid_argument("initial density grid does not match config");
  }

  std::vector<GridDensity> laws;
  laws.reserve(data.points.size() + 1);
  laws.push_back(mu0);
  std::vector<double> current = mu0.weights;
  for (double x : data.points) {
    const DiscreteKernel kernel =
        BuildStepKernel(loss, cfg.eta, x, cfg.noise, cfg.geom, cells);
    current = kernel.Apply(current);
    const double mass =
        std::accumulate(current.begin(), current.end(), 0.0);
    if (std::abs(mass - 1.0) > kMassDriftTol) {
      throw std::runtime_error("mass conservation violated: step mass " +
                               std::to_string(mass));
    }
    for (double& w : current) w /= mass;
    GridDensity law;
    law.lo = mu0.lo;
    law.hi = mu0.hi;
    law.weights = current;
    laws.push_back(std::move(law));
  }
  return laws;
}

std::vector<double> SimulatePnsgd(const PnsgdConfig& cfg, const Dataset& data,
                                  const LossModel& loss, std::uint64_t seed,
                                  int trials) {
  RequireIntervalConfig(cfg);
  RequireDatasetInDomain(data, loss);
  if (data.points.size() != static_cast<std::size_t>(cfg.n)) {
    throw std::invalid_argument("dataset size does not match config n");
  }
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  const bool gaussian = cfg.noise.family() == NoiseFamily::kGaussian;
  const double a = cfg.geom.a();
  const double b = cfg.geom.b();
  std::vector<double> samples(trials);
  for (int k = 0; k < trials; ++k) {
    std::mt19937_64 rng(SplitMix64(seed + static_cast<std::uint64_t>(k)));
    double y = a + UniformOpen(rng) * (b - a);
    for (double x : data.points) {
      const double z =
          cfg.noise.scale() * (gaussian ? GaussianDraw(rng) : LaplaceDraw(rng));
      y = std::clamp(y - cfg.eta * (loss.gradient(y, x) + z), a, b);
    }
    samples[k] = y;
  }
  return samples;
}

PropagatedPair PropagatePair(const PnsgdConfig& cfg, const LossModel& loss,
                             const Dataset& data, const Dataset& data_prime,
                             int cells) {
  PropagatedPair pair;
  pair.differing_index = DifferingIndex(data, data_prime);
  const GridDensity mu0 =
      UniformGridDensity(cfg.geom.a(), cfg.geom.b(), cells);
  pair.mu_n = Propagate(mu0, data, cfg, loss, cells).back();
  pair.nu_n = Propagate(mu0, data_prime, cfg, loss, cells).back();
  return pair;
}

double EmpiricalDeltaFromPair(const PropagatedPair& pair, double epsilon) {
  return EgammaDiscrete(pair.mu_n.weights, pair.nu_n.weights,
                        Gamma::FromEpsilon(epsilon));
}

double EmpiricalDelta(double epsilon, const PnsgdConfig& cfg,
                      const LossModel& loss, const Dataset& data,
                      const Dataset& data_prime, int cells) {
  return EmpiricalDeltaFromPair(
      PropagatePair(cfg, loss, data, data_prime, cells), epsilon);
}

}  // namespace hsdp
