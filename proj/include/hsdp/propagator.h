#ifndef HSDP_PROPAGATOR_H_
#define HSDP_PROPAGATOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsdp/accountant.h"

namespace hsdp {

// Executable 1-d loss: the gradient map together with the regularity
// constants it claims and the rectangles the claims are checked on.
struct LossModel {
  std::function<double(double, double)> gradient;  // d/dy loss(y, x)
  LossRegularity declared;
  double x_lo = 0.0;  // data domain
  double x_hi = 0.0;
  double y_lo = 0.0;  // parameter domain
  double y_hi = 0.0;

  // Spot-checks |gradient| <= L, beta-Lipschitz continuity and rho-strong
  // monotonicity of the gradient on a grid over the declared rectangles.
  // Throws std::invalid_argument on the first violated check.
  void ValidateOnGrid(int grid_points = 33) const;
};

// loss(y, x) = curvature/2 * (y - x)^2, with declared constants
// (curvature * W, curvature, curvature) where W bounds |y - x| over the
// given rectangles.
LossModel QuadraticLoss(double curvature, double y_lo, double y_hi,
                        double x_lo, double x_hi);

// Probability vector over uniform cells covering [lo, hi]. The first and
// last cells absorb the mass that the projection pushes onto the interval
// endpoints.
struct GridDensity {
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 0.0;

  double CellCenter(std::size_t i) const;
  double Sum() const;
};

GridDensity UniformGridDensity(double lo, double hi, int cells);

struct Dataset {
  std::vector<double> points;

  // One real number per nonempty line.
  static Dataset FromCsv(const std::string& path);
};

// Writes `cell_center,mass` rows with 17 significant digits.
void WriteDensityCsv(const std::string& path, const GridDensity& density);

// Index (1-based) where the two datasets differ. Returns nullopt for
// identical datasets; throws std::invalid_argument when the sizes differ or
// more than one coordinate differs.
std::optional<int> DifferingIndex(const Dataset& data,
                                  const Dataset& data_prime);

// Gradient-step map y - eta * gradient(y, x); y must lie in the parameter
// domain of the loss.
double PsiMap(const LossModel& loss, double eta, double x, double y);

// Transition matrix of one projected noisy step on a uniform grid over the
// interval domain. Row i is the law of project(psi_x(center_i) + eta * Z):
// interior cells receive exact CDF differences and the boundary cells absorb
// the projected tails, so every row sums to 1 within 1e-12. Requires
// cells >= 16.
DiscreteKernel BuildStepKernel(const LossModel& loss, double eta, double x,
                               const NoiseSpec& noise,
                               const DomainGeometry& geom, int cells);

// Pushes mu0 through the per-record step kernels, returning all n+1
// intermediate laws. Each step renormalizes drift up to 1e-9 and throws
// std::runtime_error beyond that. An empty dataset yields {mu0}.
std::vector<GridDensity> Propagate(const GridDensity& mu0, const Dataset& data,
                                   const PnsgdConfig& cfg,
                                   const LossModel& loss, int cells);

// Monte Carlo execution of the noisy projected pass, returning `trials`
// samples of the final iterate. Y0 is uniform on the interval domain. Trial
// k draws from an independent generator seeded with splitmix64(seed + k), so
// results are byte-identical across runs and trials may be evaluated in any
// order.
std::vector<double> SimulatePnsgd(const PnsgdConfig& cfg, const Dataset& data,
                                  const LossModel& loss, std::uint64_t seed,
                                  int trials);

struct PropagatedPair {
  GridDensity mu_n;
  GridDensity nu_n;
  std::optional<int> differing_index;  // 1-based; nullopt when identical
};

// Propagates both datasets from the same uniform initial law.
PropagatedPair PropagatePair(const PnsgdConfig& cfg, const LossModel& loss,
                             const Dataset& data, const Dataset& data_prime,
                             int cells);

double EmpiricalDeltaFromPair(const PropagatedPair& pair, double epsilon);

// E_{e^eps} between the propagated output laws of two datasets differing in
// at most one coordinate: the quantity the per-record bounds promise to
// dominate.
double EmpiricalDelta(double epsilon, const PnsgdConfig& cfg,
                      const LossModel& loss, const Dataset& data,
                      const Dataset& data_prime, int cells);

}  // namespace hsdp

#endif  // HSDP_PROPAGATOR_H_
