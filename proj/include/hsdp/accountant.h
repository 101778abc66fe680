#ifndef HSDP_ACCOUNTANT_H_
#define HSDP_ACCOUNTANT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsdp/kernels.h"

namespace hsdp {

// Full description of one pass of projected noisy SGD; together with a record
// index this determines every bound below.
struct PnsgdConfig {
  double eta;            // learning rate
  NoiseSpec noise;
  DomainGeometry geom;
  int n;                 // dataset size
  LossRegularity reg;

  // Every violated invariant, in a stable order; empty when valid.
  std::vector<std::string> Violations() const;
  // Throws std::invalid_argument listing all violations.
  void Validate() const;
};

enum class Method { kThm3, kThm4, kThm5, kProp1 };

std::string_view MethodName(Method method);
std::optional<Method> MethodFromName(std::string_view name);

struct DpPoint {
  double epsilon = 0.0;
  double delta = 0.0;
  Method method = Method::kThm4;
};

// initial_div * prod(coefficients), everything required to lie in [0, 1];
// the result is clamped there as well.
double ComposeSdpi(double initial_div, std::span<const double> coefficients);

// Bound on the divergence injected at the differing record itself:
// [1 - exp(eps/2 - L/v)]_+ for Laplace noise (exactly 0 once eps >= 2L/v),
// theta_{e^eps}(2L/sigma) for Gaussian noise.
double InitialDivergenceLaplace(double epsilon, double lipschitz, double v);
double InitialDivergenceGaussian(double epsilon, double lipschitz,
                                 double sigma);

// Per-record delta of PNSGD with Laplace noise on an interval:
// [1 - e^{eps/2 - L/v}]_+ * [1 - e^{eps/2 - M(b-a)/(2 eta v)}]_+^{n-i}.
// Built by composing InitialDivergenceLaplace with the per-step contraction
// factors, so it matches ComposeSdpi bit for bit. Exactly 0 once
// eps >= min{2L/v, M(b-a)/(eta v)}.
double DeltaLaplacePnsgd(double epsilon, const PnsgdConfig& cfg,
                         int record_index);

// Per-record delta of PNSGD with Gaussian noise:
// theta_{e^eps}(2L/sigma) * theta_{e^eps}(M D / (eta sigma))^{n-i}.
double DeltaGaussianPnsgd(double epsilon, const PnsgdConfig& cfg,
                          int record_index);

struct RandomStopDelta {
  double delta = 1.0;
  // The geometric series diverged (contraction factor rounded to 1); delta
  // was forced to 1.
  bool degenerate = false;
};

// Record-independent delta of PNSGD stopped at a uniformly random step:
// (1/n) * theta_{e^eps}(2L/sigma) * (1 - theta_{e^eps}(M D/(eta sigma)))^{-1},
// clamped to [0, 1]. Gaussian noise only.
RandomStopDelta DeltaRandomStop(double epsilon, const PnsgdConfig& cfg);

// Order constant of the Renyi-divergence guarantee used by the baseline:
// 2 L^2 M^{n-i+1} / ((n-i) sigma^2) for i < n and 2 L^2 / sigma^2 for i = n.
double RdpKappa(const PnsgdConfig& cfg, int record_index);

// Baseline delta obtained by converting the Renyi guarantee:
// exp(-(eps - kappa)^2 / (4 kappa)) for eps > kappa and 1 otherwise (every
// mechanism is (eps, 1)-DP, which keeps comparison curves total).
double DeltaRdpBaseline(double epsilon, const PnsgdConfig& cfg,
                        int record_index);

// Independent oracle for DeltaRdpBaseline: minimizes
// exp(-(alpha - 1)(eps - kappa * alpha)) over alpha > 1 by iteratively
// refined grid search. Requires eps > kappa.
double RdpDeltaGridInfimum(double epsilon, double kappa);

// Dispatches to the delta evaluator selected by `method` (the record index is
// ignored for Method::kThm5).
double EvaluateDelta(Method method, double epsilon, const PnsgdConfig& cfg,
                     int record_index);

// Same evaluation packaged as a typed point.
DpPoint EvaluatePoint(Method method, double epsilon, const PnsgdConfig& cfg,
                      int record_index);

// Smallest epsilon (within 1e-9, conservative from above) whose delta does
// not exceed delta_target, found by bracketing and bisection over the
// monotone delta map. Returns 0 when delta(0) <= delta_target already.
double EpsilonForDelta(double delta_target, const PnsgdConfig& cfg,
                       int record_index, Method method);

struct CurvePoint {
  double epsilon = 0.0;
  double delta_thm = 0.0;
  std::optional<double> delta_baseline;  // set for Method::kThm4 only
};

// Evaluates the selected bound over a strictly increasing epsilon grid; for
// Method::kThm4 the baseline column carries DeltaRdpBaseline.
std::vector<CurvePoint> ComputeCurve(const PnsgdConfig& cfg, int record_index,
                                     std::span<const double> eps_grid,
                                     Method method);

}  // namespace hsdp

#endif  // HSDP_ACCOUNTANT_H_
