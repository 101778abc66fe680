#ifndef HSDP_VERIFY_H_
#define HSDP_VERIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsdp/kernels.h"

namespace hsdp {

struct CheckResult {
  std::string name;
  bool pass = false;
  // Distance to the failure boundary: positive margins are headroom,
  // negative margins quantify the violation.
  double margin = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool AllPass() const;
};

// Property suites driving the built-in oracles against the closed forms.
// Each check carries its measured margin so the report is auditable.
VerifyReport VerifyDivergences();
VerifyReport VerifyContraction(std::uint64_t seed,
                               const std::optional<DiscreteKernel>& kernel);
VerifyReport VerifyAccountant(std::uint64_t seed);
VerifyReport VerifyPropagator(std::uint64_t seed);

}  // namespace hsdp

#endif  // HSDP_VERIFY_H_
