#ifndef HSDP_CONFIG_H_
#define HSDP_CONFIG_H_

#include <string>

#include "hsdp/accountant.h"

namespace hsdp {

// Parses a key-value configuration file into a validated PnsgdConfig.
//
// Recognized keys (one `key = value` pair per line, '#' starts a comment):
//   eta           learning rate
//   n             dataset size
//   noise.family  laplace | gaussian
//   noise.scale   laplace scale v or gaussian sigma
//   noise.dim     noise dimension (optional, default 1)
//   domain.kind   interval | ball
//   domain.params "a b" for interval, "diameter dim" for ball
//   reg.L         Lipschitz constant of the loss
//   reg.beta      Lipschitz constant of the gradient
//   reg.rho       strong-convexity modulus
//
// Throws std::invalid_argument listing every violated invariant.
PnsgdConfig ParsePnsgdConfig(const std::string& path);
PnsgdConfig ParsePnsgdConfigText(const std::string& text);

}  // namespace hsdp

#endif  // HSDP_CONFIG_H_
