#ifndef HSDP_MANIFEST_H_
#define HSDP_MANIFEST_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hsdp/accountant.h"

namespace hsdp {

inline constexpr std::string_view kToolName = "hsdp";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Reproducibility record written next to every output file: re-issuing the
// recorded command reproduces the outputs byte for byte (floats are printed
// with 17 significant digits everywhere).
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  nlohmann::json config;   // resolved configuration, or null
  nlohmann::json options;  // per-command options
  std::vector<std::string> outputs;
};

nlohmann::json ToJson(const PnsgdConfig& cfg);

void WriteManifest(const std::string& path, const RunManifest& manifest);

}  // namespace hsdp

#endif  // HSDP_MANIFEST_H_
