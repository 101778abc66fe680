#include "hsdp/manifest.h"

#include <fstream>
#include <stdexcept>

namespace hsdp {

nlohmann::json ToJson(const PnsgdConfig& cfg) {
  nlohmann::json noise = {
      {"family",
       cfg.noise.family() == NoiseFamily::kLaplace ? "laplace" : "gaussian"},
      {"scale", cfg.noise.scale()},
      {"dim", cfg.noise.dim()},
  };
  nlohmann::json domain;
  if (cfg.geom.kind() == DomainKind::kInterval) {
    domain = {{"kind", "interval"}, {"a", cfg.geom.a()}, {"b", cfg.geom.b()}};
  } else {
    domain = {{"kind", "ball"},
              {"diameter", cfg.geom.diameter()},
              {"dim", cfg.geom.dim()}};
  }
  return nlohmann::json{
      {"eta", cfg.eta},
      {"n", cfg.n},
      {"noise", noise},
      {"domain", domain},
      {"reg",
       {{"L", cfg.reg.lipschitz},
        {"beta", cfg.reg.smoothness},
        {"rho", cfg.reg.strong_convexity}}},
  };
}

void WriteManifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j{
      {"tool", kToolName},
      {"version", kToolVersion},
      {"command", manifest.command},
      {"argv", manifest.argv},
      {"seed", manifest.seed},
      {"config", manifest.config},
      {"options", manifest.options},
      {"outputs", manifest.outputs},
      {"float_format", "17 significant digits"},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace hsdp
