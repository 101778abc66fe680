#include "hsdp/config.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hsdp {
namespace {

const char* const kKnownKeys[] = {
    "eta",         "n",           "noise.family", "noise.scale", "noise.dim",
    "domain.kind", "domain.params", "reg.L",      "reg.beta",    "reg.rho",
};

std::string Trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = Trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos) {
        violations_.push_back("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        continue;
      }
      const std::string key = Trim(trimmed.substr(0, eq));
      const std::string value = Trim(trimmed.substr(eq + 1));
      bool known = false;
      for (const char* k : kKnownKeys) known = known || key == k;
      if (!known) {
        violations_.push_back("unknown key '" + key + "'");
        continue;
      }
      if (values_.count(key) != 0) {
        violations_.push_back("duplicate key '" + key + "'");
        continue;
      }
      values_[key] = value;
    }
  }

  std::optional<std::string> Raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> Required(const std::string& key) {
    auto raw = Raw(key);
    if (!raw) violations_.push_back("missing key '" + key + "'");
    return raw;
  }

  std::optional<double> Number(const std::string& key,
                               const std::string& token) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &consumed);
    } catch (const std::exception&) {
      violations_.push_back(key + ": cannot parse number '" + token + "'");
      return std::nullopt;
    }
    if (consumed != token.size() || !std::isfinite(value)) {
      violations_.push_back(key + ": cannot parse number '" + token + "'");
      return std::nullopt;
    }
    return value;
  }

  std::optional<double> RequiredNumber(const std::string& key) {
    auto raw = Required(key);
    if (!raw) return std::nullopt;
    return Number(key, *raw);
  }

  void AddViolation(std::string message) {
    violations_.push_back(std::move(message));
  }

  std::vector<std::string>& violations() { return violations_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> violations_;
};

[[noreturn]] void ThrowViolations(const std::vector<std::string>& violations) {
  std::string message = "invalid configuration:";
  for (const std::string& v : violations) message += "\n  - " + v;
  throw std::invalid_argument(message);
}

std::vector<std::string> SplitTokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

}  // namespace

PnsgdConfig ParsePnsgdConfigText(const std::string& text) {
  ConfigReader reader(text);

  const std::optional<double> eta = reader.RequiredNumber("eta");
  const std::optional<double> n_raw = reader.RequiredNumber("n");
  const std::optional<double> scale = reader.RequiredNumber("noise.scale");
  const std::optional<double> reg_l = reader.RequiredNumber("reg.L");
  const std::optional<double> reg_beta = reader.RequiredNumber("reg.beta");
  const std::optional<double> reg_rho = reader.RequiredNumber("reg.rho");
  const std::optional<std::string> family = reader.Required("noise.family");
  const std::optional<std::string> kind = reader.Required("domain.kind");
  const std::optional<std::string> params = reader.Required("domain.params");

  int noise_dim = 1;
  if (auto raw = reader.Raw("noise.dim")) {
    if (auto d = reader.Number("noise.dim", *raw)) {
      if (*d < 1 || *d != std::floor(*d)) {
        reader.AddViolation("noise.dim must be a positive integer");
      } else {
        noise_dim = static_cast<int>(*d);
      }
    }
  }

  int n = 0;
  if (n_raw) {
    if (*n_raw < 1 || *n_raw != std::floor(*n_raw)) {
      reader.AddViolation("n must be a positive integer");
    } else {
      n = static_cast<int>(*n_raw);
    }
  }

  bool laplace = false;
  if (family) {
    if (*family == "laplace") {
      laplace = true;
    } else if (*family != "gaussian") {
      reader.AddViolation("noise.family must be 'laplace' or 'gaussian'");
    }
  }
  if (scale && *scale <= 0.0) {
    reader.AddViolation("noise.scale must be positive");
  }
  if (laplace && noise_dim != 1) {
    reader.AddViolation("laplace noise requires noise.dim = 1");
  }

  bool interval = false;
  double geom_p0 = 0.0;
  double geom_p1 = 0.0;
  int ball_dim = 1;
  if (kind && params) {
    const std::vector<std::string> tokens = SplitTokens(*params);
    if (*kind == "interval") {
      interval = true;
      if (tokens.size() != 2) {
        reader.AddViolation("domain.params for an interval must be 'a b'");
      } else {
        const auto a = reader.Number("domain.params", tokens[0]);
        const auto b = reader.Number("domain.params", tokens[1]);
        if (a && b) {
          if (!(*a < *b)) {
            reader.AddViolation("interval domain requires a < b");
          } else {
            geom_p0 = *a;
            geom_p1 = *b;
          }
        }
      }
    } else if (*kind == "ball") {
      if (tokens.size() != 2) {
        reader.AddViolation("domain.params for a ball must be 'diameter dim'");
      } else {
        const auto d = reader.Number("domain.params", tokens[0]);
        const auto dim = reader.Number("domain.params", tokens[1]);
        if (d && dim) {
          if (!(*d > 0.0)) {
            reader.AddViolation("ball domain requires a positive diameter");
          } else if (*dim < 1 || *dim != std::floor(*dim)) {
            reader.AddViolation("ball dimension must be a positive integer");
          } else {
            geom_p0 = *d;
            ball_dim = static_cast<int>(*dim);
          }
        }
      }
    } else {
      reader.AddViolation("domain.kind must be 'interval' or 'ball'");
    }
  }

  if (!reader.violations().empty()) ThrowViolations(reader.violations());

  PnsgdConfig cfg{
      *eta,
      laplace ? NoiseSpec::Laplace(*scale) : NoiseSpec::Gaussian(*scale, noise_dim),
      interval ? DomainGeometry::Interval(geom_p0, geom_p1)
               : DomainGeometry::Ball(geom_p0, ball_dim),
      n,
      LossRegularity{*reg_l, *reg_beta, *reg_rho},
  };
  const std::vector<std::string> cross = cfg.Violations();
  if (!cross.empty()) ThrowViolations(cross);
  return cfg;
}

PnsgdConfig ParsePnsgdConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePnsgdConfigText(buffer.str());
}

}  // namespace hsdp
