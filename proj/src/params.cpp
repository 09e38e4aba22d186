#include "cgne/params.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>

#include "cgne/error.hpp"

namespace cgne {

std::array<double, LcaParams::kCount> LcaParams::to_array() const {
  return {rho, beta_attach, alpha, theta_vapor, kappa, mu, gamma_melt, sigma_noise};
}

LcaParams LcaParams::from_array(std::span<const double> v) {
  if (v.size() != kCount) throw InvalidArgument("expected 8 LCA parameters");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

void LcaParams::validate() const {
  const auto values = to_array();
  for (std::size_t k = 0; k < kCount; ++k) {
    if (!std::isfinite(values[k])) throw InvalidArgument(std::string(kNames[k]) + " must be finite");
  }
  if (rho < 0) throw InvalidArgument("rho must be nonnegative");
  if (beta_attach < 0 || alpha < 0 || theta_vapor < 0)
    throw InvalidArgument("attachment thresholds must be nonnegative");
  if (!(kappa > 0 && kappa <= 1)) throw InvalidArgument("kappa must lie in (0, 1]");
  if (!(mu >= 0 && mu < 1)) throw InvalidArgument("mu must lie in [0, 1)");
  if (!(gamma_melt >= 0 && gamma_melt < 1)) throw InvalidArgument("gamma_melt must lie in [0, 1)");
  if (!(sigma_noise >= 0 && sigma_noise < 1)) throw InvalidArgument("sigma_noise must lie in [0, 1)");
}

std::string to_string(BoundaryMode m) { return m == BoundaryMode::reservoir ? "reservoir" : "sealed"; }

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "reservoir") return BoundaryMode::reservoir;
  if (s == "sealed") return BoundaryMode::sealed;
  throw InvalidArgument("unknown boundary mode '" + s + "' (expected reservoir or sealed)");
}

void RunConfig::validate() const {
  if (side < 8) throw InvalidArgument("side must be at least 8");
  if (snapshot_every < 1) throw InvalidArgument("snapshot_every must be at least 1");
  if (halt_margin < 1 || halt_margin >= side) throw InvalidArgument("halt_margin must lie in [1, side)");
  if (workers < 1) throw InvalidArgument("workers must be at least 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config file " + path);
  return parse_key_values(is);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw InvalidArgument(key + ": not a number: '" + value + "'");
  }
  if (used != value.size()) throw InvalidArgument(key + ": not a number: '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') throw InvalidArgument(key + ": expected a nonnegative integer");
  std::size_t used = 0;
  unsigned long long v;
  try {
    v = std::stoull(value, &used, 0);
  } catch (const std::exception&) {
    throw InvalidArgument(key + ": expected a nonnegative integer, got '" + value + "'");
  }
  if (used != value.size()) throw InvalidArgument(key + ": expected a nonnegative integer, got '" + value + "'");
  return v;
}

void apply_key_values(const KeyValues& kv, LcaParams& p) {
  double* fields[] = {&p.rho, &p.beta_attach, &p.alpha, &p.theta_vapor,
                      &p.kappa, &p.mu, &p.gamma_melt, &p.sigma_noise};
  for (std::size_t k = 0; k < LcaParams::kCount; ++k) {
    if (auto it = kv.find(LcaParams::kNames[k]); it != kv.end()) *fields[k] = parse_double(it->first, it->second);
  }
}

void apply_key_values(const KeyValues& kv, RunConfig& cfg) {
  auto as_int = [](const std::string& k, const std::string& v) {
    const auto u = parse_u64(k, v);
    if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw InvalidArgument(k + ": too large");
    return static_cast<int>(u);
  };
  for (const auto& [k, v] : kv) {
    if (k == "side") cfg.side = as_int(k, v);
    else if (k == "max_steps") cfg.max_steps = parse_u64(k, v);
    else if (k == "snapshot_every") cfg.snapshot_every = static_cast<std::uint32_t>(as_int(k, v));
    else if (k == "halt_margin") cfg.halt_margin = as_int(k, v);
    else if (k == "boundary_mode") cfg.boundary_mode = boundary_mode_from_string(v);
    else if (k == "seed") cfg.seed = parse_u64(k, v);
    else if (k == "wedge_edges") cfg.edges = wedge_edges_from_string(v);
    else if (k == "workers") cfg.workers = as_int(k, v);
  }
}

}  // namespace cgne
