#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "cgne/grid.hpp"

namespace cgne {

/// Reference range for the vapor saturation used in dataset generation.
inline constexpr double kRhoMin = 0.35;
inline constexpr double kRhoMax = 0.65;

inline bool rho_in_reference_range(double rho) { return rho >= kRhoMin && rho <= kRhoMax; }

/// Environmental parameters of the snow-crystal automaton plus the noise
/// amplitude. Serialized in declaration order.
struct LcaParams {
  static constexpr std::size_t kCount = 8;
  static constexpr std::array<const char*, kCount> kNames{
      "rho", "beta_attach", "alpha", "theta_vapor", "kappa", "mu", "gamma_melt", "sigma_noise"};

  double rho = 0.5;
  double beta_attach = 0.0;
  double alpha = 0.0;
  double theta_vapor = 0.0;
  double kappa = 0.0;
  double mu = 0.0;
  double gamma_melt = 0.0;
  double sigma_noise = 0.0;

  std::array<double, kCount> to_array() const;
  static LcaParams from_array(std::span<const double> values);

  /// Throws InvalidArgument unless every field is finite, rho, beta, alpha and
  /// theta are nonnegative, kappa is in (0, 1], mu and gamma_melt are in [0, 1),
  /// and sigma_noise is in [0, 1).
  void validate() const;

  friend bool operator==(const LcaParams&, const LcaParams&) = default;
};

/// Far-edge treatment of the diffusive field.
enum class BoundaryMode : std::uint8_t {
  reservoir,  ///< outermost ring held at rho (ambient vapor supply)
  sealed,     ///< reflecting wall; total mass is conserved
};

std::string to_string(BoundaryMode m);
BoundaryMode boundary_mode_from_string(const std::string& s);

struct RunConfig {
  int side = 128;
  std::uint64_t max_steps = 20000;
  std::uint32_t snapshot_every = 50;
  int halt_margin = 4;
  BoundaryMode boundary_mode = BoundaryMode::reservoir;
  std::uint64_t seed = 0;
  WedgeEdges edges = WedgeEdges::mirror;
  /// Threads used inside a single run. Output never depends on it.
  int workers = 1;

  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& is);
KeyValues read_key_values(const std::string& path);

/// Overwrites the fields named in kv. Unknown keys are left for the caller.
void apply_key_values(const KeyValues& kv, LcaParams& params);
void apply_key_values(const KeyValues& kv, RunConfig& cfg);

double parse_double(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);

}  // namespace cgne
