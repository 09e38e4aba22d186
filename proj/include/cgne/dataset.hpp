#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgne/params.hpp"
#include "cgne/trajectory.hpp"

namespace cgne {

/// Trajectory file layout (little-endian), version 1:
///
///   0  magic "CGT1"          4 bytes
///   4  version               u16
///   6  reserved              u16   bit 0 set = rotational wedge edges
///   8  side                  u32
///  12  frame_count           u32
///  16  snapshot_every        u32
///  20  source                u8    0 = lca, 1 = emulator
///  21  padding               3 bytes, zero
///  24  seed                  u64
///  32  n_params              u32   always 8
///  36  padding               u32, zero
///  40  padding to 64 bytes, zero
///  64  n_params f64          rho, beta_attach, alpha, theta_vapor, kappa,
///                            mu, gamma_melt, sigma_noise
///  ..  frame_count frames    ceil(side^2 / 8) bytes each; cells row-major
///                            (index i * side + j), LSB first within a byte,
///                            unused trailing bits zero
inline constexpr std::uint16_t kTrajectoryVersion = 1;
inline constexpr std::size_t kTrajectoryHeaderBytes = 64;

std::size_t trajectory_file_size(int side, std::size_t frame_count);

std::vector<std::uint8_t> encode_trajectory(const Trajectory& t);
/// Throws FormatError, TruncationError or InvariantViolation.
Trajectory decode_trajectory(std::span<const std::uint8_t> bytes);

/// Validates before touching the file; invariant violations abort the write.
void write_trajectory(const Trajectory& t, const std::string& path);
Trajectory read_trajectory(const std::string& path);

/// Keeps frames 0, factor, 2*factor, ... and always the final frame.
Trajectory downsample(const Trajectory& t, std::uint32_t factor);

struct ManifestEntry {
  std::string file;  ///< relative to the manifest's directory
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t frames = 0;
  std::string split;  ///< train, val or test

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ManifestFailure {
  std::size_t index = 0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string error;

  friend bool operator==(const ManifestFailure&, const ManifestFailure&) = default;
};

struct DatasetManifest {
  int format_version = 1;
  std::size_t requested = 0;
  std::uint64_t master_seed = 0;
  double rho_lo = kRhoMin;
  double rho_hi = kRhoMax;
  LcaParams fixed;  ///< rho field unused
  RunConfig run;
  std::vector<ManifestEntry> entries;
  std::vector<ManifestFailure> failures;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

/// Checks that every listed file exists, parses, and agrees with its entry,
/// and that each entry sits in exactly one split. Throws on the first problem.
void verify_manifest(const DatasetManifest& m, const std::string& manifest_dir);

/// train / val / test assignment: splitmix64(seed) mod 100 below 80 is
/// train, below 90 val, otherwise test.
std::string split_for_seed(std::uint64_t seed);

struct GenerateOptions {
  std::size_t count = 1;
  RunConfig run;
  LcaParams fixed;  ///< rho is overwritten per trajectory
  double rho_lo = kRhoMin;
  double rho_hi = kRhoMax;
  std::uint64_t master_seed = 0;
  int workers = 1;
};

/// Per-run rho and seed derived from the master seed:
/// rho_i = lo + (hi - lo) * U(stream 0, i), seed_i = bits(stream 1, i).
double dataset_rho(std::uint64_t master_seed, std::size_t index, double lo, double hi);
std::uint64_t dataset_seed(std::uint64_t master_seed, std::size_t index);

/// Runs count trajectories (concurrently up to workers), writes
/// traj_NNNNN.cgt files and manifest.json into out_dir. Degenerate runs are
/// recorded as failures instead of aborting the batch.
DatasetManifest generate_dataset(const GenerateOptions& opts, const std::string& out_dir);

}  // namespace cgne
