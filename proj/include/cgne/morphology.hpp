#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cgne/grid.hpp"
#include "cgne/trajectory.hpp"

namespace cgne {

/// Morphological descriptors of one finished crystal.
struct MorphologySample {
  double rho = 0.0;
  std::int64_t area = 0;
  std::int64_t boundary_length = 0;

  friend bool operator==(const MorphologySample&, const MorphologySample&) = default;
};

/// Number of attached cells.
std::int64_t area(const HexMask& mask);

/// Number of unordered hex-adjacent pairs with exactly one attached member.
std::int64_t boundary_length(const HexMask& mask);

/// Reconstructs the full crystal from the final frame and measures it.
MorphologySample features(const Trajectory& traj);

/// CSV with header `rho,area,boundary_length`, one row per sample.
void write_samples_csv(std::ostream& os, const std::vector<MorphologySample>& samples);
void write_samples_csv(const std::string& path, const std::vector<MorphologySample>& samples);

/// Parses the CSV written by write_samples_csv. Columns may appear in any
/// order; extra columns are ignored. Throws InvalidArgument on a missing
/// column or malformed row.
std::vector<MorphologySample> read_samples_csv(std::istream& is);
std::vector<MorphologySample> read_samples_csv(const std::string& path);

}  // namespace cgne
