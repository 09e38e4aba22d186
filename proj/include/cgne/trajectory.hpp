#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgne/grid.hpp"
#include "cgne/params.hpp"

namespace cgne {

enum class TrajectorySource : std::uint8_t { lca = 0, emulator = 1 };

std::string to_string(TrajectorySource s);

/// Sequence of binary wedge frames x_0..x_T with the parameters that
/// produced them. Frames are spaced snapshot_every raw steps apart, except
/// that the last frame is always the final state.
struct Trajectory {
  int side = 0;
  std::vector<WedgeGrid> frames;
  LcaParams params;
  std::uint64_t seed = 0;
  std::uint32_t snapshot_every = 1;
  TrajectorySource source = TrajectorySource::lca;
  WedgeEdges edges = WedgeEdges::mirror;

  /// Throws InvariantViolation unless frame 0 is exactly the seed cell and
  /// every frame contains the previous one.
  void validate() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace cgne
