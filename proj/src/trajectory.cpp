#include "cgne/trajectory.hpp"

#include "cgne/error.hpp"

namespace cgne {

std::string to_string(TrajectorySource s) { return s == TrajectorySource::lca ? "lca" : "emulator"; }

void Trajectory::validate() const {
  if (side <= 0) throw InvariantViolation("trajectory side must be positive");
  if (frames.empty()) throw InvariantViolation("trajectory has no frames");
  if (snapshot_every < 1) throw InvariantViolation("snapshot_every must be at least 1");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].side() != side) {
      throw InvariantViolation("frame " + std::to_string(t) + " has the wrong side");
    }
  }
  const auto& first = frames.front();
  if (!first.at(0, 0) || first.count() != 1) {
    throw InvariantViolation("frame 0 must contain exactly the seed cell");
  }
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (!frames[t - 1].subset_of(frames[t])) {
      throw InvariantViolation("frame " + std::to_string(t) + " drops attached cells of frame " +
                               std::to_string(t - 1));
    }
  }
}

}  // namespace cgne
