#pragma once

#include <array>
#include <functional>
#include <cstdint>
#include <memory>
#include <vector>

#include "cgne/grid.hpp"
#include "cgne/params.hpp"
#include "cgne/rng.hpp"
#include "cgne/trajectory.hpp"

namespace cgne {

class WorkerPool;

/// Per-cell automaton state on the wedge, indexed like WedgeGrid.
struct LcaState {
  int side = 0;
  std::vector<std::uint8_t> attached;
  std::vector<double> boundary_mass;
  std::vector<double> crystal_mass;
  std::vector<double> diffusive_mass;
  std::uint64_t step_index = 0;

  WedgeGrid attached_grid() const { return WedgeGrid(side, attached); }
  friend bool operator==(const LcaState&, const LcaState&) = default;
};

/// Wedge topology with every neighbor reference already folded through the
/// edge symmetry. kOutside marks neighbors beyond the far edges.
class WedgeTopology {
 public:
  static constexpr std::int32_t kOutside = -1;

  WedgeTopology(int side, WedgeEdges edges);

  int side() const { return side_; }
  WedgeEdges edges() const { return edges_; }
  std::size_t cell_count() const { return weights_.size(); }

  const std::array<std::int32_t, 6>& neighbors(std::size_t cell) const { return neighbors_[cell]; }
  /// Full-lattice multiplicity of a wedge cell; 0 for rotational aliases.
  int weight(std::size_t cell) const { return weights_[cell]; }
  bool active(std::size_t cell) const { return weights_[cell] != 0; }
  bool outer_ring(std::size_t cell) const { return ring_[cell] != 0; }
  /// (alias, representative) pairs, empty for mirror edges.
  const std::vector<std::pair<std::int32_t, std::int32_t>>& aliases() const { return aliases_; }

 private:
  int side_;
  WedgeEdges edges_;
  std::vector<std::array<std::int32_t, 6>> neighbors_;
  std::vector<int> weights_;
  std::vector<std::uint8_t> ring_;
  std::vector<std::pair<std::int32_t, std::int32_t>> aliases_;
};

/// The stochastic Gravner-Griffeath snow-crystal automaton on a wedge.
///
/// One raw step applies, in order: diffusion, freezing, attachment, melting
/// and noise. Each sub-step reads only the fields committed by the previous
/// one, so cells can be updated in any order or on any number of threads
/// without changing a single bit of the result.
///
/// Floating-point contract (shared with the scalar reference in the tests):
///   diffusion   d' = (d + d_E + d_W + d_N + d_S + d_NE + d_SW) / 7, where an
///               attached or out-of-domain neighbor contributes d
///   freezing    b' = b + (1 - kappa) * d,  c' = c + kappa * d,  d' = 0
///   attachment  c' = c + b,  b' = 0
///   melting     d' = d + mu * b + gamma * c,  b' = (1 - mu) * b,  c' = (1 - gamma) * c
///   noise       d' = d * (1 + sigma) or d * (1 - sigma)
class LcaEngine {
 public:
  LcaEngine(const LcaParams& params, const RunConfig& cfg);
  ~LcaEngine();
  LcaEngine(const LcaEngine&) = delete;
  LcaEngine& operator=(const LcaEngine&) = delete;

  const LcaParams& params() const { return params_; }
  const RunConfig& config() const { return cfg_; }
  const WedgeTopology& topology() const { return topo_; }

  LcaState init_state() const;

  LcaState diffusion_step(const LcaState& s) const;
  LcaState freezing_step(const LcaState& s) const;
  LcaState attachment_step(const LcaState& s) const;
  LcaState melting_step(const LcaState& s) const;
  LcaState noise_step(const LcaState& s) const;

  /// All five sub-steps and the step counter increment.
  LcaState step(const LcaState& s) const;
  /// Same result as step(), fused into three passes and updated in place.
  void advance(LcaState& s);

  /// Sign of the noise multiplier for a cell at a raw step: true for
  /// (1 + sigma). Bit (cell mod 128) of the Philox block keyed by the run seed
  /// with counter (cell / 128, step).
  bool noise_draw(std::uint64_t step_index, std::size_t cell) const;

  /// Attached cell within halt_margin of a far edge.
  bool reached_margin(const LcaState& s) const;

  /// Plain sum of b + c + d over the stored wedge cells.
  double wedge_mass(const LcaState& s) const;
  /// Sum of b + c + d over the full lattice (wedge cells weighted by their
  /// orbit size). Conserved exactly by sealed, noise-free dynamics.
  double lattice_mass(const LcaState& s) const;
  double lattice_diffusive_mass(const LcaState& s) const;

  /// Number of cell updates performed by one raw step (active cells times
  /// sub-steps). Independent of timing and thread count.
  std::uint64_t cell_updates_per_step() const;

 private:
  bool is_boundary(const std::vector<std::uint8_t>& attached, std::size_t cell) const;
  void sync_aliases(LcaState& s) const;
  void for_rows(const std::function<void(std::size_t, std::size_t)>& fn);
  template <class CellFn>
  void visit_rows(std::size_t row_begin, std::size_t row_end, CellFn&& fn) const;

  LcaParams params_;
  RunConfig cfg_;
  WedgeTopology topo_;
  KeyedRng rng_;
  std::unique_ptr<WorkerPool> pool_;
  std::vector<double> scratch_b_, scratch_c_, scratch_d_;
  std::vector<std::uint8_t> scratch_a_, scratch_boundary_;
};

/// Runs the automaton from the seed until an attached cell comes within
/// halt_margin of a far edge or max_steps raw steps have run. Records the
/// attached field at step 0, every snapshot_every steps, and at the end.
///
/// Throws DegenerateRun when max_steps > 0 and nothing attached beyond the
/// seed.
Trajectory run(const LcaParams& params, const RunConfig& cfg);

/// Same as run() but also reports the number of raw steps taken.
Trajectory run(const LcaParams& params, const RunConfig& cfg, std::uint64_t& steps_taken);

}  // namespace cgne
