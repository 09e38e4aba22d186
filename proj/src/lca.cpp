#include "cgne/lca.hpp"

#include "cgne/error.hpp"
#include "cgne/parallel.hpp"

namespace cgne {

WedgeTopology::WedgeTopology(int side, WedgeEdges edges) : side_(side), edges_(edges) {
  const auto n = static_cast<std::size_t>(side) * side;
  neighbors_.resize(n);
  weights_.resize(n);
  ring_.resize(n);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const auto cell = static_cast<std::size_t>(i) * side + j;
      weights_[cell] = orbit_size({i, j}, edges);
      ring_[cell] = (i == side - 1 || j == side - 1) ? 1 : 0;
      for (std::size_t k = 0; k < kHexDirections.size(); ++k) {
        const auto f = fold_into_wedge(AxialCoord{i, j} + kHexDirections[k], side, edges);
        neighbors_[cell][k] = f ? static_cast<std::int32_t>(f->i * side + f->j) : kOutside;
      }
      if (weights_[cell] == 0) {
        const auto rep = fold_into_wedge({i, j}, side, edges);
        aliases_.emplace_back(static_cast<std::int32_t>(cell), static_cast<std::int32_t>(rep->i * side + rep->j));
      }
    }
  }
}

LcaEngine::LcaEngine(const LcaParams& params, const RunConfig& cfg)
    : params_(params), cfg_(cfg), topo_((cfg.validate(), cfg.side), cfg.edges), rng_(cfg.seed) {
  params_.validate();
  if (cfg_.workers > 1) pool_ = std::make_unique<WorkerPool>(cfg_.workers);
}

LcaEngine::~LcaEngine() = default;

LcaState LcaEngine::init_state() const {
  const auto n = topo_.cell_count();
  LcaState s;
  s.side = cfg_.side;
  s.attached.assign(n, 0);
  s.boundary_mass.assign(n, 0.0);
  s.crystal_mass.assign(n, 0.0);
  s.diffusive_mass.assign(n, params_.rho);
  s.attached[0] = 1;
  s.crystal_mass[0] = 1.0;
  s.diffusive_mass[0] = 0.0;
  return s;
}

bool LcaEngine::is_boundary(const std::vector<std::uint8_t>& attached, std::size_t cell) const {
  if (attached[cell]) return false;
  for (const auto nb : topo_.neighbors(cell)) {
    if (nb != WedgeTopology::kOutside && attached[static_cast<std::size_t>(nb)]) return true;
  }
  return false;
}

void LcaEngine::sync_aliases(LcaState& s) const {
  for (const auto& [alias, rep] : topo_.aliases()) {
    s.attached[alias] = s.attached[rep];
    s.boundary_mass[alias] = s.boundary_mass[rep];
    s.crystal_mass[alias] = s.crystal_mass[rep];
    s.diffusive_mass[alias] = s.diffusive_mass[rep];
  }
}

namespace {

// One Philox block supplies the noise signs of 128 consecutive cells:
// counter (cell / 128, step), bit cell % 128 of the 4x32-bit output.
class NoiseBits {
 public:
  NoiseBits(const KeyedRng& rng, std::uint64_t step) : rng_(rng), step_(step) {}

  bool get(std::size_t cell) {
    const std::uint64_t blk = cell >> 7;
    if (blk != cached_) {
      words_ = rng_.block(static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
                          static_cast<std::uint32_t>(step_), static_cast<std::uint32_t>(step_ >> 32));
      cached_ = blk;
    }
    return ((words_[(cell >> 5) & 3u] >> (cell & 31u)) & 1u) != 0;
  }

 private:
  const KeyedRng& rng_;
  std::uint64_t step_;
  std::uint64_t cached_ = ~std::uint64_t{0};
  PhiloxCounter words_{};
};

inline double diffuse(const std::array<std::int32_t, 6>& nbs, const std::vector<std::uint8_t>& attached,
                      const std::vector<double>& d, std::size_t cell) {
  const double own = d[cell];
  double sum = own;
  for (const auto nb : nbs) {
    if (nb == WedgeTopology::kOutside || attached[static_cast<std::size_t>(nb)]) {
      sum += own;
    } else {
      sum += d[static_cast<std::size_t>(nb)];
    }
  }
  return sum / 7.0;
}

inline bool attaches(const LcaParams& p, int n_attached, double b, double neighborhood_vapor) {
  if (n_attached >= 4) return true;
  if (n_attached == 3) return b >= 1.0 || (b >= p.alpha && neighborhood_vapor < p.theta_vapor);
  if (n_attached >= 1) return b >= p.beta_attach;
  return false;
}

}  // namespace

bool LcaEngine::noise_draw(std::uint64_t step_index, std::size_t cell) const {
  return NoiseBits(rng_, step_index).get(cell);
}

LcaState LcaEngine::diffusion_step(const LcaState& s) const {
  LcaState out = s;
  const bool reservoir = cfg_.boundary_mode == BoundaryMode::reservoir;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    if (!topo_.active(x) || s.attached[x]) continue;
    double d = diffuse(topo_.neighbors(x), s.attached, s.diffusive_mass, x);
    if (reservoir && topo_.outer_ring(x)) d = params_.rho;
    out.diffusive_mass[x] = d;
  }
  sync_aliases(out);
  return out;
}

LcaState LcaEngine::freezing_step(const LcaState& s) const {
  LcaState out = s;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    if (!topo_.active(x) || !is_boundary(s.attached, x)) continue;
    const double d = s.diffusive_mass[x];
    out.boundary_mass[x] = s.boundary_mass[x] + (1.0 - params_.kappa) * d;
    out.crystal_mass[x] = s.crystal_mass[x] + params_.kappa * d;
    out.diffusive_mass[x] = 0.0;
  }
  sync_aliases(out);
  return out;
}

LcaState LcaEngine::attachment_step(const LcaState& s) const {
  LcaState out = s;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    if (!topo_.active(x) || s.attached[x]) continue;
    int n_attached = 0;
    double vapor = s.diffusive_mass[x];
    for (const auto nb : topo_.neighbors(x)) {
      if (nb == WedgeTopology::kOutside) {
        vapor += s.diffusive_mass[x];
        continue;
      }
      const auto y = static_cast<std::size_t>(nb);
      n_attached += s.attached[y];
      vapor += s.diffusive_mass[y];
    }
    if (attaches(params_, n_attached, s.boundary_mass[x], vapor)) {
      out.attached[x] = 1;
      out.crystal_mass[x] = s.crystal_mass[x] + s.boundary_mass[x];
      out.boundary_mass[x] = 0.0;
    }
  }
  sync_aliases(out);
  return out;
}

LcaState LcaEngine::melting_step(const LcaState& s) const {
  LcaState out = s;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    if (!topo_.active(x) || !is_boundary(s.attached, x)) continue;
    const double b = s.boundary_mass[x], c = s.crystal_mass[x];
    out.diffusive_mass[x] = s.diffusive_mass[x] + params_.mu * b + params_.gamma_melt * c;
    out.boundary_mass[x] = (1.0 - params_.mu) * b;
    out.crystal_mass[x] = (1.0 - params_.gamma_melt) * c;
  }
  sync_aliases(out);
  return out;
}

LcaState LcaEngine::noise_step(const LcaState& s) const {
  LcaState out = s;
  if (params_.sigma_noise == 0.0) return out;
  const double up = 1.0 + params_.sigma_noise, down = 1.0 - params_.sigma_noise;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    if (!topo_.active(x) || s.attached[x]) continue;
    out.diffusive_mass[x] = s.diffusive_mass[x] * (noise_draw(s.step_index, x) ? up : down);
  }
  sync_aliases(out);
  return out;
}

LcaState LcaEngine::step(const LcaState& s) const {
  auto out = noise_step(melting_step(attachment_step(freezing_step(diffusion_step(s)))));
  ++out.step_index;
  return out;
}

void LcaEngine::for_rows(const std::function<void(std::size_t, std::size_t)>& fn) {
  const auto rows = static_cast<std::size_t>(cfg_.side);
  if (pool_) {
    pool_->parallel_for(rows, fn);
  } else {
    fn(0, rows);
  }
}

template <class CellFn>
void LcaEngine::visit_rows(std::size_t row_begin, std::size_t row_end, CellFn&& fn) const {
  const auto side = static_cast<std::size_t>(cfg_.side);
  auto from_table = [&](std::size_t x) {
    const auto& t = topo_.neighbors(x);
    std::array<std::size_t, 6> n;
    for (std::size_t k = 0; k < 6; ++k) n[k] = t[k] == WedgeTopology::kOutside ? x : static_cast<std::size_t>(t[k]);
    return n;
  };
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const std::size_t base = i * side;
    if (i == 0 || i == side - 1) {
      for (std::size_t j = 0; j < side; ++j) {
        if (topo_.active(base + j)) fn(base + j, j, from_table(base + j));
      }
      continue;
    }
    fn(base, 0, from_table(base));
    for (std::size_t j = 1; j + 1 < side; ++j) {
      const std::size_t x = base + j;
      fn(x, j, std::array<std::size_t, 6>{x + side, x - side, x + 1, x - 1, x + side - 1, x - side + 1});
    }
    fn(base + side - 1, side - 1, from_table(base + side - 1));
  }
}

void LcaEngine::advance(LcaState& s) {
  const auto n = topo_.cell_count();
  const auto side = static_cast<std::size_t>(cfg_.side);
  scratch_a_.resize(n);
  scratch_b_.resize(n);
  scratch_c_.resize(n);
  scratch_d_.resize(n);
  scratch_boundary_.resize(n);
  const bool reservoir = cfg_.boundary_mode == BoundaryMode::reservoir;
  const auto& p = params_;
  const std::uint8_t* att = s.attached.data();
  const double* d0 = s.diffusive_mass.data();
  // Out-of-domain neighbors are replaced by the cell itself: the cell is
  // unattached, so it counts as an open neighbor carrying the cell's own value.

  // Diffusion and freezing.
  for_rows([&](std::size_t rb, std::size_t re) {
    for (std::size_t x = rb * side; x < re * side; ++x) {
      scratch_a_[x] = att[x];
      scratch_b_[x] = s.boundary_mass[x];
      scratch_c_[x] = s.crystal_mass[x];
      scratch_d_[x] = d0[x];
      scratch_boundary_[x] = 0;
    }
    visit_rows(rb, re, [&](std::size_t x, std::size_t j, const std::array<std::size_t, 6>& nb) {
      if (att[x]) return;
      const double own = d0[x];
      double sum = own;
      std::uint8_t bnd = 0;
      for (std::size_t k = 0; k < 6; ++k) {
        const std::uint8_t a = att[nb[k]];
        bnd |= a;
        sum += a ? own : d0[nb[k]];
      }
      double d = sum / 7.0;
      if (reservoir && (x >= (side - 1) * side || j == side - 1)) d = p.rho;
      if (bnd) {
        scratch_b_[x] = s.boundary_mass[x] + (1.0 - p.kappa) * d;
        scratch_c_[x] = s.crystal_mass[x] + p.kappa * d;
        d = 0.0;
      }
      scratch_d_[x] = d;
      scratch_boundary_[x] = bnd;
    });
  });

  // Attachment: decisions read the previous attached field only.
  for_rows([&](std::size_t rb, std::size_t re) {
    visit_rows(rb, re, [&](std::size_t x, std::size_t, const std::array<std::size_t, 6>& nb) {
      if (!scratch_boundary_[x]) return;
      int n_attached = 0;
      double vapor = scratch_d_[x];
      for (std::size_t k = 0; k < 6; ++k) {
        n_attached += att[nb[k]];
        vapor += scratch_d_[nb[k]];
      }
      if (attaches(p, n_attached, scratch_b_[x], vapor)) {
        scratch_a_[x] = 1;
        scratch_c_[x] = scratch_c_[x] + scratch_b_[x];
        scratch_b_[x] = 0.0;
      }
    });
  });

  // Melting and noise against the new attached field.
  const double up = 1.0 + p.sigma_noise, down = 1.0 - p.sigma_noise;
  const bool noisy = p.sigma_noise != 0.0;
  const auto step_index = s.step_index;
  for_rows([&](std::size_t rb, std::size_t re) {
    NoiseBits bits(rng_, step_index);
    visit_rows(rb, re, [&](std::size_t x, std::size_t, const std::array<std::size_t, 6>& nb) {
      if (scratch_a_[x]) return;
      std::uint8_t bnd = 0;
      for (std::size_t k = 0; k < 6; ++k) bnd |= scratch_a_[nb[k]];
      if (bnd) {
        const double b = scratch_b_[x], c = scratch_c_[x];
        scratch_d_[x] = scratch_d_[x] + p.mu * b + p.gamma_melt * c;
        scratch_b_[x] = (1.0 - p.mu) * b;
        scratch_c_[x] = (1.0 - p.gamma_melt) * c;
      }
      if (noisy) scratch_d_[x] = scratch_d_[x] * (bits.get(x) ? up : down);
    });
  });

  s.attached.swap(scratch_a_);
  s.boundary_mass.swap(scratch_b_);
  s.crystal_mass.swap(scratch_c_);
  s.diffusive_mass.swap(scratch_d_);
  ++s.step_index;
  sync_aliases(s);
}

bool LcaEngine::reached_margin(const LcaState& s) const {
  const int side = cfg_.side, lo = side - cfg_.halt_margin;
  for (int i = 0; i < side; ++i) {
    const int j0 = i >= lo ? 0 : lo;
    for (int j = j0; j < side; ++j) {
      if (s.attached[static_cast<std::size_t>(i) * side + j]) return true;
    }
  }
  return false;
}

double LcaEngine::wedge_mass(const LcaState& s) const {
  double total = 0.0;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    total += s.boundary_mass[x] + s.crystal_mass[x] + s.diffusive_mass[x];
  }
  return total;
}

double LcaEngine::lattice_mass(const LcaState& s) const {
  double total = 0.0;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) {
    total += topo_.weight(x) * (s.boundary_mass[x] + s.crystal_mass[x] + s.diffusive_mass[x]);
  }
  return total;
}

double LcaEngine::lattice_diffusive_mass(const LcaState& s) const {
  double total = 0.0;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) total += topo_.weight(x) * s.diffusive_mass[x];
  return total;
}

std::uint64_t LcaEngine::cell_updates_per_step() const {
  std::uint64_t active = 0;
  for (std::size_t x = 0; x < topo_.cell_count(); ++x) active += topo_.active(x) ? 1 : 0;
  return active * 5;
}

Trajectory run(const LcaParams& params, const RunConfig& cfg) {
  std::uint64_t steps = 0;
  return run(params, cfg, steps);
}

Trajectory run(const LcaParams& params, const RunConfig& cfg, std::uint64_t& steps_taken) {
  LcaEngine engine(params, cfg);
  LcaState state = engine.init_state();

  Trajectory traj;
  traj.side = cfg.side;
  traj.params = params;
  traj.seed = cfg.seed;
  traj.snapshot_every = cfg.snapshot_every;
  traj.source = TrajectorySource::lca;
  traj.edges = cfg.edges;
  traj.frames.push_back(state.attached_grid());

  steps_taken = 0;
  while (steps_taken < cfg.max_steps) {
    engine.advance(state);
    ++steps_taken;
    const bool halt = engine.reached_margin(state);
    if (halt || steps_taken % cfg.snapshot_every == 0 || steps_taken == cfg.max_steps) {
      traj.frames.push_back(state.attached_grid());
    }
    if (halt) break;
  }

  if (cfg.max_steps > 0 && traj.frames.back().count() <= 1) {
    throw DegenerateRun("no attachment beyond the seed after " + std::to_string(steps_taken) + " steps (rho=" +
                        std::to_string(params.rho) + ", seed=" + std::to_string(cfg.seed) + ")");
  }
  return traj;
}

}  // namespace cgne
