#pragma once

// Test-only reference implementations. Nothing here shares code paths with
// the engine beyond the Philox primitive: folding uses explicit reflection /
// rotation formulas instead of the symmetry-group tables, and every sub-step
// is a plain loop over a 2D array.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cgne/grid.hpp"
#include "cgne/params.hpp"
#include "cgne/rng.hpp"

namespace reference {

using Coord = std::pair<int, int>;

inline bool canonical(int i, int j, cgne::WedgeEdges edges) {
  if (edges == cgne::WedgeEdges::mirror) return i >= 0 && j >= 0;
  return (i == 0 && j == 0) || (i >= 1 && j >= 0);
}

/// Representative of (i, j) in the canonical sector, by repeated reflection
/// (mirror) or 60-degree rotation (rotational).
inline Coord canonicalize(int i, int j, cgne::WedgeEdges edges) {
  for (int guard = 0; guard < 16 && !canonical(i, j, edges); ++guard) {
    if (edges == cgne::WedgeEdges::mirror) {
      if (j < 0) {
        std::tie(i, j) = std::pair{i + j, -j};  // reflect across the i axis
      } else {
        std::tie(i, j) = std::pair{-i, i + j};  // reflect across the j axis
      }
    } else {
      std::tie(i, j) = std::pair{-j, i + j};  // rotate by 60 degrees
    }
  }
  return {i, j};
}

inline std::optional<Coord> wedge_lookup(int i, int j, int side, cgne::WedgeEdges edges) {
  auto [fi, fj] = canonicalize(i, j, edges);
  if (fi >= side || fj >= side) return std::nullopt;
  return Coord{fi, fj};
}

struct State {
  int side = 0;
  std::vector<std::vector<int>> a;
  std::vector<std::vector<double>> b, c, d;
  std::uint64_t step = 0;
};

class ScalarLca {
 public:
  ScalarLca(cgne::LcaParams p, int side, cgne::BoundaryMode mode, cgne::WedgeEdges edges, std::uint64_t seed)
      : p_(p), side_(side), mode_(mode), edges_(edges), seed_(seed) {}

  State init() const {
    State s;
    s.side = side_;
    s.a.assign(side_, std::vector<int>(side_, 0));
    s.b.assign(side_, std::vector<double>(side_, 0.0));
    s.c.assign(side_, std::vector<double>(side_, 0.0));
    s.d.assign(side_, std::vector<double>(side_, p_.rho));
    s.a[0][0] = 1;
    s.c[0][0] = 1.0;
    s.d[0][0] = 0.0;
    return s;
  }

  bool active(int i, int j) const { return canonical(i, j, edges_); }

  // Neighbor in the fixed order E, W, N, S, NE, SW.
  std::optional<Coord> neighbor(int i, int j, int k) const {
    static constexpr int di[6] = {1, -1, 0, 0, 1, -1};
    static constexpr int dj[6] = {0, 0, 1, -1, -1, 1};
    return wedge_lookup(i + di[k], j + dj[k], side_, edges_);
  }

  bool boundary(const State& s, int i, int j) const {
    if (s.a[i][j]) return false;
    for (int k = 0; k < 6; ++k) {
      auto n = neighbor(i, j, k);
      if (n && s.a[n->first][n->second]) return true;
    }
    return false;
  }

  void diffusion(State& s) const {
    State old = s;
    for (int i = 0; i < side_; ++i) {
      for (int j = 0; j < side_; ++j) {
        if (!active(i, j) || old.a[i][j]) continue;
        double sum = old.d[i][j];
        for (int k = 0; k < 6; ++k) {
          auto n = neighbor(i, j, k);
          if (!n || old.a[n->first][n->second]) {
            sum += old.d[i][j];
          } else {
            sum += old.d[n->first][n->second];
          }
        }
        double v = sum / 7.0;
        if (mode_ == cgne::BoundaryMode::reservoir && (i == side_ - 1 || j == side_ - 1)) v = p_.rho;
        s.d[i][j] = v;
      }
    }
  }

  void freezing(State& s) const {
    State old = s;
    for (int i = 0; i < side_; ++i) {
      for (int j = 0; j < side_; ++j) {
        if (!active(i, j) || !boundary(old, i, j)) continue;
        const double d = old.d[i][j];
        s.b[i][j] = old.b[i][j] + (1.0 - p_.kappa) * d;
        s.c[i][j] = old.c[i][j] + p_.kappa * d;
        s.d[i][j] = 0.0;
      }
    }
  }

  void attachment(State& s) const {
    State old = s;
    for (int i = 0; i < side_; ++i) {
      for (int j = 0; j < side_; ++j) {
        if (!active(i, j) || old.a[i][j]) continue;
        int n_att = 0;
        double vapor = old.d[i][j];
        for (int k = 0; k < 6; ++k) {
          auto n = neighbor(i, j, k);
          if (!n) {
            vapor += old.d[i][j];
            continue;
          }
          n_att += old.a[n->first][n->second];
          vapor += old.d[n->first][n->second];
        }
        const double b = old.b[i][j];
        bool attach = false;
        if (n_att == 1 || n_att == 2) attach = b >= p_.beta_attach;
        if (n_att == 3) attach = b >= 1.0 || (b >= p_.alpha && vapor < p_.theta_vapor);
        if (n_att >= 4) attach = true;
        if (attach) {
          s.a[i][j] = 1;
          s.c[i][j] = old.c[i][j] + old.b[i][j];
          s.b[i][j] = 0.0;
        }
      }
    }
  }

  void melting(State& s) const {
    State old = s;
    for (int i = 0; i < side_; ++i) {
      for (int j = 0; j < side_; ++j) {
        if (!active(i, j) || !boundary(old, i, j)) continue;
        const double b = old.b[i][j], c = old.c[i][j];
        s.d[i][j] = old.d[i][j] + p_.mu * b + p_.gamma_melt * c;
        s.b[i][j] = (1.0 - p_.mu) * b;
        s.c[i][j] = (1.0 - p_.gamma_melt) * c;
      }
    }
  }

  // Sign bit: bit (cell % 128) of Philox(key = seed, counter = (cell / 128, step)).
  bool noise_up(std::uint64_t step, std::uint64_t cell) const {
    const std::uint64_t blk = cell / 128;
    const auto words = cgne::philox4x32(
        {static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32), static_cast<std::uint32_t>(step),
         static_cast<std::uint32_t>(step >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const auto bit = cell % 128;
    return (words[bit / 32] >> (bit % 32)) & 1u;
  }

  void noise(State& s) const {
    if (p_.sigma_noise == 0.0) return;
    for (int i = 0; i < side_; ++i) {
      for (int j = 0; j < side_; ++j) {
        if (!active(i, j) || s.a[i][j]) continue;
        const bool up = noise_up(s.step, static_cast<std::uint64_t>(i) * side_ + j);
        s.d[i][j] = s.d[i][j] * (up ? 1.0 + p_.sigma_noise : 1.0 - p_.sigma_noise);
      }
    }
  }

  // Rotational aliases (0, k) mirror their representative (k, 0).
  void sync(State& s) const {
    if (edges_ != cgne::WedgeEdges::rotational) return;
    for (int k = 1; k < side_; ++k) {
      s.a[0][k] = s.a[k][0];
      s.b[0][k] = s.b[k][0];
      s.c[0][k] = s.c[k][0];
      s.d[0][k] = s.d[k][0];
    }
  }

  void step(State& s) const {
    diffusion(s);
    freezing(s);
    attachment(s);
    melting(s);
    noise(s);
    ++s.step;
    sync(s);
  }

 private:
  cgne::LcaParams p_;
  int side_;
  cgne::BoundaryMode mode_;
  cgne::WedgeEdges edges_;
  std::uint64_t seed_;
};

/// Noise-free automaton on the whole lattice, over the union of the
/// symmetric images of the side x side wedge. Used to check that wedge
/// simulation plus reconstruction matches an unfolded simulation.
class FullLatticeLca {
 public:
  FullLatticeLca(cgne::LcaParams p, int side, cgne::BoundaryMode mode, cgne::WedgeEdges edges)
      : p_(p), side_(side), r_(2 * side + 1), mode_(mode) {
    const int w = 2 * r_ + 1;
    inside_.assign(w, std::vector<int>(w, 0));
    ring_.assign(w, std::vector<int>(w, 0));
    for (int i = -r_; i <= r_; ++i) {
      for (int j = -r_; j <= r_; ++j) {
        auto [fi, fj] = canonicalize(i, j, edges);
        if (fi < side && fj < side && canonical(fi, fj, edges)) {
          inside_[i + r_][j + r_] = 1;
          ring_[i + r_][j + r_] = (fi == side - 1 || fj == side - 1);
        }
      }
    }
    a_.assign(w, std::vector<int>(w, 0));
    b_.assign(w, std::vector<double>(w, 0.0));
    c_ = b_;
    d_ = b_;
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j)
        if (inside_[i][j]) d_[i][j] = p.rho;
    a_[r_][r_] = 1;
    c_[r_][r_] = 1.0;
    d_[r_][r_] = 0.0;
  }

  int radius() const { return r_; }
  bool attached(int i, int j) const { return in_window(i, j) && a_[i + r_][j + r_]; }
  double b(int i, int j) const { return b_[i + r_][j + r_]; }
  double c(int i, int j) const { return c_[i + r_][j + r_]; }
  double d(int i, int j) const { return d_[i + r_][j + r_]; }

  double total_mass() const {
    double t = 0;
    for (std::size_t i = 0; i < b_.size(); ++i)
      for (std::size_t j = 0; j < b_.size(); ++j) t += b_[i][j] + c_[i][j] + d_[i][j];
    return t;
  }

  void step() {
    static constexpr int di[6] = {1, -1, 0, 0, 1, -1};
    static constexpr int dj[6] = {0, 0, 1, -1, -1, 1};
    const int w = 2 * r_ + 1;
    auto open = [&](int i, int j) { return i >= 0 && j >= 0 && i < w && j < w && inside_[i][j]; };
    auto bnd = [&](const std::vector<std::vector<int>>& a, int i, int j) {
      if (a[i][j]) return false;
      for (int k = 0; k < 6; ++k) {
        const int ni = i + di[k], nj = j + dj[k];
        if (open(ni, nj) && a[ni][nj]) return true;
      }
      return false;
    };
    // diffusion
    auto d0 = d_;
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) {
        if (!inside_[i][j] || a_[i][j]) continue;
        double sum = d0[i][j];
        for (int k = 0; k < 6; ++k) {
          const int ni = i + di[k], nj = j + dj[k];
          sum += (!open(ni, nj) || a_[ni][nj]) ? d0[i][j] : d0[ni][nj];
        }
        d_[i][j] = sum / 7.0;
        if (mode_ == cgne::BoundaryMode::reservoir && ring_[i][j]) d_[i][j] = p_.rho;
      }
    // freezing
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) {
        if (!inside_[i][j] || !bnd(a_, i, j)) continue;
        b_[i][j] += (1.0 - p_.kappa) * d_[i][j];
        c_[i][j] += p_.kappa * d_[i][j];
        d_[i][j] = 0.0;
      }
    // attachment
    auto a0 = a_;
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) {
        if (!inside_[i][j] || a0[i][j]) continue;
        int n = 0;
        double vapor = d_[i][j];
        for (int k = 0; k < 6; ++k) {
          const int ni = i + di[k], nj = j + dj[k];
          if (!open(ni, nj)) {
            vapor += d_[i][j];
            continue;
          }
          n += a0[ni][nj];
          vapor += d_[ni][nj];
        }
        const double bb = b_[i][j];
        const bool attach = n >= 4 || (n == 3 && (bb >= 1.0 || (bb >= p_.alpha && vapor < p_.theta_vapor))) ||
                            ((n == 1 || n == 2) && bb >= p_.beta_attach);
        if (attach) {
          a_[i][j] = 1;
          c_[i][j] += b_[i][j];
          b_[i][j] = 0.0;
        }
      }
    // melting
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) {
        if (!inside_[i][j] || !bnd(a_, i, j)) continue;
        const double bb = b_[i][j], cc = c_[i][j];
        d_[i][j] += p_.mu * bb + p_.gamma_melt * cc;
        b_[i][j] = (1.0 - p_.mu) * bb;
        c_[i][j] = (1.0 - p_.gamma_melt) * cc;
      }
  }

 private:
  bool in_window(int i, int j) const { return i >= -r_ && i <= r_ && j >= -r_ && j <= r_; }

  cgne::LcaParams p_;
  int side_;
  int r_;
  cgne::BoundaryMode mode_;
  std::vector<std::vector<int>> inside_, ring_, a_;
  std::vector<std::vector<double>> b_, c_, d_;
};

}  // namespace reference
