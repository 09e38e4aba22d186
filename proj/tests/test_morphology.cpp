#include <random>
#include <sstream>

#include "doctest.h"

#include "cgne/error.hpp"
#include "cgne/lca.hpp"
#include "cgne/morphology.hpp"
#include "support.hpp"

using cgne::AxialCoord;
using cgne::HexMask;

namespace {

HexMask random_mask(std::mt19937_64& rng, int radius, double density) {
  HexMask m(radius);
  std::bernoulli_distribution on(density);
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j) m.set({i, j}, on(rng));
  return m;
}

// Per-cell formulation: each attached cell exposes 6 minus its attached neighbors.
std::int64_t exposed_edges(const HexMask& m) {
  std::int64_t total = 0;
  for (auto c : m.attached_cells()) {
    int n = 0;
    for (auto nb : cgne::hex_neighbors(c)) n += m.at(nb);
    total += 6 - n;
  }
  return total;
}

cgne::Trajectory single_frame(const cgne::WedgeGrid& g, double rho) {
  cgne::Trajectory t;
  t.side = g.side();
  t.params.rho = rho;
  t.frames.push_back(g);
  return t;
}

}  // namespace

TEST_CASE("closed forms") {
  HexMask m(3);
  CHECK(cgne::area(m) == 0);
  CHECK(cgne::boundary_length(m) == 0);
  m.set({0, 0}, true);
  CHECK(cgne::area(m) == 1);
  CHECK(cgne::boundary_length(m) == 6);
  m.set({1, 0}, true);
  CHECK(cgne::area(m) == 2);
  CHECK(cgne::boundary_length(m) == 10);
  for (auto c : cgne::hex_neighbors({0, 0})) m.set(c, true);
  CHECK(cgne::area(m) == 7);
  CHECK(cgne::boundary_length(m) == 18);
}

TEST_CASE("cells on the window edge still count their outer edges") {
  HexMask m(2);
  m.set({2, -2}, true);
  CHECK(cgne::boundary_length(m) == 6);
  m.set({-2, 2}, true);
  CHECK(cgne::boundary_length(m) == 12);
}

TEST_CASE("pair count equals per-cell exposed edges") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_mask(rng, 1 + trial % 9, (trial % 10) / 10.0);
    const auto b = cgne::boundary_length(m);
    CHECK(b == exposed_edges(m));
    const auto a = cgne::area(m);
    CHECK(b <= 6 * a);
    if (a > 0) CHECK(b >= 6);
  }
}

TEST_CASE("features of a seed-only trajectory") {
  cgne::WedgeGrid g(8);
  g.set(0, 0, true);
  const auto f = cgne::features(single_frame(g, 0.42));
  CHECK(f == cgne::MorphologySample{0.42, 1, 6});
}

TEST_CASE("full-crystal area follows the orbit decomposition") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    cgne::LcaParams p = testing_support::random_params(rng);
    cgne::RunConfig cfg;
    cfg.side = 20;
    cfg.max_steps = 60;
    cfg.halt_margin = 1;
    cfg.boundary_mode = cgne::BoundaryMode::sealed;
    cfg.seed = rng();
    cfg.snapshot_every = 10;
    cgne::Trajectory t;
    try {
      t = cgne::run(p, cfg);
    } catch (const cgne::DegenerateRun&) {
      continue;
    }
    const auto& last = t.frames.back();
    std::int64_t interior = 0, edge = 0;
    for (int i = 0; i < last.side(); ++i)
      for (int j = 0; j < last.side(); ++j) {
        if (!last.at(i, j) || (i == 0 && j == 0)) continue;
        (i == 0 || j == 0 ? edge : interior) += 1;
      }
    const auto f = cgne::features(t);
    CHECK(f.area == 1 + 6 * interior + 3 * edge);
    CHECK(f.area == static_cast<std::int64_t>(cgne::reconstruct_full(last).attached_cells().size()));
    CHECK(f == cgne::features(t));
    CHECK(f.rho == p.rho);

    // area never shrinks along the trajectory
    std::int64_t prev = 0;
    for (const auto& fr : t.frames) {
      const auto a = cgne::area(cgne::reconstruct_full(fr));
      CHECK(a >= prev);
      prev = a;
    }
  }
}

TEST_CASE("features propagates symmetry violations") {
  cgne::WedgeGrid g(8);
  g.set(0, 0, true);
  g.set(2, 0, true);
  auto t = single_frame(g, 0.5);
  t.edges = cgne::WedgeEdges::rotational;
  CHECK_THROWS_AS(cgne::features(t), cgne::SymmetryViolation);
}

TEST_CASE("samples csv") {
  std::vector<cgne::MorphologySample> s{{0.35, 1, 6}, {0.6123456789012345, 12345, 678}};
  std::stringstream ss;
  cgne::write_samples_csv(ss, s);
  CHECK(ss.str().rfind("rho,area,boundary_length\n", 0) == 0);
  CHECK(cgne::read_samples_csv(ss) == s);

  std::istringstream reordered("area,extra,boundary_length,rho\n7,x,18,0.5\n");
  CHECK(cgne::read_samples_csv(reordered) == std::vector<cgne::MorphologySample>{{0.5, 7, 18}});

  std::istringstream missing("rho,area\n0.5,7\n");
  CHECK_THROWS_AS(cgne::read_samples_csv(missing), cgne::InvalidArgument);
  std::istringstream bad("rho,area,boundary_length\n0.5,seven,18\n");
  CHECK_THROWS_AS(cgne::read_samples_csv(bad), cgne::InvalidArgument);
}
