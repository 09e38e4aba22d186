#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "cgne/params.hpp"
#include "cgne/trajectory.hpp"

namespace testing_support {

inline std::string defaults_file() { return CGNE_TEST_DEFAULTS_FILE; }
inline std::string data_dir() { return CGNE_TEST_DATA_DIR; }

inline cgne::LcaParams default_params(double rho = 0.5) {
  cgne::LcaParams p;
  cgne::apply_key_values(cgne::read_key_values(defaults_file()), p);
  p.rho = rho;
  return p;
}

inline cgne::RunConfig default_run() {
  cgne::RunConfig cfg;
  cgne::apply_key_values(cgne::read_key_values(defaults_file()), cfg);
  return cfg;
}

/// Parameters spread over a wide range so that small grids see attachments
/// of every kind within a few dozen steps.
inline cgne::LcaParams random_params(std::mt19937_64& rng, bool noisy = true) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  cgne::LcaParams p;
  p.rho = u(0.35, 0.65);
  p.beta_attach = u(0.6, 2.0);
  p.alpha = u(0.0, 0.5);
  p.theta_vapor = u(0.0, 0.1);
  p.kappa = u(0.001, 0.3);
  p.mu = u(0.0, 0.1);
  p.gamma_melt = u(0.0, 0.01);
  p.sigma_noise = noisy ? u(0.0, 0.05) : 0.0;
  return p;
}

/// Monotone random trajectory: frame 0 is the seed, later frames add cells.
inline cgne::Trajectory random_trajectory(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> side_dist(1, 40);
  std::uniform_int_distribution<int> frames_dist(1, 12);
  cgne::Trajectory t;
  t.side = side_dist(rng);
  t.params = random_params(rng);
  t.seed = rng();
  t.snapshot_every = static_cast<std::uint32_t>(rng() % 200 + 1);
  t.source = rng() % 2 ? cgne::TrajectorySource::lca : cgne::TrajectorySource::emulator;
  t.edges = rng() % 2 ? cgne::WedgeEdges::mirror : cgne::WedgeEdges::rotational;
  cgne::WedgeGrid g(t.side);
  g.set(0, 0, true);
  const int n = frames_dist(rng);
  for (int f = 0; f < n; ++f) {
    if (f > 0) {
      const double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
      for (int i = 0; i < t.side; ++i)
        for (int j = 0; j < t.side; ++j)
          if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < density) g.set(i, j, true);
    }
    t.frames.push_back(g);
  }
  return t;
}

inline std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cgne_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
