#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "json.hpp"

#include "cgne/dataset.hpp"
#include "cgne/error.hpp"
#include "cgne/lca.hpp"
#include "golden.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testing_support::TempDir;

namespace {

std::vector<std::uint8_t> mutate(std::vector<std::uint8_t> b, std::size_t at, std::uint8_t v) {
  b.at(at) = v;
  return b;
}

cgne::GenerateOptions tiny_options(std::size_t n, std::uint64_t master) {
  cgne::GenerateOptions o;
  o.count = n;
  o.fixed = testing_support::default_params();
  o.run.side = 8;
  o.run.max_steps = 30;
  o.run.snapshot_every = 10;
  o.run.halt_margin = 1;
  o.master_seed = master;
  return o;
}

}  // namespace

TEST_CASE("roundtrip of random trajectories") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 200; ++k) {
    const auto t = testing_support::random_trajectory(rng);
    const auto bytes = cgne::encode_trajectory(t);
    CHECK(bytes.size() == cgne::trajectory_file_size(t.side, t.frames.size()));
    CHECK(bytes.size() == 64 + 8 * 8 + t.frames.size() * ((t.side * t.side + 7) / 8));
    REQUIRE(cgne::decode_trajectory(bytes) == t);
  }
}

TEST_CASE("write and read through files") {
  TempDir dir("io");
  std::mt19937_64 rng(52);
  const auto t = testing_support::random_trajectory(rng);
  const auto path = dir.file("t.cgt");
  cgne::write_trajectory(t, path);
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".partial"));
  CHECK(fs::file_size(path) == cgne::trajectory_file_size(t.side, t.frames.size()));
  CHECK(cgne::read_trajectory(path) == t);

  auto bad = t;
  bad.frames.push_back(cgne::WedgeGrid(t.side));  // drops the seed: not monotone
  CHECK_THROWS_AS(cgne::write_trajectory(bad, dir.file("bad.cgt")), cgne::InvariantViolation);
  CHECK_FALSE(fs::exists(dir.file("bad.cgt")));
  CHECK_FALSE(fs::exists(dir.file("bad.cgt.partial")));
  CHECK_THROWS_AS(cgne::read_trajectory(dir.file("missing.cgt")), cgne::Error);
}

TEST_CASE("decode errors have distinct classes") {
  const auto t = golden::growing();
  const auto good = cgne::encode_trajectory(t);

  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 0, 'X')), cgne::FormatError);
  try {
    cgne::decode_trajectory(mutate(good, 0, 'X'));
  } catch (const cgne::TruncationError&) {
    FAIL("bad magic must not be reported as truncation");
  } catch (const cgne::FormatError&) {
  }
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 4, 2)), cgne::FormatError);     // version
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 7, 1)), cgne::FormatError);     // reserved bits
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 20, 9)), cgne::FormatError);    // source
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 32, 7)), cgne::FormatError);    // n_params
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 50, 1)), cgne::FormatError);    // header padding

  auto truncated = good;
  truncated.pop_back();
  CHECK_THROWS_AS(cgne::decode_trajectory(truncated), cgne::TruncationError);
  CHECK_THROWS_AS(cgne::decode_trajectory(std::span(good).first(30)), cgne::TruncationError);
  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(cgne::decode_trajectory(trailing), cgne::FormatError);

  // side 10 leaves 4 unused bits in the last byte of each frame
  const std::size_t last_of_frame0 = 128 + 12;
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, last_of_frame0, good[last_of_frame0] | 0x80)),
                  cgne::FormatError);

  // frame 0 with an extra cell parses but breaks the seed invariant
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, 128, 0x03)), cgne::InvariantViolation);
  // clearing a cell in the last frame breaks monotonicity
  const std::size_t frame2 = 128 + 2 * 13;
  CHECK_THROWS_AS(cgne::decode_trajectory(mutate(good, frame2, good[frame2] & 0xFE)), cgne::InvariantViolation);
}

TEST_CASE("golden files") {
  const auto dir = testing_support::data_dir();
  if (std::getenv("CGNE_REGENERATE_GOLDEN")) {
    cgne::write_trajectory(golden::growing(), dir + "/golden.cgt");
    cgne::write_trajectory(golden::seed_only(), dir + "/golden_seed.cgt");
  }
  const auto bytes = testing_support::read_bytes(dir + "/golden.cgt");
  CHECK(testing_support::fnv1a64(bytes) == golden::kGrowingDigest);
  CHECK(bytes == cgne::encode_trajectory(golden::growing()));
  const auto t = cgne::read_trajectory(dir + "/golden.cgt");
  CHECK(t == golden::growing());
  CHECK(t.side == 10);
  CHECK(t.frames.size() == 3);
  CHECK(t.seed == 0x0123456789abcdefull);
  CHECK(t.params.rho == 0.5);
  CHECK(t.frames[2].at(9, 9));

  const auto seed_bytes = testing_support::read_bytes(dir + "/golden_seed.cgt");
  CHECK(testing_support::fnv1a64(seed_bytes) == golden::kSeedOnlyDigest);
  CHECK(cgne::read_trajectory(dir + "/golden_seed.cgt") == golden::seed_only());

  // spot-check the layout byte by byte
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CGT1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 10);
  CHECK(bytes[12] == 3);
  CHECK(bytes[16] == 50);
  CHECK(bytes[24] == 0xef);
  CHECK(bytes[31] == 0x01);
  CHECK(bytes[32] == 8);
  CHECK(bytes[128] == 0x01);              // frame 0: the seed only
  CHECK(bytes[128 + 13] == 0x03);         // frame 1: cells 0 and 1 ...
  CHECK(bytes[128 + 13 + 1] == 0x04);     // ... and cell 10 = (1, 0)
}

TEST_CASE("downsample") {
  auto t = golden::growing();
  while (t.frames.size() < 11) t.frames.push_back(t.frames.back());
  CHECK(cgne::downsample(t, 1) == t);
  const auto d = cgne::downsample(t, 5);
  REQUIRE(d.frames.size() == 3);
  CHECK(d.frames[0] == t.frames[0]);
  CHECK(d.frames[1] == t.frames[5]);
  CHECK(d.frames[2] == t.frames[10]);
  CHECK(d.snapshot_every == 250);
  CHECK_NOTHROW(d.validate());
  const auto e = cgne::downsample(t, 4);  // 0, 4, 8, then the final frame 10
  CHECK(e.frames.size() == 4);
  CHECK(e.frames.back() == t.frames.back());
  CHECK_THROWS_AS(cgne::downsample(t, 0), cgne::InvalidArgument);
}

TEST_CASE("splits partition the seeds roughly 80/10/10") {
  std::map<std::string, int> counts;
  for (std::uint64_t s = 0; s < 10000; ++s) counts[cgne::split_for_seed(s)]++;
  CHECK(counts.size() == 3);
  CHECK(counts["train"] + counts["val"] + counts["test"] == 10000);
  CHECK(std::abs(counts["train"] - 8000) < 200);
  CHECK(std::abs(counts["val"] - 1000) < 150);
  CHECK(std::abs(counts["test"] - 1000) < 150);
  CHECK(cgne::split_for_seed(12345) == cgne::split_for_seed(12345));
}

TEST_CASE("generate a single trajectory") {
  TempDir dir("gen1");
  const auto m = cgne::generate_dataset(tiny_options(1, 3), dir.path().string());
  REQUIRE(m.entries.size() == 1);
  CHECK(m.failures.empty());
  const auto& e = m.entries[0];
  CHECK(e.file == "traj_00000.cgt");
  CHECK(e.rho >= 0.35);
  CHECK(e.rho <= 0.65);
  const auto t = cgne::read_trajectory(dir.file(e.file));
  CHECK(t.params.rho == e.rho);
  CHECK(t.seed == e.seed);
  CHECK(t.frames.size() == e.frames);
  CHECK(fs::exists(dir.file("manifest.json")));
  const auto back = cgne::read_manifest(dir.file("manifest.json"));
  CHECK(back.entries == m.entries);
  CHECK(back.fixed == m.fixed);
  CHECK(back.run.side == 8);
  CHECK_NOTHROW(cgne::verify_manifest(back, dir.path().string()));

  auto dup = back;
  dup.entries.push_back(dup.entries[0]);
  CHECK_THROWS_AS(cgne::verify_manifest(dup, dir.path().string()), cgne::InvariantViolation);
  auto missing = back;
  missing.entries[0].file = "nope.cgt";
  CHECK_THROWS_AS(cgne::verify_manifest(missing, dir.path().string()), cgne::Error);

  CHECK_THROWS_AS(cgne::generate_dataset(tiny_options(0, 3), dir.path().string()), cgne::InvalidArgument);
}

TEST_CASE("generation is deterministic and independent of worker count") {
  TempDir a("gena"), b("genb");
  auto opts = tiny_options(12, 77);
  const auto ma = cgne::generate_dataset(opts, a.path().string());
  opts.workers = 3;
  const auto mb = cgne::generate_dataset(opts, b.path().string());
  CHECK(testing_support::read_bytes(a.file("manifest.json")) == testing_support::read_bytes(b.file("manifest.json")));
  for (const auto& e : ma.entries) {
    CHECK(testing_support::read_bytes(a.file(e.file)) == testing_support::read_bytes(b.file(e.file)));
  }
  CHECK(ma.entries.size() + ma.failures.size() == 12);
  std::set<std::string> files;
  for (const auto& e : ma.entries) files.insert(e.file);
  CHECK(files.size() == ma.entries.size());
}

TEST_CASE("degenerate runs are recorded, not fatal") {
  TempDir dir("genfail");
  auto opts = tiny_options(3, 5);
  opts.rho_lo = 0.0;
  opts.rho_hi = 0.0;
  const auto m = cgne::generate_dataset(opts, dir.path().string());
  CHECK(m.entries.empty());
  REQUIRE(m.failures.size() == 3);
  CHECK(m.failures[1].index == 1);
  const auto back = cgne::read_manifest(dir.file("manifest.json"));
  CHECK(back.failures == m.failures);
}

TEST_CASE("generated rho passes a Kolmogorov-Smirnov test against the uniform law") {
  TempDir dir("genks");
  const auto m = cgne::generate_dataset(tiny_options(1000, 2024), dir.path().string());
  REQUIRE(m.entries.size() == 1000);
  std::vector<double> u;
  for (const auto& e : m.entries) u.push_back((e.rho - 0.35) / 0.30);
  std::sort(u.begin(), u.end());
  double d = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  }
  // asymptotic critical value at alpha = 0.01
  CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("manifest json") {
  cgne::DatasetManifest m;
  m.requested = 2;
  m.master_seed = 9;
  m.fixed = testing_support::default_params();
  m.run.side = 32;
  m.entries = {{"traj_00000.cgt", 0.4, 11, 5, "train"}};
  m.failures = {{1, 0.5, 12, "no attachment"}};
  const auto j = nlohmann::json::parse(m.to_json());
  for (auto key : {"format_version", "creation", "run_config", "fixed_params", "trajectories", "failures"}) {
    CHECK(j.contains(key));
  }
  CHECK_FALSE(j["fixed_params"].contains("rho"));
  const auto back = cgne::DatasetManifest::from_json(m.to_json());
  CHECK(back.entries == m.entries);
  CHECK(back.failures == m.failures);
  CHECK(back.fixed.kappa == m.fixed.kappa);
  CHECK_THROWS_AS(cgne::DatasetManifest::from_json("{"), cgne::FormatError);
  CHECK_THROWS_AS(cgne::DatasetManifest::from_json(R"({"format_version": 2, "trajectories": []})"), cgne::FormatError);
}
