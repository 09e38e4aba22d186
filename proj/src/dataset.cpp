#include "cgne/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cgne/error.hpp"
#include "cgne/lca.hpp"
#include "cgne/rng.hpp"

namespace cgne {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'C', 'G', 'T', '1'};

std::size_t frame_bytes(int side) {
  const auto cells = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  return (cells + 7) / 8;
}

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  template <class T>
  void put(T v) {
    const auto u = static_cast<std::uint64_t>(v);
    for (std::size_t k = 0; k < sizeof(T); ++k) out_.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
  }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) u |= static_cast<std::uint64_t>(in_[pos_ + k]) << (8 * k);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  void expect_zeros(std::size_t n, const char* what) {
    need(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (in_[pos_ + k] != 0) throw FormatError(std::string("nonzero ") + what);
    }
    pos_ += n;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw TruncationError("trajectory data ends early");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t trajectory_file_size(int side, std::size_t frame_count) {
  return kTrajectoryHeaderBytes + 8 * LcaParams::kCount + frame_count * frame_bytes(side);
}

std::vector<std::uint8_t> encode_trajectory(const Trajectory& t) {
  t.validate();
  std::vector<std::uint8_t> out;
  out.reserve(trajectory_file_size(t.side, t.frames.size()));
  ByteWriter w(out);
  for (char c : kMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(kTrajectoryVersion);
  w.put(static_cast<std::uint16_t>(t.edges == WedgeEdges::rotational ? 1 : 0));
  w.put(static_cast<std::uint32_t>(t.side));
  w.put(static_cast<std::uint32_t>(t.frames.size()));
  w.put(t.snapshot_every);
  w.put(static_cast<std::uint8_t>(t.source));
  w.zeros(3);
  w.put(t.seed);
  w.put(static_cast<std::uint32_t>(LcaParams::kCount));
  w.zeros(4);
  w.zeros(kTrajectoryHeaderBytes - out.size());
  for (double v : t.params.to_array()) w.put_f64(v);

  const std::size_t fb = frame_bytes(t.side);
  for (const auto& frame : t.frames) {
    const std::size_t base = out.size();
    out.resize(base + fb, 0);
    const auto cells = frame.cells();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k]) out[base + k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
    }
  }
  return out;
}

Trajectory decode_trajectory(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < sizeof(kMagic)) throw TruncationError("file too short for a trajectory header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("bad magic (expected CGT1)");
  r.take(4);
  if (bytes.size() < kTrajectoryHeaderBytes) throw TruncationError("trajectory header is truncated");

  Trajectory t;
  const auto version = r.get<std::uint16_t>();
  if (version != kTrajectoryVersion) throw FormatError("unsupported trajectory version " + std::to_string(version));
  const auto reserved = r.get<std::uint16_t>();
  if (reserved & ~1u) throw FormatError("unknown flags in reserved header field");
  t.edges = (reserved & 1u) ? WedgeEdges::rotational : WedgeEdges::mirror;
  const auto side = r.get<std::uint32_t>();
  if (side == 0 || side > (1u << 15)) throw FormatError("implausible side " + std::to_string(side));
  t.side = static_cast<int>(side);
  const auto frame_count = r.get<std::uint32_t>();
  t.snapshot_every = r.get<std::uint32_t>();
  const auto source = r.get<std::uint8_t>();
  if (source > 1) throw FormatError("unknown trajectory source " + std::to_string(source));
  t.source = static_cast<TrajectorySource>(source);
  r.expect_zeros(3, "header padding");
  t.seed = r.get<std::uint64_t>();
  const auto n_params = r.get<std::uint32_t>();
  if (n_params != LcaParams::kCount) throw FormatError("expected 8 parameters, found " + std::to_string(n_params));
  r.expect_zeros(4 + (kTrajectoryHeaderBytes - 40), "header padding");

  std::array<double, LcaParams::kCount> values{};
  for (auto& v : values) v = r.get_f64();
  t.params = LcaParams::from_array(values);

  const std::size_t fb = frame_bytes(t.side);
  const std::size_t cells = static_cast<std::size_t>(t.side) * t.side;
  if (r.remaining() < static_cast<std::size_t>(frame_count) * fb) throw TruncationError("frame section is truncated");
  if (r.remaining() > static_cast<std::size_t>(frame_count) * fb) throw FormatError("trailing bytes after frames");
  t.frames.reserve(frame_count);
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    const auto packed = r.take(fb);
    std::vector<std::uint8_t> unpacked(cells);
    for (std::size_t k = 0; k < cells; ++k) unpacked[k] = (packed[k / 8] >> (k % 8)) & 1u;
    if (cells % 8 != 0 && (packed[fb - 1] >> (cells % 8)) != 0) throw FormatError("nonzero frame padding bits");
    t.frames.emplace_back(t.side, std::move(unpacked));
  }
  t.validate();
  return t;
}

void write_trajectory(const Trajectory& t, const std::string& path) {
  const auto bytes = encode_trajectory(t);
  const std::string tmp = path + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error("failed writing " + tmp);
  }
  fs::rename(tmp, path);
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_trajectory(bytes);
}

Trajectory downsample(const Trajectory& t, std::uint32_t factor) {
  if (factor == 0) throw InvalidArgument("downsample factor must be at least 1");
  if (static_cast<std::uint64_t>(t.snapshot_every) * factor > UINT32_MAX) {
    throw InvalidArgument("downsampled snapshot spacing overflows");
  }
  Trajectory out = t;
  out.frames.clear();
  for (std::size_t k = 0; k < t.frames.size(); k += factor) out.frames.push_back(t.frames[k]);
  if ((t.frames.size() - 1) % factor != 0) out.frames.push_back(t.frames.back());
  out.snapshot_every = t.snapshot_every * factor;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

nlohmann::ordered_json params_json(const LcaParams& p, bool with_rho) {
  nlohmann::ordered_json j;
  const auto values = p.to_array();
  for (std::size_t k = with_rho ? 0 : 1; k < LcaParams::kCount; ++k) j[LcaParams::kNames[k]] = values[k];
  return j;
}

}  // namespace

std::string split_for_seed(std::uint64_t seed) {
  const auto h = splitmix64(seed) % 100;
  if (h < 80) return "train";
  if (h < 90) return "val";
  return "test";
}

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = format_version;
  j["creation"] = {{"tool", "cgne generate"},
                   {"requested", requested},
                   {"master_seed", master_seed},
                   {"rho_range", {rho_lo, rho_hi}},
                   {"split_rule", "splitmix64(seed) % 100: <80 train, <90 val, else test"}};
  j["run_config"] = {{"side", run.side},
                     {"max_steps", run.max_steps},
                     {"snapshot_every", run.snapshot_every},
                     {"halt_margin", run.halt_margin},
                     {"boundary_mode", to_string(run.boundary_mode)},
                     {"wedge_edges", to_string(run.edges)}};
  j["fixed_params"] = params_json(fixed, false);
  auto entries_json = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    entries_json.push_back({{"file", e.file}, {"rho", e.rho}, {"seed", e.seed}, {"frames", e.frames}, {"split", e.split}});
  }
  j["trajectories"] = entries_json;
  auto failures_json = nlohmann::ordered_json::array();
  for (const auto& f : failures) {
    failures_json.push_back({{"index", f.index}, {"rho", f.rho}, {"seed", f.seed}, {"error", f.error}});
  }
  j["failures"] = failures_json;
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != 1) throw FormatError("unsupported manifest version " + std::to_string(m.format_version));
    if (j.contains("creation")) {
      const auto& c = j["creation"];
      m.requested = c.value("requested", std::size_t{0});
      m.master_seed = c.value("master_seed", std::uint64_t{0});
      if (c.contains("rho_range")) {
        m.rho_lo = c["rho_range"].at(0).get<double>();
        m.rho_hi = c["rho_range"].at(1).get<double>();
      }
    }
    if (j.contains("run_config")) {
      const auto& r = j["run_config"];
      m.run.side = r.value("side", m.run.side);
      m.run.max_steps = r.value("max_steps", m.run.max_steps);
      m.run.snapshot_every = r.value("snapshot_every", m.run.snapshot_every);
      m.run.halt_margin = r.value("halt_margin", m.run.halt_margin);
      m.run.boundary_mode = boundary_mode_from_string(r.value("boundary_mode", std::string("reservoir")));
      m.run.edges = wedge_edges_from_string(r.value("wedge_edges", std::string("mirror")));
    }
    if (j.contains("fixed_params")) {
      KeyValues kv;
      for (const auto& [k, v] : j["fixed_params"].items()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        kv[k] = os.str();
      }
      apply_key_values(kv, m.fixed);
    }
    for (const auto& e : j.at("trajectories")) {
      m.entries.push_back({e.at("file").get<std::string>(), e.at("rho").get<double>(), e.at("seed").get<std::uint64_t>(),
                           e.at("frames").get<std::uint32_t>(), e.at("split").get<std::string>()});
    }
    if (j.contains("failures")) {
      for (const auto& f : j["failures"]) {
        m.failures.push_back({f.at("index").get<std::size_t>(), f.at("rho").get<double>(),
                              f.at("seed").get<std::uint64_t>(), f.at("error").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << m.to_json();
  if (!os) throw Error("failed writing " + path);
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open manifest " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return DatasetManifest::from_json(ss.str());
}

void verify_manifest(const DatasetManifest& m, const std::string& manifest_dir) {
  std::vector<std::string> files;
  for (const auto& e : m.entries) {
    if (e.split != "train" && e.split != "val" && e.split != "test") {
      throw InvariantViolation(e.file + ": unknown split '" + e.split + "'");
    }
    files.push_back(e.file);
    const auto t = read_trajectory((fs::path(manifest_dir) / e.file).string());
    if (t.seed != e.seed || t.params.rho != e.rho || t.frames.size() != e.frames) {
      throw InvariantViolation(e.file + ": header disagrees with the manifest entry");
    }
  }
  std::sort(files.begin(), files.end());
  if (std::adjacent_find(files.begin(), files.end()) != files.end()) {
    throw InvariantViolation("a trajectory file is listed more than once");
  }
}

double dataset_rho(std::uint64_t master_seed, std::size_t index, double lo, double hi) {
  return lo + (hi - lo) * KeyedRng(master_seed).uniform(0, index);
}

std::uint64_t dataset_seed(std::uint64_t master_seed, std::size_t index) {
  return KeyedRng(master_seed).bits64(1, index);
}

DatasetManifest generate_dataset(const GenerateOptions& opts, const std::string& out_dir) {
  if (opts.count < 1) throw InvalidArgument("dataset size must be at least 1");
  if (!(opts.rho_hi >= opts.rho_lo)) throw InvalidArgument("rho range is empty");
  LcaParams probe = opts.fixed;
  probe.rho = opts.rho_lo;
  probe.validate();
  opts.run.validate();
  fs::create_directories(out_dir);

  struct Slot {
    bool ok = false;
    ManifestEntry entry;
    ManifestFailure failure;
  };
  std::vector<Slot> slots(opts.count);
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= opts.count) return;
      LcaParams p = opts.fixed;
      p.rho = dataset_rho(opts.master_seed, i, opts.rho_lo, opts.rho_hi);
      RunConfig cfg = opts.run;
      cfg.seed = dataset_seed(opts.master_seed, i);
      cfg.workers = 1;
      std::ostringstream name;
      name << "traj_" << std::setw(5) << std::setfill('0') << i << ".cgt";
      try {
        const auto t = run(p, cfg);
        write_trajectory(t, (fs::path(out_dir) / name.str()).string());
        slots[i].ok = true;
        slots[i].entry = {name.str(), p.rho, cfg.seed, static_cast<std::uint32_t>(t.frames.size()),
                          split_for_seed(cfg.seed)};
      } catch (const DegenerateRun& e) {
        slots[i].failure = {i, p.rho, cfg.seed, e.what()};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!fatal) fatal = std::current_exception();
        next.store(opts.count);
        return;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(opts.count)));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (fatal) std::rethrow_exception(fatal);

  DatasetManifest m;
  m.requested = opts.count;
  m.master_seed = opts.master_seed;
  m.rho_lo = opts.rho_lo;
  m.rho_hi = opts.rho_hi;
  m.fixed = opts.fixed;
  m.run = opts.run;
  for (auto& s : slots) {
    if (s.ok) {
      m.entries.push_back(std::move(s.entry));
    } else {
      m.failures.push_back(std::move(s.failure));
    }
  }
  write_manifest(m, (fs::path(out_dir) / "manifest.json").string());
  return m;
}

}  // namespace cgne
