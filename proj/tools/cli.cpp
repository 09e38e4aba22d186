#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgne/dataset.hpp"
#include "cgne/error.hpp"
#include "cgne/lca.hpp"
#include "cgne/morphology.hpp"
#include "cgne/parallel.hpp"
#include "cgne/transport.hpp"
#include "defaults_text.hpp"

namespace cgne::cli {

const char* defaults_text() { return kDefaultsText; }

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

/// Argument problems found after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Flags shared by every command that runs the automaton. Anything left
// unset falls through to --config, then to the shipped defaults.
struct ModelFlags {
  std::optional<double> rho;
  std::optional<int> side;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::uint32_t> snapshot_every;
  std::optional<int> halt_margin;
  std::optional<std::string> boundary;
  std::optional<std::string> edges;
  std::vector<std::string> overrides;
  std::string config;
  int workers = 0;
  bool allow_out_of_range = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_rho) {
  if (with_rho) {
    cmd->add_option("--rho", f.rho, "Vapor saturation");
    cmd->add_flag("--allow-out-of-range", f.allow_out_of_range, "Accept rho outside [0.35, 0.65]");
  }
  cmd->add_option("--side", f.side, "Wedge side length in cells");
  cmd->add_option("--max-steps", f.max_steps, "Raw step cap");
  cmd->add_option("--snapshot-every", f.snapshot_every, "Raw steps between recorded frames");
  cmd->add_option("--halt-margin", f.halt_margin, "Halt when the crystal is this close to the far edge");
  cmd->add_option("--boundary", f.boundary, "Far-edge treatment")->check(CLI::IsMember({"reservoir", "sealed"}));
  cmd->add_option("--edges", f.edges, "Wedge edge rule")->check(CLI::IsMember({"mirror", "rotational"}));
  cmd->add_option("--param", f.overrides, "Override any config key, e.g. --param kappa=0.003");
  cmd->add_option("--config", f.config, "key = value file layered over the shipped defaults");
  cmd->add_option("--workers", f.workers, "Worker threads (default: $CGNE_WORKERS, else 1)");
}

struct Resolved {
  LcaParams params;
  RunConfig run;
  KeyValues layered;
  std::string config_file;
};

bool known_key(const std::string& k) {
  static const std::set<std::string> run_keys{"format_version", "side",     "max_steps",   "snapshot_every",
                                              "halt_margin",    "boundary_mode", "wedge_edges", "seed",
                                              "workers"};
  if (run_keys.count(k)) return true;
  return std::any_of(LcaParams::kNames.begin(), LcaParams::kNames.end(), [&](const char* n) { return k == n; });
}

Resolved resolve(const ModelFlags& f, std::optional<std::uint64_t> seed) {
  Resolved r;
  std::istringstream shipped(kDefaultsText);
  KeyValues kv = parse_key_values(shipped);
  if (!f.config.empty()) {
    r.config_file = fs::absolute(f.config).string();
    for (auto& [k, v] : read_key_values(f.config)) kv[k] = v;
  }
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + o + "'");
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  if (f.rho) kv["rho"] = exact(*f.rho);
  if (f.side) kv["side"] = std::to_string(*f.side);
  if (f.max_steps) kv["max_steps"] = std::to_string(*f.max_steps);
  if (f.snapshot_every) kv["snapshot_every"] = std::to_string(*f.snapshot_every);
  if (f.halt_margin) kv["halt_margin"] = std::to_string(*f.halt_margin);
  if (f.boundary) kv["boundary_mode"] = *f.boundary;
  if (f.edges) kv["wedge_edges"] = *f.edges;
  if (seed) kv["seed"] = std::to_string(*seed);

  for (const auto& [k, v] : kv) {
    if (!known_key(k)) throw UsageError("unknown configuration key '" + k + "'");
  }
  if (auto it = kv.find("format_version"); it != kv.end() && it->second != "1") {
    throw UsageError("unsupported config format_version " + it->second);
  }
  apply_key_values(kv, r.params);
  apply_key_values(kv, r.run);
  if (kv.count("workers") == 0 || f.workers > 0) r.run.workers = resolve_workers(f.workers);
  r.params.validate();
  r.run.validate();
  r.layered = kv;
  return r;
}

json params_json(const LcaParams& p) {
  json j;
  const auto v = p.to_array();
  for (std::size_t k = 0; k < LcaParams::kCount; ++k) j[LcaParams::kNames[k]] = v[k];
  return j;
}

json resolved_json(const Resolved& r) {
  json j;
  j["params"] = params_json(r.params);
  j["run_config"] = {{"side", r.run.side},
                     {"max_steps", r.run.max_steps},
                     {"snapshot_every", r.run.snapshot_every},
                     {"halt_margin", r.run.halt_margin},
                     {"boundary_mode", to_string(r.run.boundary_mode)},
                     {"wedge_edges", to_string(r.run.edges)},
                     {"seed", r.run.seed},
                     {"workers", r.run.workers}};
  j["config_file"] = r.config_file.empty() ? json(nullptr) : json(r.config_file);
  j["defaults_format_version"] = 1;
  return j;
}

// Every command records what it actually ran with. The log is written once
// the configuration is resolved and rewritten with the outcome.
class RunLog {
 public:
  RunLog(std::string path, std::string command, const std::vector<std::string>& args)
      : path_(std::move(path)), unwinding_(std::uncaught_exceptions()) {
    doc_["tool"] = "cgne";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["argv"] = args;
    doc_["status"] = "started";
  }

  ~RunLog() {
    if (finished_ || std::uncaught_exceptions() <= unwinding_) return;
    doc_["status"] = "failed";
    try {
      flush();
    } catch (...) {
    }
  }
  RunLog(const RunLog&) = delete;
  RunLog& operator=(const RunLog&) = delete;

  json& doc() { return doc_; }
  void set_resolved(json resolved) {
    doc_["resolved"] = std::move(resolved);
    flush();
  }
  void finish(const std::string& status, const std::string& message = {}) {
    doc_["status"] = status;
    if (!message.empty()) doc_["error"] = message;
    flush();
    finished_ = true;
  }

 private:
  void flush() const {
    if (const auto parent = fs::path(path_).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream os(path_, std::ios::trunc);
    if (!os) throw Error("cannot write run log " + path_);
    os << doc_.dump(2) << "\n";
  }

  std::string path_;
  int unwinding_;
  bool finished_ = false;
  json doc_;
};

void check_rho(double rho, bool allow) {
  if (!allow && !rho_in_reference_range(rho)) {
    throw UsageError("rho " + exact(rho) + " is outside the reference range [0.35, 0.65] (use --allow-out-of-range)");
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path);
}

// Type-7 sample quantile.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json timing_summary(const std::vector<double>& ms) {
  const double q1 = quantile(ms, 0.25), q3 = quantile(ms, 0.75);
  return {{"median_ms", quantile(ms, 0.5)},
          {"q1_ms", q1},
          {"q3_ms", q3},
          {"iqr_ms", q3 - q1},
          {"min_ms", *std::min_element(ms.begin(), ms.end())},
          {"max_ms", *std::max_element(ms.begin(), ms.end())},
          {"n", ms.size()},
          {"samples_ms", ms}};
}

// One number per line (first comma-separated field); '#' lines and a
// non-numeric header line are skipped.
std::vector<double> read_timings(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open timing log " + path);
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    const auto field = line.substr(0, line.find(','));
    if (field.find_first_not_of(" \t\r") == std::string::npos || field[0] == '#') continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      if (!std::isfinite(v) || v < 0) throw std::invalid_argument("negative");
      out.push_back(v);
    } catch (const std::exception&) {
      if (!first) throw UsageError("timing log " + path + ": bad value '" + field + "'");
    }
    first = false;
  }
  if (out.empty()) throw UsageError("timing log " + path + " holds no timings");
  return out;
}

// Per-bin 2D histograms of (area, boundary_length) on a shared grid, for
// contour plots of the per-bin joint densities.
json contour_json(const std::vector<MorphologySample>& model, const std::vector<MorphologySample>& reference,
                  std::span<const double> edges, std::size_t grid) {
  double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
  for (const auto* set : {&model, &reference}) {
    for (const auto& s : *set) {
      amin = std::min(amin, double(s.area));
      amax = std::max(amax, double(s.area));
      bmin = std::min(bmin, double(s.boundary_length));
      bmax = std::max(bmax, double(s.boundary_length));
    }
  }
  if (!(amax > amin)) amax = amin + 1;
  if (!(bmax > bmin)) bmax = bmin + 1;
  auto axis = [&](double lo, double hi) {
    std::vector<double> e(grid + 1);
    for (std::size_t k = 0; k <= grid; ++k) e[k] = lo + (hi - lo) * double(k) / double(grid);
    return e;
  };
  const auto ae = axis(amin, amax), be = axis(bmin, bmax);
  const double cell = (ae[1] - ae[0]) * (be[1] - be[0]);
  auto index = [&](double v, double lo, double hi) {
    const auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * double(grid));
    return std::min(k, grid - 1);
  };
  auto density = [&](const std::vector<Point2>& pts) {
    std::vector<std::vector<double>> h(grid, std::vector<double>(grid, 0.0));
    for (const auto& p : pts) h[index(p.x, amin, amax)][index(p.y, bmin, bmax)] += 1.0;
    if (!pts.empty()) {
      for (auto& row : h)
        for (auto& v : row) v /= double(pts.size()) * cell;
    }
    return h;
  };
  const auto mb = bin_by_rho(model, edges, 0), rb = bin_by_rho(reference, edges, 0);
  json bins = json::array();
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    bins.push_back({{"rho_lo", edges[k]},
                    {"rho_hi", edges[k + 1]},
                    {"model_count", mb.bins[k].size()},
                    {"reference_count", rb.bins[k].size()},
                    {"model_density", density(mb.bins[k])},
                    {"reference_density", density(rb.bins[k])}});
  }
  json j;
  j["layout"] = "density[area_index][boundary_index], normalized to integrate to 1 per bin";
  j["area_edges"] = ae;
  j["boundary_edges"] = be;
  j["bins"] = bins;
  return j;
}

// ---- commands --------------------------------------------------------------

struct SimulateArgs {
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string out, pgm_dir, run_log;
  double pgm_scale = 4.0;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto r = resolve(a.model, a.seed);
  check_rho(r.params.rho, a.model.allow_out_of_range);
  if (!(a.pgm_scale > 0)) throw UsageError("--pgm-scale must be positive");
  RunLog log(a.run_log.empty() ? a.out + ".runlog.json" : a.run_log, "simulate", argv);
  log.set_resolved(resolved_json(r));

  std::uint64_t steps = 0;
  const auto t = run(r.params, r.run, steps);
  write_trajectory(t, a.out);
  json outputs = json::array({a.out});
  if (!a.pgm_dir.empty()) {
    fs::create_directories(a.pgm_dir);
    for (std::size_t k = 0; k < t.frames.size(); ++k) {
      std::ostringstream name;
      name << "frame_" << std::setw(4) << std::setfill('0') << k << ".pgm";
      const auto path = (fs::path(a.pgm_dir) / name.str()).string();
      write_pgm(render_cartesian(reconstruct_full(t.frames[k], t.edges), a.pgm_scale), path);
      outputs.push_back(path);
    }
  }
  const auto f = features(t);
  log.doc()["outputs"] = outputs;
  log.doc()["result"] = {{"steps", steps}, {"frames", t.frames.size()}, {"area", f.area},
                         {"boundary_length", f.boundary_length}};
  log.finish("ok");
  out << "wrote " << a.out << ": " << t.frames.size() << " frames, " << steps << " steps, area " << f.area
      << ", boundary " << f.boundary_length << "\n";
  return kExitOk;
}

struct GenerateArgs {
  ModelFlags model;
  long long count = -1;
  std::uint64_t master_seed = 0;
  double rho_lo = kRhoMin, rho_hi = kRhoMax;
  std::string out, run_log;
};

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.count < 1) throw UsageError("-n must be at least 1");
  const auto r = resolve(a.model, std::nullopt);
  if (!(a.rho_hi >= a.rho_lo)) throw UsageError("--rho-hi must not be below --rho-lo");
  check_rho(a.rho_lo, a.model.allow_out_of_range);
  check_rho(a.rho_hi, a.model.allow_out_of_range);
  RunLog log(a.run_log.empty() ? (fs::path(a.out) / "runlog.json").string() : a.run_log, "generate", argv);
  auto resolved = resolved_json(r);
  resolved["params"].erase("rho");
  resolved["run_config"].erase("seed");
  resolved["dataset"] = {{"count", a.count}, {"master_seed", a.master_seed}, {"rho_range", {a.rho_lo, a.rho_hi}}};
  log.set_resolved(resolved);

  GenerateOptions opts;
  opts.count = static_cast<std::size_t>(a.count);
  opts.run = r.run;
  opts.fixed = r.params;
  opts.rho_lo = a.rho_lo;
  opts.rho_hi = a.rho_hi;
  opts.master_seed = a.master_seed;
  opts.workers = r.run.workers;
  const auto m = generate_dataset(opts, a.out);
  log.doc()["outputs"] = {(fs::path(a.out) / "manifest.json").string()};
  log.doc()["result"] = {{"trajectories", m.entries.size()}, {"failures", m.failures.size()}};
  log.finish("ok");
  out << "generated " << m.entries.size() << " trajectories (" << m.failures.size() << " failed) in " << a.out << "\n";
  return kExitOk;
}

struct FeaturesArgs {
  std::string manifest, out, run_log;
  std::vector<std::string> trajectories;
};

int cmd_features(const FeaturesArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.manifest.empty() == a.trajectories.empty()) {
    throw UsageError("give exactly one of --manifest or --trajectory");
  }
  std::vector<std::string> files;
  if (!a.manifest.empty()) {
    const auto m = read_manifest(a.manifest);
    if (m.entries.empty()) throw UsageError("manifest " + a.manifest + " lists no trajectories");
    const auto dir = fs::path(a.manifest).parent_path();
    for (const auto& e : m.entries) files.push_back((dir / e.file).string());
  } else {
    files = a.trajectories;
  }
  RunLog log(a.run_log.empty() ? a.out + ".runlog.json" : a.run_log, "features", argv);
  log.set_resolved({{"manifest", a.manifest.empty() ? json(nullptr) : json(a.manifest)}, {"inputs", files}});

  std::vector<MorphologySample> samples;
  samples.reserve(files.size());
  for (const auto& f : files) samples.push_back(features(read_trajectory(f)));
  write_samples_csv(a.out, samples);
  log.doc()["outputs"] = {a.out};
  log.doc()["result"] = {{"rows", samples.size()}};
  log.finish("ok");
  out << "wrote " << samples.size() << " rows to " << a.out << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model, reference, out, contour_out, run_log;
  std::size_t bins = 10, min_count = 5, ci_resamples = 0, contour_grid = 16;
  std::uint64_t ci_seed = 0;
  bool standardize = false;
};

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.bins < 1) throw UsageError("--bins must be at least 1");
  if (a.ci_resamples != 0 && a.ci_resamples < 100) throw UsageError("--ci-resamples must be 0 or at least 100");
  if (a.contour_grid < 1) throw UsageError("--contour-grid must be at least 1");
  RunLog log(a.run_log.empty() ? a.out + ".runlog.json" : a.run_log, "evaluate", argv);
  log.set_resolved({{"model", a.model},
                    {"reference", a.reference},
                    {"bins", a.bins},
                    {"min_count", a.min_count},
                    {"standardize", a.standardize},
                    {"ci_resamples", a.ci_resamples},
                    {"ci_seed", a.ci_seed},
                    {"contour_grid", a.contour_grid}});

  const auto model = read_samples_csv(a.model);
  const auto reference = read_samples_csv(a.reference);
  const auto edges = uniform_edges(a.bins);
  const EwdOptions opts{a.min_count, a.standardize};
  auto report = ewd(model, reference, edges, opts);
  if (a.ci_resamples > 0) report.ci = bootstrap_ci(model, reference, edges, a.ci_resamples, a.ci_seed, opts);
  write_text(a.out, report.to_json() + "\n");
  json outputs = json::array({a.out});
  if (!a.contour_out.empty()) {
    write_text(a.contour_out, contour_json(model, reference, edges, a.contour_grid).dump(2) + "\n");
    outputs.push_back(a.contour_out);
  }
  log.doc()["outputs"] = outputs;
  log.doc()["result"] = {{"ewd", report.ewd}};
  log.finish("ok");
  out << "ewd = " << exact(report.ewd);
  if (report.ci) out << " (95% CI " << report.ci->low << " .. " << report.ci->high << ")";
  out << "\n";
  return kExitOk;
}

struct BenchArgs {
  ModelFlags model;
  long long trajectories = 5;
  std::uint64_t seed = 0;
  std::string out, emulator_times, run_log;
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.trajectories < 1) throw UsageError("-m must be at least 1");
  const auto r = resolve(a.model, a.seed);
  check_rho(r.params.rho, a.model.allow_out_of_range);
  std::optional<std::vector<double>> emulator;
  if (!a.emulator_times.empty()) emulator = read_timings(a.emulator_times);
  RunLog log(a.run_log.empty() ? a.out + ".runlog.json" : a.run_log, "bench", argv);
  log.set_resolved(resolved_json(r));

  std::vector<double> ms;
  std::uint64_t steps_total = 0;
  const std::uint64_t per_step = LcaEngine(r.params, r.run).cell_updates_per_step();
  for (long long k = 0; k < a.trajectories; ++k) {
    auto cfg = r.run;
    cfg.seed = r.run.seed + static_cast<std::uint64_t>(k);
    std::uint64_t steps = 0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(r.params, cfg, steps);
    } catch (const DegenerateRun&) {
      // still a complete trajectory for timing purposes
      steps = cfg.max_steps;
    }
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    steps_total += steps;
  }

  json report;
  report["schema"] = "cgne.bench/1";
  report["trajectories"] = a.trajectories;
  report["lca"] = timing_summary(ms);
  report["work"] = {{"steps_total", steps_total},
                    {"cell_updates_per_step", per_step},
                    {"cell_updates_total", steps_total * per_step}};
  if (emulator) {
    report["emulator"] = timing_summary(*emulator);
    report["median_ratio_lca_over_emulator"] = quantile(ms, 0.5) / quantile(*emulator, 0.5);
  }
  report["config"] = resolved_json(r);
  write_text(a.out, report.dump(2) + "\n");
  log.doc()["outputs"] = {a.out};
  log.doc()["result"] = {{"median_ms", quantile(ms, 0.5)}};
  log.finish("ok");
  out << "median " << quantile(ms, 0.5) << " ms over " << a.trajectories << " trajectories\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Snow-crystal automaton toolkit: simulate, generate datasets, measure and compare morphologies"};
  app.name("cgne");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one trajectory");
  add_model_flags(simulate, sim.model, true);
  simulate->add_option("--seed", sim.seed, "Run seed");
  simulate->add_option("--out", sim.out, "Trajectory file to write")->required();
  simulate->add_option("--pgm-dir", sim.pgm_dir, "Also render every frame as PGM into this directory");
  simulate->add_option("--pgm-scale", sim.pgm_scale, "Pixels per cell for PGM frames");
  simulate->add_option("--run-log", sim.run_log, "Run-log path (default: <out>.runlog.json)");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a dataset with rho ~ U(rho-lo, rho-hi)");
  add_model_flags(generate, gen.model, false);
  generate->add_option("-n,--count", gen.count, "Number of trajectories")->required();
  generate->add_option("--seed", gen.master_seed, "Master seed");
  generate->add_option("--rho-lo", gen.rho_lo, "Lower end of the rho range");
  generate->add_option("--rho-hi", gen.rho_hi, "Upper end of the rho range");
  generate->add_flag("--allow-out-of-range", gen.model.allow_out_of_range, "Accept a rho range beyond [0.35, 0.65]");
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--run-log", gen.run_log, "Run-log path (default: <out>/runlog.json)");

  FeaturesArgs feat;
  auto* feats = app.add_subcommand("features", "Measure final-frame area and boundary length");
  feats->add_option("--manifest", feat.manifest, "Dataset manifest");
  feats->add_option("--trajectory", feat.trajectories, "Trajectory file (repeatable), instead of --manifest");
  feats->add_option("--out", feat.out, "CSV to write")->required();
  feats->add_option("--run-log", feat.run_log, "Run-log path (default: <out>.runlog.json)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Expected Wasserstein distance between two morphology CSVs");
  evaluate->add_option("--model", ev.model, "Model samples CSV")->required();
  evaluate->add_option("--reference", ev.reference, "Reference samples CSV")->required();
  evaluate->add_option("--out", ev.out, "Report JSON to write")->required();
  evaluate->add_option("--bins", ev.bins, "Equal-width rho bins over [0.35, 0.65]");
  evaluate->add_option("--min-count", ev.min_count, "Minimum samples per bin and side");
  evaluate->add_flag("--standardize", ev.standardize, "z-score by pooled reference statistics");
  evaluate->add_option("--ci-resamples", ev.ci_resamples, "Bootstrap resamples for a 95% interval (0 = off)");
  evaluate->add_option("--ci-seed", ev.ci_seed, "Bootstrap seed");
  evaluate->add_option("--contour-out", ev.contour_out, "Also write per-bin density grids as JSON");
  evaluate->add_option("--contour-grid", ev.contour_grid, "Density grid resolution per axis");
  evaluate->add_option("--run-log", ev.run_log, "Run-log path (default: <out>.runlog.json)");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time full LCA trajectories");
  add_model_flags(bench, bn.model, true);
  bench->add_option("-m,--trajectories", bn.trajectories, "Number of timed trajectories");
  bench->add_option("--seed", bn.seed, "Seed of the first trajectory (then +1, +2, ...)");
  bench->add_option("--emulator-times", bn.emulator_times, "Emulator timing log (ms per trajectory, one per line)");
  bench->add_option("--out", bn.out, "Report JSON to write")->required();
  bench->add_option("--run-log", bn.run_log, "Run-log path (default: <out>.runlog.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun 'cgne --help' or 'cgne <command> --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, args, out);
    if (generate->parsed()) return cmd_generate(gen, args, out);
    if (feats->parsed()) return cmd_features(feat, args, out);
    if (evaluate->parsed()) return cmd_evaluate(ev, args, out);
    if (bench->parsed()) return cmd_bench(bn, args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cgne::cli
