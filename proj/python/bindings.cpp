#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cgne/dataset.hpp"
#include "cgne/error.hpp"
#include "cgne/lca.hpp"
#include "cgne/morphology.hpp"
#include "cgne/transport.hpp"
#include "cli.hpp"

namespace py = pybind11;
using namespace cgne;

namespace {

using FrameArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

py::array_t<std::uint8_t> frames_to_array(const Trajectory& t) {
  const auto side = static_cast<py::ssize_t>(t.side);
  py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(t.frames.size()), side, side});
  auto* dst = out.mutable_data();
  for (const auto& f : t.frames) dst = std::copy(f.cells().begin(), f.cells().end(), dst);
  return out;
}

std::vector<WedgeGrid> frames_from_array(const FrameArray& a) {
  if (a.ndim() != 3 || a.shape(1) != a.shape(2)) throw InvalidArgument("frames must have shape (T, side, side)");
  const auto side = static_cast<int>(a.shape(1));
  const auto n = static_cast<std::size_t>(side) * side;
  std::vector<WedgeGrid> frames;
  for (py::ssize_t k = 0; k < a.shape(0); ++k) {
    const auto* src = a.data(k, 0, 0);
    std::vector<std::uint8_t> cells(n);
    for (std::size_t x = 0; x < n; ++x) cells[x] = src[x] != 0;
    frames.emplace_back(side, std::move(cells));
  }
  return frames;
}

EmpiricalJoint joint_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw InvalidArgument("points must have shape (n, 2)");
  EmpiricalJoint j;
  for (py::ssize_t k = 0; k < a.shape(0); ++k) j.points.push_back({a.at(k, 0), a.at(k, 1)});
  return j;
}

std::vector<MorphologySample> samples_from(const py::iterable& items) {
  std::vector<MorphologySample> out;
  for (const auto& item : items) {
    if (py::isinstance<MorphologySample>(item)) {
      out.push_back(item.cast<MorphologySample>());
    } else {
      const auto t = item.cast<std::tuple<double, std::int64_t, std::int64_t>>();
      out.push_back({std::get<0>(t), std::get<1>(t), std::get<2>(t)});
    }
  }
  return out;
}

std::vector<double> edges_or_default(const std::optional<std::vector<double>>& edges) {
  return edges ? *edges : uniform_edges();
}

KeyValues shipped_defaults() {
  std::istringstream is(cli::defaults_text());
  return parse_key_values(is);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Snow-crystal automaton, morphology features and transport metrics";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<SymmetryViolation>(m, "SymmetryViolation", error);
  py::register_exception<DegenerateRun>(m, "DegenerateRun", error);
  auto format = py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<TruncationError>(m, "TruncationError", format);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", error);
  py::register_exception<SolverError>(m, "SolverError", error);
  py::register_exception<UnderpopulatedBin>(m, "UnderpopulatedBin", error);

  py::enum_<BoundaryMode>(m, "BoundaryMode")
      .value("reservoir", BoundaryMode::reservoir)
      .value("sealed", BoundaryMode::sealed);
  py::enum_<WedgeEdges>(m, "WedgeEdges").value("mirror", WedgeEdges::mirror).value("rotational", WedgeEdges::rotational);
  py::enum_<TrajectorySource>(m, "TrajectorySource")
      .value("lca", TrajectorySource::lca)
      .value("emulator", TrajectorySource::emulator);

  py::class_<LcaParams>(m, "LcaParams")
      .def(py::init<>())
      .def_readwrite("rho", &LcaParams::rho)
      .def_readwrite("beta_attach", &LcaParams::beta_attach)
      .def_readwrite("alpha", &LcaParams::alpha)
      .def_readwrite("theta_vapor", &LcaParams::theta_vapor)
      .def_readwrite("kappa", &LcaParams::kappa)
      .def_readwrite("mu", &LcaParams::mu)
      .def_readwrite("gamma_melt", &LcaParams::gamma_melt)
      .def_readwrite("sigma_noise", &LcaParams::sigma_noise)
      .def("to_list", [](const LcaParams& p) {
        const auto a = p.to_array();
        return std::vector<double>(a.begin(), a.end());
      })
      .def_static("from_list", [](const std::vector<double>& v) { return LcaParams::from_array(v); })
      .def("validate", &LcaParams::validate)
      .def(py::self == py::self)
      .def("__repr__", [](const LcaParams& p) {
        std::ostringstream os;
        os << "LcaParams(";
        const auto a = p.to_array();
        for (std::size_t k = 0; k < a.size(); ++k) os << (k ? ", " : "") << LcaParams::kNames[k] << "=" << a[k];
        return os.str() + ")";
      });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("side", &RunConfig::side)
      .def_readwrite("max_steps", &RunConfig::max_steps)
      .def_readwrite("snapshot_every", &RunConfig::snapshot_every)
      .def_readwrite("halt_margin", &RunConfig::halt_margin)
      .def_readwrite("boundary_mode", &RunConfig::boundary_mode)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("edges", &RunConfig::edges)
      .def_readwrite("workers", &RunConfig::workers)
      .def("validate", &RunConfig::validate);

  m.def(
      "default_params",
      [](double rho) {
        LcaParams p;
        apply_key_values(shipped_defaults(), p);
        p.rho = rho;
        return p;
      },
      py::arg("rho") = 0.5, "Shipped default parameters with the given rho.");
  m.def(
      "default_run_config",
      []() {
        RunConfig cfg;
        apply_key_values(shipped_defaults(), cfg);
        return cfg;
      },
      "Shipped default run configuration.");

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](const FrameArray& frames, const LcaParams& params, std::uint64_t seed,
                       std::uint32_t snapshot_every, TrajectorySource source, WedgeEdges edges) {
             Trajectory t;
             t.frames = frames_from_array(frames);
             t.side = t.frames.empty() ? static_cast<int>(frames.shape(1)) : t.frames.front().side();
             t.params = params;
             t.seed = seed;
             t.snapshot_every = snapshot_every;
             t.source = source;
             t.edges = edges;
             return t;
           }),
           py::arg("frames"), py::arg("params"), py::arg("seed") = 0, py::arg("snapshot_every") = 1,
           py::arg("source") = TrajectorySource::lca, py::arg("edges") = WedgeEdges::mirror)
      .def_readonly("side", &Trajectory::side)
      .def_readwrite("params", &Trajectory::params)
      .def_readwrite("seed", &Trajectory::seed)
      .def_readwrite("snapshot_every", &Trajectory::snapshot_every)
      .def_readwrite("source", &Trajectory::source)
      .def_readwrite("edges", &Trajectory::edges)
      .def_property_readonly("frames", &frames_to_array, "Frames as a (T, side, side) uint8 array.")
      .def("__len__", [](const Trajectory& t) { return t.frames.size(); })
      .def("validate", &Trajectory::validate)
      .def(py::self == py::self);

  m.def(
      "run",
      [](const LcaParams& p, const RunConfig& cfg) {
        py::gil_scoped_release release;
        return run(p, cfg);
      },
      py::arg("params"), py::arg("config"), "Simulate one trajectory.");

  m.def(
      "encode_trajectory",
      [](const Trajectory& t) {
        const auto b = encode_trajectory(t);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      },
      py::arg("trajectory"));
  m.def(
      "decode_trajectory",
      [](const py::bytes& data) {
        const std::string s = data;
        return decode_trajectory(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      },
      py::arg("data"));
  m.def("write_trajectory", &write_trajectory, py::arg("trajectory"), py::arg("path"));
  m.def("read_trajectory", &read_trajectory, py::arg("path"));
  m.def("trajectory_file_size", &trajectory_file_size, py::arg("side"), py::arg("frame_count"));
  m.def("downsample", &downsample, py::arg("trajectory"), py::arg("factor"));

  py::class_<MorphologySample>(m, "MorphologySample")
      .def(py::init([](double rho, std::int64_t area, std::int64_t boundary) {
             return MorphologySample{rho, area, boundary};
           }),
           py::arg("rho"), py::arg("area"), py::arg("boundary_length"))
      .def_readwrite("rho", &MorphologySample::rho)
      .def_readwrite("area", &MorphologySample::area)
      .def_readwrite("boundary_length", &MorphologySample::boundary_length)
      .def(py::self == py::self)
      .def("__repr__", [](const MorphologySample& s) {
        return "MorphologySample(rho=" + std::to_string(s.rho) + ", area=" + std::to_string(s.area) +
               ", boundary_length=" + std::to_string(s.boundary_length) + ")";
      });

  m.def("features", &features, py::arg("trajectory"), "Area and boundary length of the reconstructed final frame.");
  m.def(
      "reconstruct",
      [](const FrameArray& frame, WedgeEdges edges) {
        if (frame.ndim() != 2 || frame.shape(0) != frame.shape(1))
          throw InvalidArgument("frame must have shape (side, side)");
        const auto side = static_cast<int>(frame.shape(0));
        std::vector<std::uint8_t> cells(frame.data(), frame.data() + frame.size());
        for (auto& c : cells) c = c != 0;
        const auto mask = reconstruct_full(WedgeGrid(side, std::move(cells)), edges);
        const auto w = static_cast<py::ssize_t>(2 * mask.radius() + 1);
        py::array_t<std::uint8_t> out({w, w});
        std::copy(mask.raw().begin(), mask.raw().end(), out.mutable_data());
        return out;
      },
      py::arg("frame"), py::arg("edges") = WedgeEdges::mirror,
      "Full hexagonal crystal of one wedge frame, indexed [i + r, j + r].");

  m.def(
      "w2",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& q) {
        return w2(joint_from_array(p), joint_from_array(q));
      },
      py::arg("p"), py::arg("q"), "Exact W2 between two uniform point clouds of shape (n, 2).");
  m.def("uniform_edges", &uniform_edges, py::arg("bins") = 10, py::arg("lo") = kRhoMin, py::arg("hi") = kRhoMax);

  m.def(
      "ewd",
      [](const py::iterable& model, const py::iterable& reference, std::optional<std::vector<double>> edges,
         std::size_t min_count, bool standardize, std::size_t ci_resamples, std::uint64_t ci_seed) {
        const auto e = edges_or_default(edges);
        const auto a = samples_from(model), b = samples_from(reference);
        const EwdOptions opts{min_count, standardize};
        auto report = ewd(a, b, e, opts);
        if (ci_resamples > 0) report.ci = bootstrap_ci(a, b, e, ci_resamples, ci_seed, opts);
        return py::module_::import("json").attr("loads")(report.to_json());
      },
      py::arg("model"), py::arg("reference"), py::arg("edges") = py::none(), py::arg("min_count") = 5,
      py::arg("standardize") = false, py::arg("ci_resamples") = 0, py::arg("ci_seed") = 0,
      "Expected W2 over rho bins; returns the report as a dict.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a cgne command in-process; returns (exit_code, stdout, stderr).");
}
