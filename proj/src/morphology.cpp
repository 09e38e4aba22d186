#include "cgne/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cgne/error.hpp"

namespace cgne {

std::int64_t area(const HexMask& mask) {
  const auto raw = mask.raw();
  return std::count(raw.begin(), raw.end(), std::uint8_t{1});
}

std::int64_t boundary_length(const HexMask& mask) {
  // E, N and NE cover each unordered adjacent pair exactly once.
  static constexpr std::array<AxialCoord, 3> kHalf{{{1, 0}, {0, 1}, {1, -1}}};
  std::int64_t edges = 0;
  const int r = mask.radius() + 1;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      const bool here = mask.at({i, j});
      for (const auto d : kHalf) {
        if (here != mask.at({i + d.i, j + d.j})) ++edges;
      }
    }
  }
  return edges;
}

MorphologySample features(const Trajectory& traj) {
  if (traj.frames.empty()) throw InvalidArgument("features: empty trajectory");
  const auto full = reconstruct_full(traj.frames.back(), traj.edges);
  return {traj.params.rho, area(full), boundary_length(full)};
}

void write_samples_csv(std::ostream& os, const std::vector<MorphologySample>& samples) {
  os << "rho,area,boundary_length\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) os << s.rho << ',' << s.area << ',' << s.boundary_length << '\n';
}

void write_samples_csv(const std::string& path, const std::vector<MorphologySample>& samples) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_samples_csv(os, samples);
  if (!os) throw Error("failed writing " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double field_number(const std::string& s, int lineno) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw InvalidArgument("line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<MorphologySample> read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("CSV is empty (missing header)");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("CSV is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_rho = column("rho"), c_area = column("area"), c_bl = column("boundary_length");

  std::vector<MorphologySample> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields");
    }
    const double a = field_number(f[c_area], lineno), b = field_number(f[c_bl], lineno);
    if (a < 0 || b < 0 || a != std::floor(a) || b != std::floor(b)) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": area and boundary_length must be counts");
    }
    out.push_back({field_number(f[c_rho], lineno), static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)});
  }
  return out;
}

std::vector<MorphologySample> read_samples_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  return read_samples_csv(is);
}

}  // namespace cgne
