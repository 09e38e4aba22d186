#include "cgne/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cgne/error.hpp"

namespace cgne {

std::array<AxialCoord, 6> hex_neighbors(AxialCoord c) {
  std::array<AxialCoord, 6> out;
  for (std::size_t k = 0; k < kHexDirections.size(); ++k) out[k] = c + kHexDirections[k];
  return out;
}

std::string to_string(WedgeEdges e) { return e == WedgeEdges::mirror ? "mirror" : "rotational"; }

WedgeEdges wedge_edges_from_string(const std::string& s) {
  if (s == "mirror") return WedgeEdges::mirror;
  if (s == "rotational") return WedgeEdges::rotational;
  throw InvalidArgument("unknown wedge edge rule '" + s + "' (expected mirror or rotational)");
}

LatticeTransform LatticeTransform::then(const LatticeTransform& n) const {
  return {n.a * a + n.b * c, n.a * b + n.b * d, n.c * a + n.d * c, n.c * b + n.d * d};
}

namespace {

std::vector<LatticeTransform> closure(std::initializer_list<LatticeTransform> generators) {
  std::vector<LatticeTransform> group{LatticeTransform{}};
  for (std::size_t k = 0; k < group.size(); ++k) {
    for (const auto& g : generators) {
      const auto next = group[k].then(g);
      if (std::find(group.begin(), group.end(), next) == group.end()) group.push_back(next);
    }
  }
  return group;
}

bool within_one_step(AxialCoord c, int side) {
  auto inside = [side](AxialCoord p) { return p.i >= 0 && p.j >= 0 && p.i < side && p.j < side; };
  if (inside(c)) return true;
  return std::any_of(kHexDirections.begin(), kHexDirections.end(),
                     [&](AxialCoord d) { return inside(c - d); });
}

}  // namespace

const std::vector<LatticeTransform>& wedge_symmetry_group(WedgeEdges edges) {
  static const auto dihedral = closure({kMirrorI, kMirrorJ});
  static const auto cyclic = closure({kRotate60});
  return edges == WedgeEdges::mirror ? dihedral : cyclic;
}

bool in_canonical_sector(AxialCoord c, WedgeEdges edges) {
  if (edges == WedgeEdges::mirror) return c.i >= 0 && c.j >= 0;
  return (c.i == 0 && c.j == 0) || (c.i >= 1 && c.j >= 0);
}

std::optional<AxialCoord> fold_into_wedge(AxialCoord c, int side, WedgeEdges edges) {
  if (!within_one_step(c, side)) {
    throw InvalidArgument("coordinate (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                          ") is more than one step outside the wedge");
  }
  for (const auto& g : wedge_symmetry_group(edges)) {
    const AxialCoord p = g.apply(c);
    if (in_canonical_sector(p, edges)) {
      if (p.i >= side || p.j >= side) return std::nullopt;
      return p;
    }
  }
  // Unreachable: the canonical sector is a fundamental domain of the group.
  throw Error("fold_into_wedge: no symmetric representative found");
}

int orbit_size(AxialCoord c, WedgeEdges edges) {
  if (!in_canonical_sector(c, edges)) return 0;
  std::vector<AxialCoord> images;
  for (const auto& g : wedge_symmetry_group(edges)) images.push_back(g.apply(c));
  std::sort(images.begin(), images.end());
  return static_cast<int>(std::unique(images.begin(), images.end()) - images.begin());
}

WedgeGrid::WedgeGrid(int side) : WedgeGrid(side, {}) {}

WedgeGrid::WedgeGrid(int side, std::vector<std::uint8_t> cells) : side_(side), cells_(std::move(cells)) {
  if (side <= 0) throw InvalidArgument("wedge side must be positive");
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  if (cells_.empty()) cells_.assign(n, 0);
  if (cells_.size() != n) throw InvalidArgument("wedge cell count does not match side*side");
  for (auto& v : cells_) v = v ? 1 : 0;
}

std::size_t WedgeGrid::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool WedgeGrid::subset_of(const WedgeGrid& other) const {
  if (other.side_ != side_) return false;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (cells_[k] && !other.cells_[k]) return false;
  }
  return true;
}

HexMask::HexMask(int radius) : radius_(radius) {
  if (radius < 0) throw InvalidArgument("mask radius must be nonnegative");
  const auto w = static_cast<std::size_t>(2 * radius + 1);
  cells_.assign(w * w, 0);
}

void HexMask::set(AxialCoord c, bool v) {
  if (!contains(c)) throw InvalidArgument("coordinate outside the mask window");
  cells_[offset(c)] = v ? 1 : 0;
}

std::vector<AxialCoord> HexMask::attached_cells() const {
  std::vector<AxialCoord> out;
  for (int i = -radius_; i <= radius_; ++i) {
    for (int j = -radius_; j <= radius_; ++j) {
      if (cells_[offset({i, j})]) out.push_back({i, j});
    }
  }
  return out;
}

HexMask reconstruct_full(const WedgeGrid& wedge, WedgeEdges edges) {
  const int side = wedge.side();
  HexMask mask(2 * side + 1);
  HexMask assigned(2 * side + 1);
  const auto& group = wedge_symmetry_group(edges);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const bool v = wedge.at(i, j);
      for (const auto& g : group) {
        const AxialCoord p = g.apply({i, j});
        if (assigned.at(p)) {
          if (mask.at(p) != v) {
            throw SymmetryViolation("wedge images disagree at (" + std::to_string(p.i) + "," +
                                    std::to_string(p.j) + ")");
          }
          continue;
        }
        assigned.set(p, true);
        mask.set(p, v);
      }
    }
  }
  return mask;
}

Image render_cartesian(const HexMask& mask, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("render scale must be positive");
  static const double kHalfRoot3 = std::sqrt(3.0) / 2.0;
  const double r = mask.radius();
  const int half_w = static_cast<int>(std::ceil((1.5 * r + 1.0) * scale));
  const int half_h = static_cast<int>(std::ceil((kHalfRoot3 * r + 1.0) * scale));
  Image img;
  img.width = 2 * half_w + 1;
  img.height = 2 * half_h + 1;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);

  for (int py = 0; py < img.height; ++py) {
    const double y = (half_h - py) / scale;
    const double fj = y / kHalfRoot3;
    for (int px = 0; px < img.width; ++px) {
      const double x = (px - half_w) / scale;
      const double fi = x - fj / 2.0;
      // Cube rounding picks the hexagon whose center is nearest.
      const double fk = -fi - fj;
      double ri = std::round(fi), rj = std::round(fj), rk = std::round(fk);
      const double di = std::abs(ri - fi), dj = std::abs(rj - fj), dk = std::abs(rk - fk);
      if (di > dj && di > dk) {
        ri = -rj - rk;
      } else if (dj > dk) {
        rj = -ri - rk;
      }
      if (mask.at({static_cast<int>(ri), static_cast<int>(rj)})) {
        img.pixels[static_cast<std::size_t>(py) * img.width + px] = 255;
      }
    }
  }
  return img;
}

std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  const auto bytes = encode_pgm(img);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path);
}

}  // namespace cgne
