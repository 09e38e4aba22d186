#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgne {

/// Axial hex-lattice coordinate. The i axis points along Cartesian x and the
/// j axis 60 degrees above it; Cartesian position is (i + j/2, j*sqrt(3)/2).
struct AxialCoord {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const AxialCoord&, const AxialCoord&) = default;
  AxialCoord operator+(AxialCoord o) const { return {i + o.i, j + o.j}; }
  AxialCoord operator-(AxialCoord o) const { return {i - o.i, j - o.j}; }
};

/// Neighbor order used everywhere a sum or count over neighbors is taken:
/// E, W, N, S, NE, SW. Serialized states and floating-point summation order
/// both depend on it.
inline constexpr std::array<AxialCoord, 6> kHexDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}};

std::array<AxialCoord, 6> hex_neighbors(AxialCoord c);

/// How the two straight edges of the simulated wedge are closed.
///
/// mirror: reflect across both edges. The simulated sector {i >= 0, j >= 0}
/// is a fundamental domain of the dihedral group generated by the two
/// reflections (three rotations by 120 degrees plus three mirrors).
///
/// rotational: identify the edges by a 60 degree rotation. The canonical
/// domain is the half-open sector {i >= 1, j >= 0} plus the seed; cells
/// (0, k) with k >= 1 are stored aliases of (k, 0).
enum class WedgeEdges : std::uint8_t { mirror, rotational };

std::string to_string(WedgeEdges e);
WedgeEdges wedge_edges_from_string(const std::string& s);

/// Integer linear map of the lattice, (i, j) -> (a*i + b*j, c*i + d*j).
struct LatticeTransform {
  int a = 1, b = 0, c = 0, d = 1;

  AxialCoord apply(AxialCoord p) const { return {a * p.i + b * p.j, c * p.i + d * p.j}; }
  LatticeTransform then(const LatticeTransform& next) const;
  friend bool operator==(const LatticeTransform&, const LatticeTransform&) = default;
};

/// Rotation by 60 degrees counter-clockwise.
inline constexpr LatticeTransform kRotate60{0, -1, 1, 1};
/// Reflection across the i axis.
inline constexpr LatticeTransform kMirrorI{1, 1, 0, -1};
/// Reflection across the j axis.
inline constexpr LatticeTransform kMirrorJ{-1, 0, 1, 1};

/// Symmetry group whose fundamental domain is the wedge for the given edge rule.
const std::vector<LatticeTransform>& wedge_symmetry_group(WedgeEdges edges);

/// True when c lies in the canonical (infinite) sector for the edge rule.
bool in_canonical_sector(AxialCoord c, WedgeEdges edges);

/// Maps a coordinate at most one hex step outside the side x side wedge to
/// its symmetric representative in the canonical sector.
///
/// Returns std::nullopt when the representative lies beyond the far edges
/// (an index >= side); such cells are outside the simulated domain.
/// Throws InvalidArgument for coordinates further than one step away.
std::optional<AxialCoord> fold_into_wedge(AxialCoord c, int side,
                                          WedgeEdges edges = WedgeEdges::mirror);

/// Number of distinct full-lattice cells represented by wedge cell c (1 for
/// the seed). Zero for rotational-mode aliases, which duplicate another cell.
int orbit_size(AxialCoord c, WedgeEdges edges);

/// Binary field over the side x side wedge, row-major in i then j:
/// index(i, j) = i * side + j.
class WedgeGrid {
 public:
  explicit WedgeGrid(int side);
  WedgeGrid(int side, std::vector<std::uint8_t> cells);

  int side() const { return side_; }
  std::size_t size() const { return cells_.size(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * side_ + j; }
  bool contains(AxialCoord c) const { return c.i >= 0 && c.j >= 0 && c.i < side_ && c.j < side_; }

  bool at(int i, int j) const { return cells_[index(i, j)] != 0; }
  bool at(AxialCoord c) const { return at(c.i, c.j); }
  void set(int i, int j, bool v) { cells_[index(i, j)] = v ? 1 : 0; }
  void set(AxialCoord c, bool v) { set(c.i, c.j, v); }

  std::span<const std::uint8_t> cells() const { return cells_; }
  std::size_t count() const;

  /// True when every set cell of *this is also set in other.
  bool subset_of(const WedgeGrid& other) const;

  friend bool operator==(const WedgeGrid&, const WedgeGrid&) = default;

 private:
  int side_;
  std::vector<std::uint8_t> cells_;
};

/// Binary mask over the full hex lattice, stored on the square axial window
/// [-radius, radius]^2. Reads outside the window return false.
class HexMask {
 public:
  explicit HexMask(int radius);

  int radius() const { return radius_; }
  bool contains(AxialCoord c) const {
    return c.i >= -radius_ && c.i <= radius_ && c.j >= -radius_ && c.j <= radius_;
  }
  bool at(AxialCoord c) const { return contains(c) && cells_[offset(c)] != 0; }
  void set(AxialCoord c, bool v);

  std::vector<AxialCoord> attached_cells() const;
  std::span<const std::uint8_t> raw() const { return cells_; }

  friend bool operator==(const HexMask&, const HexMask&) = default;

 private:
  std::size_t offset(AxialCoord c) const {
    const auto w = static_cast<std::size_t>(2 * radius_ + 1);
    return static_cast<std::size_t>(c.i + radius_) * w + static_cast<std::size_t>(c.j + radius_);
  }

  int radius_;
  std::vector<std::uint8_t> cells_;
};

/// Tiles the full lattice with the symmetric images of the wedge.
/// Throws SymmetryViolation when two images disagree on a shared cell.
HexMask reconstruct_full(const WedgeGrid& wedge, WedgeEdges edges = WedgeEdges::mirror);

/// 8-bit grayscale raster, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Rasterizes attached cells as filled hexagons (255 on 0). The lattice
/// origin maps to pixel (width / 2, height / 2); Cartesian y points up.
/// The image size depends only on the mask window and the scale.
Image render_cartesian(const HexMask& mask, double scale);

/// Binary PGM ("P5", maxval 255).
std::string encode_pgm(const Image& img);
void write_pgm(const Image& img, const std::string& path);

}  // namespace cgne
