#pragma once

#include <array>
#include <cstdint>

namespace cgne {

/// Philox4x32-10 counter-based generator (Salmon et al.).
///
/// Stateless: every output block is a pure function of (key, counter), so any
/// cell or resample can draw its numbers without touching shared state.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Keyed stream built on Philox. The 64-bit seed is the key; the remaining
/// three 32-bit counter words address the draw.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Four raw 32-bit words for the counter (a, b, c, d).
  PhiloxCounter block(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                      std::uint32_t d) const noexcept {
    return philox4x32({a, b, c, d}, key_);
  }

  /// 64 random bits addressed by (stream, index).
  std::uint64_t bits64(std::uint64_t stream, std::uint64_t index) const noexcept;

  /// Uniform double in [0, 1) with 53 random bits, addressed by (stream, index).
  double uniform(std::uint64_t stream, std::uint64_t index) const noexcept;

 private:
  PhiloxKey key_;
};

}  // namespace cgne
