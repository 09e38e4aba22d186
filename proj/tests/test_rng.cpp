#include <cmath>
#include <set>

#include "doctest.h"

#include "cgne/rng.hpp"

using cgne::philox4x32;

// Known-answer vectors published with the Random123 library (kat_vectors).
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == cgne::PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        cgne::PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        cgne::PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed rng is a pure function of seed and address") {
  cgne::KeyedRng a(42), b(42), c(43);
  CHECK(a.bits64(3, 17) == b.bits64(3, 17));
  CHECK(a.bits64(3, 17) != c.bits64(3, 17));
  CHECK(a.bits64(3, 17) != a.bits64(3, 18));
  CHECK(a.bits64(3, 17) != a.bits64(4, 17));
  // bits64 is the low two words of the block addressed by (index, stream).
  const auto blk = a.block(17, 0, 3, 0);
  CHECK(a.bits64(3, 17) == ((std::uint64_t{blk[1]} << 32) | blk[0]));
}

TEST_CASE("uniform draws lie in [0,1) with the right mean") {
  cgne::KeyedRng r(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(0, static_cast<std::uint64_t>(i));
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is sqrt(1/12/n) ~ 9.1e-4
  CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12.0 / n));
}
