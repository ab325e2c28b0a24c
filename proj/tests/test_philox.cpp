#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mflda/philox.hpp"

using namespace mflda;

// Known-answer vectors of the Random123 distribution (kat_vectors, philox4x32 10 rounds).
TEST_CASE("philox4x32-10 known answers") {
  static_assert(philox4x32_10({0, 0, 0, 0}, {0, 0})[0] == 0x6627e8d5u);

  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("noise cells are addressable and distinct") {
  const NoiseSource a(7), b(8);
  CHECK(a.normal_pair(3, 5) == a.normal_pair(3, 5));
  CHECK(a.normal_pair(3, 5) != b.normal_pair(3, 5));
  CHECK(a.normal_pair(3, 5) != a.normal_pair(5, 3));
  CHECK(a.normal_pair(0, 0) != a.normal_pair(0, 0, NoiseSource::Domain::kInit));
  // High word of the step participates in the counter.
  CHECK(a.normal_pair(1, 0) != a.normal_pair((std::uint64_t{1} << 32) | 1, 0));
  // High word of the seed participates in the key.
  CHECK(NoiseSource(1).normal_pair(0, 0) != NoiseSource((std::uint64_t{1} << 32) | 1).normal_pair(0, 0));
}

TEST_CASE("normal pairs have standard moments") {
  const NoiseSource noise(2024);
  const int count = 400000;
  double s1 = 0, s2 = 0, s4 = 0, cross = 0;
  bool finite = true;
  for (int k = 0; k < count; ++k) {
    const auto [x, y] = noise.normal_pair(static_cast<std::uint64_t>(k / 1000),
                                          static_cast<std::uint32_t>(k % 1000));
    finite = finite && std::isfinite(x) && std::isfinite(y);
    s1 += x + y;
    s2 += x * x + y * y;
    s4 += x * x * x * x + y * y * y * y;
    cross += x * y;
  }
  CHECK(finite);
  const double n = 2.0 * count;
  CHECK(std::abs(s1 / n) < 4 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1) < 4 * std::sqrt(2 / n));
  CHECK(std::abs(s4 / n - 3) < 4 * std::sqrt(96 / n));
  CHECK(std::abs(cross / count) < 4 / std::sqrt(count));
}
