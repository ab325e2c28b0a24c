#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each
// (key, counter) pair maps to four independent 32-bit words, so any
// (step, particle) cell of the noise field can be drawn directly, in any
// order, on any thread.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mflda {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Seeded source of standard normals addressed by (step, slot, domain).
class NoiseSource {
 public:
  enum class Domain : std::uint32_t { kStep = 0, kInit = 1 };

  explicit NoiseSource(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Two independent N(0, 1) draws (one per coordinate) for this cell.
  std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t slot,
                                        Domain domain = Domain::kStep) const noexcept {
    const PhiloxCounter out = philox4x32_10(
        {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), slot,
         static_cast<std::uint32_t>(domain)},
        key_);
    // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
    const std::uint64_t w0 = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t w1 = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    const double u1 = (static_cast<double>(w0 >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  PhiloxKey key_;
};

}  // namespace mflda
