#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace dforms {

/// Counter-based generator (Philox4x32-10). Every draw is a pure function of
/// (seed, sample index, stream, position), so a sample's values never depend on
/// how the index range was split between workers.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t stream,
                                     std::uint32_t position) const {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index),
                                     static_cast<std::uint32_t>(index >> 32), stream, position};
    std::array<std::uint32_t, 2> key = key_;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

  /// Uniforms in the open interval (0, 1).
  void uniforms(std::uint64_t index, std::uint32_t stream, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); i += 2) {
      const auto b = block(index, stream, static_cast<std::uint32_t>(i / 2));
      out[i] = to_unit(b[0], b[1]);
      if (i + 1 < out.size()) out[i + 1] = to_unit(b[2], b[3]);
    }
  }

  /// Standard normal variates via Box-Muller on consecutive uniform pairs.
  void normals(std::uint64_t index, std::uint32_t stream, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); i += 2) {
      const auto b = block(index, stream, static_cast<std::uint32_t>(i / 2));
      const double u1 = to_unit(b[0], b[1]);
      const double u2 = to_unit(b[2], b[3]);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double t = 2.0 * std::numbers::pi * u2;
      out[i] = r * std::cos(t);
      if (i + 1 < out.size()) out[i + 1] = r * std::sin(t);
    }
  }

 private:
  static double to_unit(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  std::array<std::uint32_t, 2> key_;
};

}  // namespace dforms
