#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace mimoee {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (counter, key): trial k of a simulation always sees the
// same numbers no matter how trials are split across workers.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream tags occupying the last counter word, so independent uses of the
/// same (seed, trial) never share random bits.
enum class Stream : std::uint32_t { kChannel = 0, kAllocation = 1, kAux = 2 };

/// Maps 64 random bits to a double strictly inside (0, 1).
inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Random block addressed by (seed, trial, index, stream): two 64-bit words.
inline std::array<std::uint64_t, 2> random_block(std::uint64_t seed, std::uint64_t trial,
                                                 std::uint32_t index, Stream stream) noexcept {
  const Philox4x32::Counter ctr{index, static_cast<std::uint32_t>(trial),
                                static_cast<std::uint32_t>(trial >> 32),
                                static_cast<std::uint32_t>(stream)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::generate(ctr, key);
  return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
}

/// Unit-variance circular complex Gaussian via Box-Muller on one block:
/// radius sqrt(-ln u1), angle 2 pi u2, so real and imaginary parts each have
/// variance 1/2.
inline std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t trial,
                                             std::uint32_t index,
                                             Stream stream = Stream::kChannel) noexcept {
  const auto [a, b] = random_block(seed, trial, index, stream);
  const double radius = std::sqrt(-std::log(open_unit(a)));
  const double angle = 2.0 * std::numbers::pi * open_unit(b);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Uniform draw in (0, 1) from the first word of a block.
inline double uniform(std::uint64_t seed, std::uint64_t trial, std::uint32_t index,
                      Stream stream = Stream::kAux) noexcept {
  return open_unit(random_block(seed, trial, index, stream)[0]);
}

}  // namespace mimoee
