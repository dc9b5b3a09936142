#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random numbers (Philox4x32-10). Every draw is a pure
// function of (seed, stream, index), so substreams can be evaluated in
// any order and from any thread without changing the result.

namespace pong {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  const std::uint64_t p0 = m0 * ctr[0];
  const std::uint64_t p1 = m1 * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
  std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(key),
                                    static_cast<std::uint32_t>(key >> 32)};
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    detail::philox_round(ctr, k);
  }
  return ctr;
}

/// One keyed substream of the generator. `stream` separates independent
/// consumers (finger index, restart index, test case id); `index` is the
/// draw counter within the stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  /// Four raw 32-bit words for draw `index`.
  std::array<std::uint32_t, 4> words(std::uint64_t index) const {
    return philox4x32(seed_,
                      {static_cast<std::uint32_t>(index),
                       static_cast<std::uint32_t>(index >> 32),
                       static_cast<std::uint32_t>(stream_),
                       static_cast<std::uint32_t>(stream_ >> 32)});
  }

  /// Two uniforms in the open interval (0,1).
  std::array<double, 2> uniform_pair(std::uint64_t index) const {
    const auto w = words(index);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  double uniform(std::uint64_t index) const { return uniform_pair(index)[0]; }

  /// Uniform integer in [0, n) by scaling; adequate bias for n << 2^64.
  std::uint64_t uniform_below(std::uint64_t index, std::uint64_t n) const {
    const auto w = words(index);
    const std::uint64_t x =
        (static_cast<std::uint64_t>(w[0]) << 32) | static_cast<std::uint64_t>(w[1]);
    return x % n;
  }

  /// Standard normal pair via Box-Muller.
  std::array<double, 2> normal_pair(std::uint64_t index) const {
    const auto u = uniform_pair(index);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double phi = 2.0 * M_PI * u[1];
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  double normal(std::uint64_t index) const { return normal_pair(index)[0]; }

  /// Deterministically derived seed for a child stream.
  std::uint64_t derive(std::uint64_t salt) const {
    const auto w = philox4x32(seed_, {static_cast<std::uint32_t>(salt),
                                      static_cast<std::uint32_t>(salt >> 32),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)});
    return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x =
        (static_cast<std::uint64_t>(hi) << 32) | static_cast<std::uint64_t>(lo);
    // 53 mantissa bits, offset keeps the value strictly inside (0,1).
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace pong
