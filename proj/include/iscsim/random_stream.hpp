// Copyright 2026 The iscsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISCSIM_RANDOM_STREAM_HPP
#define ISCSIM_RANDOM_STREAM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

/**
 * \file
 * \brief Stateless, counter-based random streams.
 *
 * Every draw is a pure function of (seed, stream id, counter). Encoder and
 * decoder regenerate the same proposal pool element by element without
 * storing it, and Monte-Carlo trials can run in any order.
 */

namespace iscsim {

__extension__ typedef unsigned __int128 uint128;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53U;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

  static constexpr Counter single_round(const Counter& ctr, const Key& key) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32U);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32U);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
};

/// Map 64 random bits to a double in the open interval (0, 1).
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11U) + 0.5) * 0x1.0p-53;
}

/// Inverse-CDF map from a uniform in (0,1) to Exp(1).
inline double exponential_from_uniform(double u) noexcept { return -std::log(u); }

/**
 * A keyed, stateless source of randomness.
 *
 * `seed` identifies the shared randomness of a run; `stream_id` separates
 * independent uses of it (exponentials, proposal samples, bin labels, trial
 * sources). Draws at counter `i` and lane `lane` never depend on any other
 * draw.
 */
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Derive an independent sub-stream; the result is a pure function of the inputs.
  [[nodiscard]] constexpr RandomStream child(std::uint64_t tag) const noexcept {
    return {seed, splitmix64(stream_id ^ splitmix64(tag + 0x632BE59BD9B4E019ULL))};
  }

  /// 128 random bits for counter `i`, lane `lane`.
  [[nodiscard]] constexpr std::array<std::uint64_t, 2> bits(std::uint64_t i,
                                                            std::uint32_t lane = 0) const noexcept {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(stream_id));
    const Philox4x32::Key key{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32U)};
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32U),
                                  lane, 0x5EEDU};
    const auto out = Philox4x32::apply(ctr, key);
    return {(static_cast<std::uint64_t>(out[0]) << 32U) | out[1],
            (static_cast<std::uint64_t>(out[2]) << 32U) | out[3]};
  }

  /// Uniform in (0, 1).
  [[nodiscard]] double uniform(std::uint64_t i, std::uint32_t lane = 0) const noexcept {
    return bits_to_open_unit(bits(i, lane)[0]);
  }

  /// Exp(1); strictly positive and finite.
  [[nodiscard]] double exponential(std::uint64_t i, std::uint32_t lane = 0) const noexcept {
    return exponential_from_uniform(uniform(i, lane));
  }

  /// Standard normal via Box-Muller on the two 64-bit halves.
  [[nodiscard]] double normal(std::uint64_t i, std::uint32_t lane = 0) const noexcept {
    const auto b = bits(i, lane);
    const double u1 = bits_to_open_unit(b[0]);
    const double u2 = bits_to_open_unit(b[1]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n), n >= 1. Uses 128-bit multiply-high; bias is below 2^-64 * n.
  [[nodiscard]] std::uint64_t below(std::uint64_t i, std::uint64_t n, std::uint32_t lane = 0) const noexcept {
    const auto r = bits(i, lane)[0];
    return static_cast<std::uint64_t>((static_cast<uint128>(r) * n) >> 64U);
  }
};

/// Exp(1) draw S_i of a stream, with the one-based index convention of the pool.
inline double exp_draw(const RandomStream& stream, std::uint64_t i) noexcept {
  return stream.exponential(i);
}

}  // namespace iscsim

#endif  // ISCSIM_RANDOM_STREAM_HPP
