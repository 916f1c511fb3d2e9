#pragma once

// Counter-based generator (Philox4x32-10). Draw r of replicate j in stream s
// depends only on (seed, s, j, r), so Monte Carlo loops can be partitioned
// across threads in any way without changing a single draw.

#include <array>
#include <cstdint>

#include "pcombine/special.hpp"

namespace pcombine {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c,
                         const std::array<std::uint32_t, 2>& k) {
  constexpr std::uint64_t M0 = 0xD2511F53u;
  constexpr std::uint64_t M1 = 0xCD9E8D57u;
  const std::uint64_t p0 = M0 * c[0];
  const std::uint64_t p1 = M1 * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32_10(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t W0 = 0x9E3779B9u;
  constexpr std::uint32_t W1 = 0xBB67AE85u;
  detail::philox_round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += W0;
    key[1] += W1;
    detail::philox_round(ctr, key);
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an unrelated seed for an inner/auxiliary Monte Carlo layer so its
// draws are independent of the outer layer's.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t replicate, std::uint32_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        base_{0, stream, static_cast<std::uint32_t>(replicate),
              static_cast<std::uint32_t>(replicate >> 32)} {}

  std::uint64_t next_u64() {
    if (pos_ >= 2) refill();
    const std::uint64_t lo = buf_[2 * pos_];
    const std::uint64_t hi = buf_[2 * pos_ + 1];
    ++pos_;
    return (hi << 32) | lo;
  }

  // Strictly inside (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double normal() { return special::normal_quantile(uniform()); }

 private:
  void refill() {
    auto ctr = base_;
    ctr[0] = block_++;
    const auto out = philox4x32_10(ctr, key_);
    for (int i = 0; i < 4; ++i) buf_[i] = out[i];
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::uint32_t block_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int pos_ = 2;  // force refill on first use
};

}  // namespace pcombine
