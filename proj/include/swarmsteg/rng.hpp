#pragma once

#include <cstdint>
#include <string_view>

#include "swarmsteg/errors.hpp"

// Every stochastic piece of the library draws from the generator below so
// that a seed pins byte-identical results on any platform.  The standard
// <random> distributions are not portable across library implementations,
// which is why the samplers here are spelled out by hand.
//
//   generator   xoshiro256** (Blackman & Vigna), state seeded by running
//               SplitMix64 from the user seed
//   sub-seeds   derive_seed() mixes a master seed with an FNV-1a 64 hash
//               of a textual key through SplitMix64
//   uniform     draw 64 bits, mask down to the next power of two, reject
//               and redraw until the value falls under the bound
//   bernoulli   next64() < floor(p * 2^64)
//   geometric   count Bernoulli(1/mean) trials until the first success
//
// All of it is integer arithmetic except the two thresholds, which are
// computed once from the double parameter.

namespace swarmsteg {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound).
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound == 0) throw DomainError("uniform: bound must be positive");
    if ((bound & (bound - 1)) == 0) return next64() & (bound - 1);
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t v;
    do {
      v = next64() & mask;
    } while (v >= bound);
    return v;
  }

  // Inclusive range, handles negative bounds.
  std::int64_t uniform_range(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw DomainError("uniform_range: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next64());  // full 64-bit range
    return lo + static_cast<std::int64_t>(uniform(span));
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    const auto threshold =
        static_cast<std::uint64_t>(p * 18446744073709551616.0);
    return next64() < threshold;
  }

  // Run length >= 1 with mean `mean`; trial counting keeps it integer-only.
  std::uint64_t geometric(double mean, std::uint64_t cap) {
    if (mean < 1.0) throw DomainError("geometric: mean must be >= 1");
    const double p = 1.0 / mean;
    std::uint64_t n = 1;
    while (n < cap && !bernoulli(p)) ++n;
    return n;
  }

  // One secret bit; the high bit of a fresh draw.
  std::uint8_t bit() { return static_cast<std::uint8_t>(next64() >> 63); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) {
  std::uint64_t sm = master ^ fnv1a64(key);
  splitmix64(sm);
  return splitmix64(sm);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t sm = master ^ (0x9e3779b97f4a7c15ull + index);
  splitmix64(sm);
  return splitmix64(sm);
}

}  // namespace swarmsteg
