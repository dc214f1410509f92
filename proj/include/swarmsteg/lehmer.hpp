#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "swarmsteg/bits.hpp"
#include "swarmsteg/errors.hpp"

// Permutation <-> integer <-> bit-chunk codec.
//
// Ranking follows lexicographic order: rank(p) counts the permutations
// that sort strictly before p.  Computed through the Lehmer code, where
// digit i is the number of elements right of position i that are smaller
// than p[i], weighted by (n-1-i)!.  Both sides of the channel must agree
// on this convention; it is part of the shared secret.
//
// A package over n addresses carries floor(log2 n!) bits, so only ranks
// below 2^capacity are usable.  Anything above that is outside the
// codebook and rejected.

namespace swarmsteg {

using Permutation = std::vector<std::uint8_t>;

constexpr unsigned kMinPermutationSize = 2;
constexpr unsigned kMaxPermutationSize = 20;  // 20! still fits in uint64

inline std::uint64_t factorial(unsigned n) {
  if (n > kMaxPermutationSize) throw DomainError("factorial: n out of range");
  std::uint64_t f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

inline unsigned capacity_bits(unsigned n) {
  if (n < kMinPermutationSize || n > kMaxPermutationSize)
    throw DomainError("capacity_bits: size must be in [2, 20], got " +
                      std::to_string(n));
  return std::bit_width(factorial(n)) - 1;
}

inline bool is_valid_permutation(const Permutation& p) {
  const auto n = p.size();
  if (n < kMinPermutationSize || n > kMaxPermutationSize) return false;
  std::uint32_t seen = 0;
  for (auto v : p) {
    if (v >= n || (seen >> v) & 1) return false;
    seen |= 1u << v;
  }
  return true;
}

inline std::uint64_t rank(const Permutation& p) {
  if (!is_valid_permutation(p))
    throw DomainError("rank: not a permutation of 0..n-1");
  const auto n = p.size();
  std::uint64_t r = 0;
  std::uint64_t weight = factorial(static_cast<unsigned>(n - 1));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    unsigned smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (p[j] < p[i]) ++smaller;
    r += smaller * weight;
    weight /= n - 1 - i;
  }
  return r;
}

inline Permutation unrank(unsigned n, std::uint64_t r) {
  if (n < kMinPermutationSize || n > kMaxPermutationSize)
    throw DomainError("unrank: size must be in [2, 20]");
  if (r >= factorial(n))
    throw DomainError("unrank: rank " + std::to_string(r) +
                      " out of range for size " + std::to_string(n));
  std::vector<std::uint8_t> pool;
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.push_back(static_cast<std::uint8_t>(i));

  Permutation p;
  p.reserve(n);
  std::uint64_t weight = factorial(n - 1);
  for (unsigned i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(r / weight);
    r %= weight;
    p.push_back(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    if (i + 1 < n) weight /= n - 1 - i;
  }
  return p;
}

// Chunk must be exactly capacity_bits(n) long, big-endian.
inline Permutation bits_to_permutation(const Bits& chunk, unsigned n) {
  const unsigned cap = capacity_bits(n);
  if (chunk.size() != cap)
    throw DomainError("bits_to_permutation: chunk must be " +
                      std::to_string(cap) + " bits, got " +
                      std::to_string(chunk.size()));
  return unrank(n, uint_from_bits_be(chunk, 0, cap));
}

inline Bits permutation_to_bits(const Permutation& p) {
  const auto n = static_cast<unsigned>(p.size());
  const unsigned cap = capacity_bits(n);
  const std::uint64_t r = rank(p);
  if (r >= (1ull << cap))
    throw OutOfCodebookError("permutation rank " + std::to_string(r) +
                                 " is outside the " + std::to_string(cap) +
                                 "-bit codebook",
                             0);
  Bits bits;
  bits.reserve(cap);
  append_uint_be(bits, r, cap);
  return bits;
}

// How many packages a secret needs and how many zero bits pad the last
// chunk.  Returns {package_count, pad_bits}.
inline std::pair<std::size_t, unsigned> pad_info(std::size_t secret_bits,
                                                 unsigned n) {
  if (secret_bits == 0) throw DomainError("pad_info: secret is empty");
  const unsigned cap = capacity_bits(n);
  const std::size_t packages = (secret_bits + cap - 1) / cap;
  return {packages, static_cast<unsigned>(packages * cap - secret_bits)};
}

}  // namespace swarmsteg
