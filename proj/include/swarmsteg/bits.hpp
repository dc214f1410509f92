#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmsteg/errors.hpp"

namespace swarmsteg {

// One byte per bit, each 0 or 1.  Wasteful but keeps the chunking and
// padding logic trivial to read; secrets in this tool are small.
using Bits = std::vector<std::uint8_t>;

inline Bits bits_from_string(std::string_view s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '0')
      out.push_back(0);
    else if (c == '1')
      out.push_back(1);
    else if (c == ' ' || c == '\n' || c == '\r' || c == '\t')
      continue;
    else
      throw DomainError(std::string("bit string: unexpected character '") + c +
                        "'");
  }
  return out;
}

inline std::string bits_to_string(const Bits& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

// MSB-first within each byte.
inline Bits bits_from_bytes(std::span<const std::uint8_t> bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (auto byte : bytes)
    for (int i = 7; i >= 0; --i) out.push_back((byte >> i) & 1);
  return out;
}

inline std::vector<std::uint8_t> bits_to_bytes(const Bits& bits) {
  if (bits.size() % 8 != 0)
    throw DomainError("bit count is not a multiple of 8");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i / 8] = static_cast<std::uint8_t>((out[i / 8] << 1) | bits[i]);
  return out;
}

inline void append_uint_be(Bits& bits, std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;)
    bits.push_back(static_cast<std::uint8_t>((value >> i) & 1));
}

inline std::uint64_t uint_from_bits_be(const Bits& bits, std::size_t offset,
                                       unsigned width) {
  if (offset + width > bits.size())
    throw DomainError("bit range out of bounds");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | bits[offset + i];
  return v;
}

}  // namespace swarmsteg
