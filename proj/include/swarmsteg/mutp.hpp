#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "swarmsteg/errors.hpp"

// Micro Transport Protocol header, version 1.  Fixed 20 bytes, every
// multi-byte field big-endian:
//
//   offset  field
//   0       type (high nibble) | version (low nibble)
//   1       extension
//   2       connection_id
//   4       timestamp_microseconds
//   8       timestamp_difference_microseconds
//   12      wnd_size
//   16      seq_nr
//   18      ack_nr

namespace swarmsteg {

enum class PacketType : std::uint8_t {
  Data = 0,
  Fin = 1,
  State = 2,
  Reset = 3,
  Syn = 4,
};

constexpr std::size_t kHeaderSize = 20;

inline std::string_view to_string(PacketType t) {
  switch (t) {
    case PacketType::Data: return "DATA";
    case PacketType::Fin: return "FIN";
    case PacketType::State: return "STATE";
    case PacketType::Reset: return "RESET";
    case PacketType::Syn: return "SYN";
  }
  throw DomainError("packet type out of range");
}

inline PacketType packet_type_from_string(std::string_view s) {
  if (s == "DATA") return PacketType::Data;
  if (s == "FIN") return PacketType::Fin;
  if (s == "STATE") return PacketType::State;
  if (s == "RESET") return PacketType::Reset;
  if (s == "SYN") return PacketType::Syn;
  throw DomainError("unknown packet type name: " + std::string(s));
}

struct MutpHeader {
  std::uint8_t version = 1;
  PacketType type = PacketType::Data;
  std::uint8_t extension = 0;
  std::uint16_t connection_id = 0;
  std::uint32_t timestamp_microseconds = 0;
  std::uint32_t timestamp_difference_microseconds = 0;
  std::uint32_t wnd_size = 0;
  std::uint16_t seq_nr = 0;
  std::uint16_t ack_nr = 0;

  bool operator==(const MutpHeader&) const = default;
};

inline std::array<std::uint8_t, kHeaderSize> encode_header(
    const MutpHeader& h) {
  if (h.version != 1) throw DomainError("encode: version must be 1");
  const auto type = static_cast<std::uint8_t>(h.type);
  if (type > 4) throw DomainError("encode: packet type out of range");

  std::array<std::uint8_t, kHeaderSize> out{};
  auto put16 = [&](std::size_t at, std::uint16_t v) {
    out[at] = static_cast<std::uint8_t>(v >> 8);
    out[at + 1] = static_cast<std::uint8_t>(v);
  };
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    out[at] = static_cast<std::uint8_t>(v >> 24);
    out[at + 1] = static_cast<std::uint8_t>(v >> 16);
    out[at + 2] = static_cast<std::uint8_t>(v >> 8);
    out[at + 3] = static_cast<std::uint8_t>(v);
  };

  out[0] = static_cast<std::uint8_t>((type << 4) | (h.version & 0x0f));
  out[1] = h.extension;
  put16(2, h.connection_id);
  put32(4, h.timestamp_microseconds);
  put32(8, h.timestamp_difference_microseconds);
  put32(12, h.wnd_size);
  put16(16, h.seq_nr);
  put16(18, h.ack_nr);
  return out;
}

inline MutpHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kHeaderSize)
    throw MalformedLengthError("decode: header must be exactly 20 bytes, got " +
                               std::to_string(bytes.size()));
  const std::uint8_t version = bytes[0] & 0x0f;
  const std::uint8_t type = bytes[0] >> 4;
  if (version != 1)
    throw UnsupportedVersionError("decode: unsupported version " +
                                  std::to_string(version));
  if (type > 4)
    throw UnknownTypeError("decode: unknown packet type " +
                           std::to_string(type));

  auto get16 = [&](std::size_t at) {
    return static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
  };
  auto get32 = [&](std::size_t at) {
    return (static_cast<std::uint32_t>(bytes[at]) << 24) |
           (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[at + 3]);
  };

  MutpHeader h;
  h.version = version;
  h.type = static_cast<PacketType>(type);
  h.extension = bytes[1];
  h.connection_id = get16(2);
  h.timestamp_microseconds = get32(4);
  h.timestamp_difference_microseconds = get32(8);
  h.wnd_size = get32(12);
  h.seq_nr = get16(16);
  h.ack_nr = get16(18);
  return h;
}

// Serial-number order on the wrapping 32-bit timestamp counter: a precedes
// b when (b - a) mod 2^32 lies in (0, 2^31).  Callers must keep all
// timestamps they compare within half the counter range.
inline std::strong_ordering wrap_compare(std::uint32_t a, std::uint32_t b) {
  if (a == b) return std::strong_ordering::equal;
  const std::uint32_t diff = b - a;
  return diff < 0x80000000u ? std::strong_ordering::less
                            : std::strong_ordering::greater;
}

inline bool wrap_less(std::uint32_t a, std::uint32_t b) {
  return wrap_compare(a, b) == std::strong_ordering::less;
}

}  // namespace swarmsteg
