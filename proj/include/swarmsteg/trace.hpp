#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "swarmsteg/errors.hpp"
#include "swarmsteg/lehmer.hpp"
#include "swarmsteg/mutp.hpp"
#include "swarmsteg/packet.hpp"

// Text traces and the JSON envelope sidecar.
//
// A trace is one packet per line, comma separated, in arrival order or
// any other order (the receiver sorts by header timestamp anyway).  '#'
// starts a comment, blank lines are skipped.  Text keeps runs diffable;
// a pcap bridge is deliberately out of scope.
//
// The envelope carries what the trace must not: the shared-secret
// address order, the package size and the pad length of the last chunk.

namespace swarmsteg {

inline constexpr std::string_view kTraceHeader =
    "arrival_us,send_us,dest_ip,conn_id,seq_nr,timestamp_us,type,"
    "is_retransmit";

inline constexpr std::string_view kEnvelopeMagic = "swarmsteg-envelope";
inline constexpr int kEnvelopeVersion = 1;

namespace detail {

// Destinations are plain tokens; anything that could collide with the
// line grammar is refused at write time rather than quoted.
inline void require_clean_token(const std::string& ip) {
  if (ip.empty()) throw DomainError("trace: empty destination address");
  if (ip.find_first_of(",# \t\r\n") != std::string::npos)
    throw DomainError("trace: destination '" + ip +
                      "' contains reserved characters");
}

inline std::uint64_t parse_u64_field(std::string_view field,
                                     std::string_view name,
                                     std::uint64_t max_value,
                                     std::size_t line) {
  std::uint64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty())
    throw TraceParseError("trace line " + std::to_string(line) + ": field " +
                              std::string(name) + " is not an unsigned integer",
                          line);
  if (value > max_value)
    throw TraceParseError("trace line " + std::to_string(line) + ": field " +
                              std::string(name) + " exceeds " +
                              std::to_string(max_value),
                          line);
  return value;
}

}  // namespace detail

inline void write_trace(std::ostream& out,
                        const std::vector<PacketEvent>& events) {
  out << kTraceHeader << '\n';
  for (const auto& ev : events) {
    detail::require_clean_token(ev.dest_ip);
    out << ev.arrival_time_us << ',' << ev.send_time_us << ',' << ev.dest_ip
        << ',' << ev.header.connection_id << ',' << ev.header.seq_nr << ','
        << ev.header.timestamp_microseconds << ','
        << to_string(ev.header.type) << ',' << (ev.is_retransmit ? 1 : 0)
        << '\n';
  }
  if (!out) throw IoError("trace: write failed");
}

inline std::vector<PacketEvent> read_trace(std::istream& in) {
  std::vector<PacketEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t'))
      line.pop_back();
    if (line.empty()) continue;

    if (!seen_header) {
      if (line != kTraceHeader)
        throw TraceParseError(
            "trace line " + std::to_string(line_no) +
                ": expected header '" + std::string(kTraceHeader) + "'",
            line_no);
      seen_header = true;
      continue;
    }

    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(rest);
        break;
      }
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 8)
      throw TraceParseError("trace line " + std::to_string(line_no) +
                                ": expected 8 fields, got " +
                                std::to_string(fields.size()),
                            line_no);

    PacketEvent ev;
    ev.arrival_time_us = detail::parse_u64_field(
        fields[0], "arrival_us", std::numeric_limits<std::uint64_t>::max(),
        line_no);
    ev.send_time_us = detail::parse_u64_field(
        fields[1], "send_us", std::numeric_limits<std::uint64_t>::max(),
        line_no);
    ev.dest_ip = std::string(fields[2]);
    if (ev.dest_ip.empty() ||
        ev.dest_ip.find_first_of(" \t") != std::string::npos)
      throw TraceParseError("trace line " + std::to_string(line_no) +
                                ": bad destination token",
                            line_no);
    ev.header.connection_id = static_cast<std::uint16_t>(
        detail::parse_u64_field(fields[3], "conn_id", 0xFFFF, line_no));
    ev.header.seq_nr = static_cast<std::uint16_t>(
        detail::parse_u64_field(fields[4], "seq_nr", 0xFFFF, line_no));
    ev.header.timestamp_microseconds = static_cast<std::uint32_t>(
        detail::parse_u64_field(fields[5], "timestamp_us", 0xFFFFFFFF,
                                line_no));
    try {
      ev.header.type = packet_type_from_string(fields[6]);
    } catch (const DomainError&) {
      throw TraceParseError("trace line " + std::to_string(line_no) +
                                ": unknown packet type '" +
                                std::string(fields[6]) + "'",
                            line_no);
    }
    if (fields[7] == "0")
      ev.is_retransmit = false;
    else if (fields[7] == "1")
      ev.is_retransmit = true;
    else
      throw TraceParseError("trace line " + std::to_string(line_no) +
                                ": is_retransmit must be 0 or 1",
                            line_no);
    events.push_back(std::move(ev));
  }

  if (!seen_header)
    throw TraceParseError("trace: missing header line", 1);
  return events;
}

// Shared-secret sidecar.  ips is the agreed address order; the first
// package_size entries form the package for a plain two-party session,
// a longer list is a pool the packages draw subsets from.
struct Envelope {
  unsigned package_size = 0;
  unsigned pad_bits = 0;
  std::vector<std::string> ips;

  void validate() const {
    if (package_size < 2 || package_size > 6)
      throw DomainError("envelope: package size must be in 2..6, got " +
                        std::to_string(package_size));
    if (ips.size() < package_size)
      throw DomainError("envelope: " + std::to_string(ips.size()) +
                        " addresses cannot host packages of size " +
                        std::to_string(package_size));
    for (std::size_t i = 0; i < ips.size(); ++i) {
      detail::require_clean_token(ips[i]);
      for (std::size_t j = i + 1; j < ips.size(); ++j)
        if (ips[i] == ips[j])
          throw DomainError("envelope: duplicate address " + ips[i]);
    }
    if (pad_bits >= capacity_bits(package_size))
      throw DomainError("envelope: pad of " + std::to_string(pad_bits) +
                        " bits meets or exceeds the chunk size");
  }
};

inline void write_envelope(std::ostream& out, const Envelope& env) {
  env.validate();
  nlohmann::json j;
  j["magic"] = std::string(kEnvelopeMagic);
  j["version"] = kEnvelopeVersion;
  j["package_size"] = env.package_size;
  j["pad_bits"] = env.pad_bits;
  j["ips"] = env.ips;
  out << j.dump(2) << '\n';
  if (!out) throw IoError("envelope: write failed");
}

inline Envelope read_envelope(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw DomainError("envelope: not valid JSON");
  if (!j.is_object()) throw DomainError("envelope: not a JSON object");

  if (!j.contains("magic") || !j["magic"].is_string() ||
      j["magic"].get<std::string>() != kEnvelopeMagic)
    throw DomainError("envelope: bad or missing magic token");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kEnvelopeVersion)
    throw DomainError("envelope: unsupported version");
  for (const char* key : {"package_size", "pad_bits"})
    if (!j.contains(key) || !j[key].is_number_unsigned())
      throw DomainError(std::string("envelope: missing or bad ") + key);
  if (!j.contains("ips") || !j["ips"].is_array())
    throw DomainError("envelope: missing or bad ips");

  Envelope env;
  env.package_size = j["package_size"].get<unsigned>();
  env.pad_bits = j["pad_bits"].get<unsigned>();
  for (const auto& item : j["ips"]) {
    if (!item.is_string())
      throw DomainError("envelope: ips entries must be strings");
    env.ips.push_back(item.get<std::string>());
  }
  env.validate();
  return env;
}

}  // namespace swarmsteg
