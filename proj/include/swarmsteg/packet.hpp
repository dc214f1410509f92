#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "swarmsteg/errors.hpp"
#include "swarmsteg/mutp.hpp"
#include "swarmsteg/rng.hpp"

namespace swarmsteg {

// One scheduled or delivered packet.  send_time_us is the sender's wall
// clock; arrival_time_us is filled in once a channel delivers the packet.
struct PacketEvent {
  std::string dest_ip;
  MutpHeader header;
  std::uint64_t send_time_us = 0;
  std::uint64_t arrival_time_us = 0;
  bool is_retransmit = false;

  bool operator==(const PacketEvent&) const = default;
};

using ReceivedStream = std::vector<PacketEvent>;

// The ordered set of addresses a secret is spread across.  The order is
// part of the shared secret: it fixes which permutation maps to which
// bit pattern.
struct DataPackage {
  std::vector<std::string> ips;

  unsigned size() const { return static_cast<unsigned>(ips.size()); }

  void validate() const {
    if (ips.size() < 2 || ips.size() > 6)
      throw DomainError("data package must span 2..6 addresses, got " +
                        std::to_string(ips.size()));
    for (std::size_t i = 0; i < ips.size(); ++i) {
      if (ips[i].empty()) throw DomainError("data package: empty address");
      for (std::size_t j = i + 1; j < ips.size(); ++j)
        if (ips[i] == ips[j])
          throw DomainError("data package: duplicate address " + ips[i]);
    }
  }
};

// Symbol runs must stay odd and filler runs even, otherwise the parity
// rule at the receiver misreads them.
struct RunPolicy {
  unsigned symbol_run_length = 1;
  unsigned filler_run_length = 2;

  void validate() const {
    if (symbol_run_length == 0 || symbol_run_length % 2 == 0)
      throw DomainError("symbol_run_length must be odd");
    if (filler_run_length % 2 != 0)
      throw DomainError("filler_run_length must be even");
  }
};

// Cover traffic mixed into a schedule: noise packets to addresses outside
// the package, filler runs to package addresses.  A non-zero
// max_total_packets caps the whole schedule.
struct CoverPlan {
  std::vector<std::string> noise_ips;
  std::size_t noise_packets = 0;
  std::size_t filler_packets = 0;
  std::size_t max_total_packets = 0;
};

enum class PacketRole : std::uint8_t { Symbol, Filler, Noise };

struct SendSchedule {
  std::vector<PacketEvent> entries;
  std::vector<PacketRole> roles;
  // One-past-the-end entry index of each package's final symbol run.
  std::vector<std::size_t> package_boundaries;
  std::size_t bits_embedded = 0;
  unsigned pad_bits = 0;
};

// Emits DATA packets with the common timing discipline: one connection
// per destination, seq_nr counted per connection, and a globally strictly
// increasing timestamp advanced by max(1, jittered nominal gap), the gap
// drawn uniformly from [nominal/2, 3*nominal/2].
class ScheduleBuilder {
 public:
  ScheduleBuilder(double rate_pps, std::uint64_t seed,
                  std::uint32_t start_timestamp = 4096,
                  std::uint64_t start_wall_us = 0)
      : rng_(derive_seed(seed, "schedule-gaps")),
        timestamp_(start_timestamp),
        wall_us_(start_wall_us) {
    if (rate_pps <= 0) throw DomainError("rate_pps must be positive");
    nominal_gap_us_ = static_cast<std::int64_t>(1e6 / rate_pps + 0.5);
    if (nominal_gap_us_ < 1) nominal_gap_us_ = 1;
  }

  PacketEvent make_packet(const std::string& dest_ip) {
    PacketEvent ev;
    ev.dest_ip = dest_ip;
    ev.header.version = 1;
    ev.header.type = PacketType::Data;
    ev.header.connection_id = connection_of(dest_ip);
    ev.header.seq_nr = next_seq(dest_ip);
    ev.header.timestamp_microseconds = timestamp_;
    ev.header.wnd_size = 0x00100000;
    ev.send_time_us = wall_us_;
    advance();
    return ev;
  }

  std::uint16_t connection_of(const std::string& dest_ip) {
    auto it = connections_.find(dest_ip);
    if (it != connections_.end()) return it->second;
    const auto id =
        static_cast<std::uint16_t>(0x1000 + connections_.size());
    connections_.emplace(dest_ip, id);
    return id;
  }

 private:
  std::uint16_t next_seq(const std::string& dest_ip) {
    return ++seq_[dest_ip];  // first DATA packet carries seq_nr 1
  }

  void advance() {
    const auto gap = std::max<std::int64_t>(
        1, rng_.uniform_range(nominal_gap_us_ - nominal_gap_us_ / 2,
                              nominal_gap_us_ + nominal_gap_us_ / 2));
    timestamp_ += static_cast<std::uint32_t>(gap);
    wall_us_ += static_cast<std::uint64_t>(gap);
  }

  Rng rng_;
  std::int64_t nominal_gap_us_;
  std::uint32_t timestamp_;
  std::uint64_t wall_us_;
  std::unordered_map<std::string, std::uint16_t> connections_;
  std::unordered_map<std::string, std::uint16_t> seq_;
};

}  // namespace swarmsteg
