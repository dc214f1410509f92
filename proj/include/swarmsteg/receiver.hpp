#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "swarmsteg/bits.hpp"
#include "swarmsteg/errors.hpp"
#include "swarmsteg/lehmer.hpp"
#include "swarmsteg/packet.hpp"

// Receiver side: restore the send order from timestamps, split the stream
// into symbol runs, rebuild packages, decode bits.
//
// Order restoration needs no synchronized clocks: the sender stamped a
// strictly increasing (wrapping) timestamp into every packet, and
// retransmitted copies carry the original value, so sorting by timestamp
// reproduces the send order no matter how arrivals were shuffled.
//
// Run rule: after mapping packets to package symbols (or X for anything
// else), the stream splits into maximal same-symbol runs.  X packets act
// as run boundaries but are otherwise invisible; in particular an X gap
// does not glue two runs of the same symbol together.  Even-length runs
// are cover and are dropped; each odd-length run yields one symbol.
// Symbols accumulate into the current package until it holds
// package_size distinct ones.

namespace swarmsteg {

inline std::vector<PacketEvent> restore_order(const ReceivedStream& stream) {
  // Retransmitted copies share connection, seq_nr and timestamp with the
  // original; collapse them to one packet.  seq_nr alone recurs once a
  // connection outlives 2^16 packets, hence the timestamp in the key.
  struct Kept {
    const PacketEvent* ev;
  };
  std::unordered_map<std::uint64_t, Kept> seen;
  seen.reserve(stream.size());
  std::vector<const PacketEvent*> unique_events;
  unique_events.reserve(stream.size());

  for (const auto& ev : stream) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(ev.header.connection_id) << 48) |
        (static_cast<std::uint64_t>(ev.header.seq_nr) << 32) |
        ev.header.timestamp_microseconds;
    auto [it, inserted] = seen.emplace(key, Kept{&ev});
    if (inserted) {
      unique_events.push_back(&ev);
      continue;
    }
    const PacketEvent& prev = *it->second.ev;
    if (prev.header != ev.header || prev.dest_ip != ev.dest_ip)
      throw DomainError(
          "restore_order: duplicate (connection, seq, timestamp) with "
          "diverging payload headers");
    // Keep the earliest arrival so the result does not depend on the
    // order duplicates showed up in.
    if (ev.arrival_time_us < prev.arrival_time_us ||
        (ev.arrival_time_us == prev.arrival_time_us &&
         !ev.is_retransmit && prev.is_retransmit))
      it->second.ev = &ev;
  }

  std::vector<PacketEvent> ordered;
  ordered.reserve(unique_events.size());
  for (auto idx : unique_events) {
    auto key = (static_cast<std::uint64_t>(idx->header.connection_id) << 48) |
               (static_cast<std::uint64_t>(idx->header.seq_nr) << 32) |
               idx->header.timestamp_microseconds;
    ordered.push_back(*seen.at(key).ev);
  }

  std::sort(ordered.begin(), ordered.end(),
            [](const PacketEvent& a, const PacketEvent& b) {
              return wrap_less(a.header.timestamp_microseconds,
                               b.header.timestamp_microseconds);
            });

  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i - 1].header.timestamp_microseconds ==
        ordered[i].header.timestamp_microseconds)
      throw AmbiguousOrderError(
          "restore_order: two distinct packets share timestamp " +
          std::to_string(ordered[i].header.timestamp_microseconds));

  return ordered;
}

struct Extraction {
  // Each package is the sequence of pool indices in collection order.
  std::vector<std::vector<std::uint8_t>> packages;
  std::vector<std::uint8_t> pending;  // symbols of the unfinished tail package
  std::size_t discarded_even_runs = 0;
  std::size_t packets_out_of_package = 0;
  // Set when a symbol repeated inside an accumulating package; index of
  // the offending run's first packet.  Extraction stops there.
  std::optional<std::size_t> corruption_at;
};

// pool_ips is the shared-secret address order; package_size many distinct
// symbols close a package.  For the plain two-party channel the pool is
// the package itself; a larger pool lets packages draw varying subsets.
inline Extraction extract_symbols_lenient(
    const std::vector<PacketEvent>& ordered,
    const std::vector<std::string>& pool_ips, unsigned package_size) {
  if (pool_ips.size() < 2 || pool_ips.size() > 64)
    throw DomainError("extract: pool must span 2..64 addresses");
  if (package_size < 2 || package_size > 6)
    throw DomainError("extract: package size must be in 2..6");
  if (package_size > pool_ips.size())
    throw DomainError("extract: package size exceeds pool");
  std::unordered_map<std::string, std::uint8_t> index;
  for (std::size_t i = 0; i < pool_ips.size(); ++i) {
    if (!index.emplace(pool_ips[i], static_cast<std::uint8_t>(i)).second)
      throw DomainError("extract: duplicate pool address " + pool_ips[i]);
  }

  Extraction out;
  std::vector<std::uint8_t> current;
  std::uint64_t current_mask = 0;

  int run_symbol = -1;
  std::size_t run_len = 0;
  std::size_t run_start = 0;

  auto close_run = [&](std::size_t at) -> bool {
    if (run_symbol < 0) return true;
    if (run_len % 2 == 0) {
      ++out.discarded_even_runs;
    } else {
      const auto sym = static_cast<std::uint8_t>(run_symbol);
      if ((current_mask >> sym) & 1) {
        out.corruption_at = run_start;
        return false;
      }
      current.push_back(sym);
      current_mask |= 1ull << sym;
      if (current.size() == package_size) {
        out.packages.push_back(std::move(current));
        current.clear();
        current_mask = 0;
      }
    }
    run_symbol = -1;
    run_len = 0;
    (void)at;
    return true;
  };

  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto& ev = ordered[i];
    int sym = -1;
    if (ev.header.type == PacketType::Data) {
      auto it = index.find(ev.dest_ip);
      if (it != index.end()) sym = it->second;
    }
    if (sym < 0) {
      // Outside the pool (or not a DATA packet): breaks the current run
      // but carries nothing.
      ++out.packets_out_of_package;
      if (!close_run(i)) return out;
      continue;
    }
    if (sym == run_symbol) {
      ++run_len;
      continue;
    }
    if (!close_run(i)) return out;
    run_symbol = sym;
    run_len = 1;
    run_start = i;
  }
  if (!close_run(ordered.size())) return out;
  out.pending = std::move(current);
  return out;
}

inline Extraction extract_symbols(const std::vector<PacketEvent>& ordered,
                                  const std::vector<std::string>& pool_ips,
                                  unsigned package_size) {
  auto ex = extract_symbols_lenient(ordered, pool_ips, package_size);
  if (ex.corruption_at)
    throw PackageCorruptionError(
        "extract: symbol repeated inside an accumulating package",
        *ex.corruption_at);
  return ex;
}

inline Extraction extract_symbols(const std::vector<PacketEvent>& ordered,
                                  const DataPackage& pkg) {
  pkg.validate();
  return extract_symbols(ordered, pkg.ips, pkg.size());
}

// Collected pool indices -> secret bits.  Each package's permutation is
// ranked relative to its own address set sorted in pool order, so pools
// larger than the package still decode consistently.
// A package collects pool indices in observation order; only their order
// relative to each other carries information, so rank them within the
// collected subset.
inline Permutation package_permutation(
    const std::vector<std::uint8_t>& collected) {
  std::vector<std::uint8_t> sorted = collected;
  std::sort(sorted.begin(), sorted.end());
  Permutation perm(collected.size());
  for (std::size_t i = 0; i < collected.size(); ++i)
    perm[i] = static_cast<std::uint8_t>(
        std::lower_bound(sorted.begin(), sorted.end(), collected[i]) -
        sorted.begin());
  return perm;
}

inline Bits decode_bits(const std::vector<std::vector<std::uint8_t>>& packages,
                        unsigned package_size) {
  Bits bits;
  for (std::size_t p = 0; p < packages.size(); ++p) {
    if (packages[p].size() != package_size)
      throw DomainError("decode_bits: package " + std::to_string(p) +
                        " has wrong size");
    try {
      const Bits chunk = permutation_to_bits(package_permutation(packages[p]));
      bits.insert(bits.end(), chunk.begin(), chunk.end());
    } catch (const OutOfCodebookError& e) {
      throw OutOfCodebookError(e.what(), p);
    }
  }
  return bits;
}

struct ExtractionReport {
  Bits bits;
  std::size_t packages_decoded = 0;
  std::size_t discarded_even_runs = 0;
  std::size_t packets_out_of_package = 0;
  bool incomplete_tail = false;
};

// Full receive pipeline: restore order, extract, decode.
inline ExtractionReport receive(const ReceivedStream& stream,
                                const std::vector<std::string>& pool_ips,
                                unsigned package_size) {
  const auto ordered = restore_order(stream);
  const auto ex = extract_symbols(ordered, pool_ips, package_size);
  ExtractionReport report;
  report.bits = decode_bits(ex.packages, package_size);
  report.packages_decoded = ex.packages.size();
  report.discarded_even_runs = ex.discarded_even_runs;
  report.packets_out_of_package = ex.packets_out_of_package;
  report.incomplete_tail = !ex.pending.empty();
  return report;
}

}  // namespace swarmsteg
