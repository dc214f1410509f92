#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "swarmsteg/channel.hpp"
#include "swarmsteg/lehmer.hpp"
#include "swarmsteg/receiver.hpp"
#include "swarmsteg/traffic.hpp"

// Embedding throughput study.  A session generates swarm-like cover
// traffic, rewrites the send order so that the DATA packets to a chosen
// address pool spell out secret permutations, pushes everything through
// the channel model, and decodes on the receiving side.  Three pool
// strategies are compared across package sizes:
//
//   A  every peer the client talks to
//   B  the package_size most active peers
//   C  the six most active peers
//
// The embedder is a forward scan: the first packet toward each address
// not yet in the open package becomes a symbol; the package closes at
// package_size distinct addresses.  Unused packets are emitted as
// even-length runs (invisible to the parity rule) or, for addresses
// outside the pool, as plain noise.  Odd remainders carry forward to the
// next package so parity never leaks a bogus symbol mid-session.

namespace swarmsteg {

enum class PoolStrategy { EveryPeer, TopPackagePeers, TopSixPeers };

inline char strategy_letter(PoolStrategy s) {
  switch (s) {
    case PoolStrategy::EveryPeer: return 'A';
    case PoolStrategy::TopPackagePeers: return 'B';
    case PoolStrategy::TopSixPeers: return 'C';
  }
  throw DomainError("bad strategy");
}

inline PoolStrategy strategy_from_letter(char c) {
  switch (c) {
    case 'A': return PoolStrategy::EveryPeer;
    case 'B': return PoolStrategy::TopPackagePeers;
    case 'C': return PoolStrategy::TopSixPeers;
  }
  throw DomainError(std::string("unknown strategy letter: ") + c);
}

struct ExperimentConfig {
  std::size_t packets_per_session = 500000;
  double rate_pps = 1350.0;
  double burst_mean = 2.0;
  std::size_t sessions = 3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // Strategy A runs against a swarm of roughly even peers; B and C share
  // a middling swarm whose sixth peer is already marginal, which is what
  // makes the six-peer package so much slower than the two-peer one.
  TrafficPattern broad_pattern = balanced_pattern();
  TrafficPattern ranked_pattern = average_pattern();
  ChannelConfig channel{};
};

struct SessionMetrics {
  std::size_t packages = 0;
  std::size_t symbol_packets = 0;
  std::size_t emitted_packets = 0;
  double duration_s = 0.0;
  double bandwidth_bps = 0.0;
  double utilization_pct = 0.0;
  bool verified = false;

  bool operator==(const SessionMetrics&) const = default;
};

namespace detail {

struct EmbedResult {
  std::vector<std::uint8_t> emission;  // slot index per emitted packet
  std::size_t packages = 0;
  Bits embedded;
  std::size_t dropped_tail_packets = 0;
};

// Core of the rewrite.  cover_seq lists destination slots in original
// send order; the result lists them in steganographic send order with
// the same per-slot totals (at most one packet dropped at the tail).
inline EmbedResult embed_into_cover(const std::vector<std::uint8_t>& cover_seq,
                                    const std::vector<std::size_t>& pool_slots,
                                    unsigned package_size, Rng& secret_rng,
                                    std::size_t slot_count) {
  const unsigned n = package_size;
  const unsigned cap = capacity_bits(n);
  if (slot_count > 64)
    throw DomainError("embed_into_cover: too many slots");
  if (pool_slots.size() < n)
    throw DomainError("embed_into_cover: pool smaller than the package");

  std::vector<char> in_pool(slot_count, 0);
  for (const auto s : pool_slots) in_pool[s] = 1;

  EmbedResult out;
  out.emission.reserve(cover_seq.size() + 8);

  std::vector<std::uint32_t> span_count(slot_count, 0);
  std::vector<std::uint32_t> carry(slot_count, 0);
  std::vector<std::uint64_t> left(slot_count, 0);
  std::uint64_t used_mask = 0;
  std::vector<std::uint8_t> collected;
  collected.reserve(n);
  std::vector<std::uint8_t> set_sorted;

  Bits chunk;
  Permutation sigma;
  bool chunk_drawn = false;

  // Last maximal same-slot run of the emitted stream.  An odd run ends in
  // a symbol; opening the next package with the same slot would merge the
  // two odd runs into an even one and erase both symbols.
  int tail_slot = -1;
  bool tail_odd = false;

  auto note_emit = [&](std::uint8_t slot, std::uint64_t count) {
    out.emission.insert(out.emission.end(), count, slot);
    if (static_cast<int>(slot) == tail_slot) {
      tail_odd ^= (count & 1) != 0;
    } else {
      tail_slot = slot;
      tail_odd = (count & 1) != 0;
    }
  };

  auto try_close = [&]() -> bool {
    if (!chunk_drawn) {
      chunk.clear();
      for (unsigned b = 0; b < cap; ++b) chunk.push_back(secret_rng.bit());
      sigma = bits_to_permutation(chunk, n);
      chunk_drawn = true;
    }
    set_sorted = collected;
    std::sort(set_sorted.begin(), set_sorted.end());
    const std::uint8_t first_slot = set_sorted[sigma[0]];

    const bool conflict =
        tail_odd && tail_slot == static_cast<int>(first_slot);
    int sep_noise = -1;
    int sep_group = -1;
    if (conflict) {
      for (std::size_t s = 0; s < slot_count; ++s)
        if (!in_pool[s] && span_count[s] > 0) {
          sep_noise = static_cast<int>(s);
          break;
        }
      if (sep_noise < 0) {
        for (std::size_t s = 0; s < slot_count; ++s) {
          if (!in_pool[s] || s == first_slot) continue;
          const std::uint64_t c = span_count[s] + carry[s] -
                                  ((used_mask >> s & 1) ? 1 : 0);
          if ((c & ~std::uint64_t{1}) >= 2) {
            sep_group = static_cast<int>(s);
            break;
          }
        }
      }
      if (sep_noise < 0 && sep_group < 0) return false;
    }

    for (std::size_t s = 0; s < slot_count; ++s)
      left[s] = in_pool[s] ? span_count[s] + carry[s] -
                                 ((used_mask >> s & 1) ? 1 : 0)
                           : 0;

    if (sep_noise >= 0) {
      note_emit(static_cast<std::uint8_t>(sep_noise), 1);
      --span_count[sep_noise];
    } else if (sep_group >= 0) {
      const std::uint64_t g = left[sep_group] & ~std::uint64_t{1};
      note_emit(static_cast<std::uint8_t>(sep_group), g);
      carry[sep_group] = left[sep_group] & 1;
      left[sep_group] = 0;
    }

    for (unsigned i = 0; i < n; ++i) note_emit(set_sorted[sigma[i]], 1);

    for (std::size_t s = 0; s < slot_count; ++s) {
      if (left[s] == 0) continue;
      const std::uint64_t g = left[s] & ~std::uint64_t{1};
      if (g > 0) note_emit(static_cast<std::uint8_t>(s), g);
      carry[s] = left[s] & 1;
    }
    for (std::size_t s = 0; s < slot_count; ++s)
      if (!in_pool[s] && span_count[s] > 0)
        note_emit(static_cast<std::uint8_t>(s), span_count[s]);

    out.embedded.insert(out.embedded.end(), chunk.begin(), chunk.end());
    ++out.packages;
    std::fill(span_count.begin(), span_count.end(), 0);
    used_mask = 0;
    collected.clear();
    chunk_drawn = false;
    return true;
  };

  for (const auto slot : cover_seq) {
    ++span_count[slot];
    if (in_pool[slot] && !(used_mask >> slot & 1)) {
      collected.push_back(slot);
      used_mask |= std::uint64_t{1} << slot;
      if (collected.size() == n && !try_close()) {
        // No safe way to open the span with this set; the packet stays
        // cover and a later packet closes the package instead.
        used_mask &= ~(std::uint64_t{1} << slot);
        collected.pop_back();
      }
    }
  }

  // Unfinished package: everything left reverts to cover.  Even runs are
  // harmless anywhere; odd singles read as bogus pending symbols, which
  // the decode-side prefix check tolerates, as long as none of them
  // merges with the final real symbol run of its own slot.
  std::vector<std::uint8_t> singles;
  for (std::size_t s = 0; s < slot_count; ++s) {
    if (!in_pool[s]) continue;
    const std::uint64_t c = span_count[s] + carry[s];
    const std::uint64_t g = c & ~std::uint64_t{1};
    if (g > 0) note_emit(static_cast<std::uint8_t>(s), g);
    if (c & 1) singles.push_back(static_cast<std::uint8_t>(s));
    carry[s] = 0;
  }
  for (std::size_t s = 0; s < slot_count; ++s)
    if (!in_pool[s] && span_count[s] > 0)
      note_emit(static_cast<std::uint8_t>(s), span_count[s]);
  while (!singles.empty()) {
    std::size_t pick = singles.size();
    for (std::size_t i = 0; i < singles.size(); ++i) {
      if (!(tail_odd && tail_slot == static_cast<int>(singles[i]))) {
        pick = i;
        break;
      }
    }
    if (pick == singles.size()) {
      // Only one conflicting single can remain; emitting it would erase
      // the last symbol, so it is dropped instead.
      out.dropped_tail_packets += singles.size();
      break;
    }
    note_emit(singles[pick], 1);
    singles.erase(singles.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

}  // namespace detail

inline SessionMetrics run_session(const ExperimentConfig& cfg,
                                  PoolStrategy strategy,
                                  unsigned package_size,
                                  std::size_t session_index) {
  const TrafficPattern& pattern = strategy == PoolStrategy::EveryPeer
                                      ? cfg.broad_pattern
                                      : cfg.ranked_pattern;
  pattern.validate();
  if (package_size < 2 || package_size > 6)
    throw DomainError("run_session: package size must be 2..6");

  // The derivation is strategy-free on purpose: strategies B and C at
  // package size six select the same pool from the same swarm, and with
  // shared seeds their sessions come out bit-identical.
  const auto session_seed = derive_seed(cfg.seed, session_index);

  const auto cover =
      generate_cover(pattern, cfg.packets_per_session, cfg.burst_mean,
                     derive_seed(session_seed, "cover"));

  std::vector<std::size_t> pool_slots;
  if (strategy == PoolStrategy::EveryPeer) {
    for (std::size_t s = 0; s < pattern.slots.size(); ++s)
      pool_slots.push_back(s);
  } else {
    const auto ranking = activity_ranking(cover, pattern);
    const std::size_t want =
        strategy == PoolStrategy::TopPackagePeers ? package_size : 6;
    if (ranking.size() < want)
      throw DomainError("run_session: pattern has too few rankable peers");
    pool_slots.assign(ranking.begin(),
                      ranking.begin() + static_cast<std::ptrdiff_t>(want));
    std::sort(pool_slots.begin(), pool_slots.end());
  }

  Rng secret_rng(derive_seed(session_seed, "secret"));
  const auto embed =
      detail::embed_into_cover(cover.sequence, pool_slots, package_size,
                               secret_rng, pattern.slots.size());

  ScheduleBuilder builder(cfg.rate_pps, derive_seed(session_seed, "emit"));
  std::vector<PacketEvent> schedule;
  schedule.reserve(embed.emission.size());
  for (const auto slot : embed.emission)
    schedule.push_back(builder.make_packet(pattern.slots[slot].address));

  ChannelConfig chan = cfg.channel;
  chan.seed = derive_seed(session_seed, "channel");
  std::map<std::string, ChannelConfig> configs;
  for (const auto& slot : pattern.slots) configs[slot.address] = chan;
  const auto received = transmit(schedule, configs);
  schedule.clear();
  schedule.shrink_to_fit();

  const auto ordered = restore_order(received);
  std::vector<std::string> pool_ips;
  for (const auto s : pool_slots) pool_ips.push_back(pattern.slots[s].address);
  const auto ex = extract_symbols_lenient(ordered, pool_ips, package_size);

  Bits decoded;
  for (const auto& pkg : ex.packages) {
    try {
      const Bits bits = permutation_to_bits(package_permutation(pkg));
      decoded.insert(decoded.end(), bits.begin(), bits.end());
    } catch (const OutOfCodebookError&) {
      break;  // bogus tail package; everything before it already decoded
    }
  }

  SessionMetrics m;
  m.packages = embed.packages;
  m.symbol_packets = embed.packages * package_size;
  m.emitted_packets = embed.emission.size();
  m.duration_s = static_cast<double>(cfg.packets_per_session) / cfg.rate_pps;
  m.bandwidth_bps =
      static_cast<double>(embed.packages * capacity_bits(package_size)) /
      m.duration_s;
  m.utilization_pct = 100.0 * static_cast<double>(m.symbol_packets) /
                      static_cast<double>(cfg.packets_per_session);
  m.verified = decoded.size() >= embed.embedded.size() &&
               std::equal(embed.embedded.begin(), embed.embedded.end(),
                          decoded.begin());
  return m;
}

struct CellResult {
  PoolStrategy strategy = PoolStrategy::EveryPeer;
  unsigned package_size = 0;
  std::vector<SessionMetrics> sessions;
  double mean_bandwidth_bps = 0.0;
  double std_bandwidth_bps = 0.0;
  double mean_utilization_pct = 0.0;
  bool all_verified = true;
  double wall_seconds = 0.0;
};

inline CellResult run_cell(const ExperimentConfig& cfg, PoolStrategy strategy,
                           unsigned package_size) {
  if (cfg.sessions == 0) throw DomainError("run_cell: need >= 1 session");
  const auto t0 = std::chrono::steady_clock::now();

  CellResult cell;
  cell.strategy = strategy;
  cell.package_size = package_size;
  cell.sessions.resize(cfg.sessions);

  auto worker = [&](std::size_t first, std::size_t step) {
    for (std::size_t i = first; i < cfg.sessions; i += step)
      cell.sessions[i] = run_session(cfg, strategy, package_size, i);
  };
  const unsigned T = std::max(1u, cfg.threads);
  if (T == 1 || cfg.sessions == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> threads;
    const auto count = std::min<std::size_t>(T, cfg.sessions);
    for (std::size_t t = 0; t < count; ++t)
      threads.emplace_back(worker, t, count);
    for (auto& th : threads) th.join();
  }

  double bw_sum = 0.0;
  double util_sum = 0.0;
  for (const auto& s : cell.sessions) {
    bw_sum += s.bandwidth_bps;
    util_sum += s.utilization_pct;
    cell.all_verified = cell.all_verified && s.verified;
  }
  const auto count = static_cast<double>(cfg.sessions);
  cell.mean_bandwidth_bps = bw_sum / count;
  cell.mean_utilization_pct = util_sum / count;
  if (cfg.sessions > 1) {
    double acc = 0.0;
    for (const auto& s : cell.sessions) {
      const double d = s.bandwidth_bps - cell.mean_bandwidth_bps;
      acc += d * d;
    }
    cell.std_bandwidth_bps = std::sqrt(acc / (count - 1.0));
  }
  cell.wall_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return cell;
}

inline std::vector<CellResult> run_experiment(
    const ExperimentConfig& cfg, const std::vector<PoolStrategy>& strategies,
    const std::vector<unsigned>& sizes) {
  if (strategies.empty() || sizes.empty())
    throw DomainError("run_experiment: empty case or size list");
  std::vector<CellResult> cells;
  for (const auto strategy : strategies)
    for (const unsigned size : sizes)
      cells.push_back(run_cell(cfg, strategy, size));
  return cells;
}

inline std::vector<CellResult> run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg,
                        {PoolStrategy::EveryPeer, PoolStrategy::TopPackagePeers,
                         PoolStrategy::TopSixPeers},
                        {2, 3, 4, 5, 6});
}

inline std::string results_csv(const std::vector<CellResult>& cells) {
  std::string out =
      "case,package_size,mean_bandwidth_bps,std_bandwidth_bps,"
      "mean_utilization_pct\n";
  char line[160];
  for (const auto& cell : cells) {
    std::snprintf(line, sizeof line, "%c,%u,%.2f,%.2f,%.2f\n",
                  strategy_letter(cell.strategy), cell.package_size,
                  cell.mean_bandwidth_bps, cell.std_bandwidth_bps,
                  cell.mean_utilization_pct);
    out += line;
  }
  return out;
}

inline std::string results_table(const std::vector<CellResult>& cells) {
  std::string out =
      "case  size  bandwidth_bps  std_bps  utilization_pct  verified\n";
  char line[160];
  for (const auto& cell : cells) {
    std::snprintf(line, sizeof line, "%4c  %4u  %13.2f  %7.2f  %15.2f  %s\n",
                  strategy_letter(cell.strategy), cell.package_size,
                  cell.mean_bandwidth_bps, cell.std_bandwidth_bps,
                  cell.mean_utilization_pct,
                  cell.all_verified ? "yes" : "NO");
    out += line;
  }
  return out;
}

}  // namespace swarmsteg
