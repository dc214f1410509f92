#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "swarmsteg/errors.hpp"
#include "swarmsteg/rng.hpp"

// Swarm-like cover traffic.  A pattern fixes how a client's outgoing DATA
// packets split across its peers; a generated session is a destination
// sequence with bursty structure (a peer that just received a packet is
// likely to receive the next few as well).
//
// Generation is counts-first: the per-peer totals are drawn once from the
// pattern (multinomial), then arranged into bursts whose addresses are
// weighted by the counts still unplaced and whose lengths are geometric.
// This keeps the realized mix close to the pattern even for short sessions.

namespace swarmsteg {

struct TrafficSlot {
  std::string address;
  double share;
  // An aggregate slot stands for the long tail of peers too small to
  // model individually.  It contributes cover volume but is never a
  // candidate when ranking individual peers by activity.
  bool aggregate = false;
};

struct TrafficPattern {
  std::string name;
  std::vector<TrafficSlot> slots;

  void validate() const {
    if (slots.size() < 2 || slots.size() > 64)
      throw DomainError("traffic pattern needs 2..64 slots");
    double sum = 0.0;
    for (const auto& slot : slots) {
      if (slot.address.empty())
        throw DomainError("traffic pattern: empty address");
      if (slot.share <= 0.0)
        throw DomainError("traffic pattern: share must be positive");
      sum += slot.share;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DomainError("traffic pattern: shares must sum to 1, got " +
                        std::to_string(sum));
    for (std::size_t i = 0; i < slots.size(); ++i)
      for (std::size_t j = i + 1; j < slots.size(); ++j)
        if (slots[i].address == slots[j].address)
          throw DomainError("traffic pattern: duplicate address " +
                            slots[i].address);
  }

  std::vector<std::string> addresses() const {
    std::vector<std::string> out;
    out.reserve(slots.size());
    for (const auto& slot : slots) out.push_back(slot.address);
    return out;
  }
};

// Ten named peers plus one aggregate.  The three shapes cover the swarms
// worth simulating: roughly even peers, one peer soaking up nearly all
// traffic, and a middling swarm whose sixth peer is already marginal.

inline TrafficPattern balanced_pattern() {
  return {"balanced",
          {{"peer-01", 0.16},
           {"peer-02", 0.14},
           {"peer-03", 0.12},
           {"peer-04", 0.11},
           {"peer-05", 0.10},
           {"peer-06", 0.09},
           {"peer-07", 0.08},
           {"peer-08", 0.07},
           {"peer-09", 0.05},
           {"peer-10", 0.045},
           {"peer-others", 0.035, true}}};
}

inline TrafficPattern dominant_pattern() {
  return {"dominant",
          {{"peer-01", 0.77},
           {"peer-02", 0.05},
           {"peer-03", 0.04},
           {"peer-04", 0.03},
           {"peer-05", 0.025},
           {"peer-06", 0.02},
           {"peer-07", 0.015},
           {"peer-08", 0.012},
           {"peer-09", 0.01},
           {"peer-10", 0.008},
           {"peer-others", 0.02, true}}};
}

inline TrafficPattern average_pattern() {
  return {"average",
          {{"peer-01", 0.26},
           {"peer-02", 0.21},
           {"peer-03", 0.15},
           {"peer-04", 0.085},
           {"peer-05", 0.045},
           {"peer-06", 0.008},
           {"peer-07", 0.007},
           {"peer-08", 0.006},
           {"peer-09", 0.005},
           {"peer-10", 0.004},
           {"peer-others", 0.22, true}}};
}

inline std::vector<std::string> pattern_names() {
  return {"balanced", "dominant", "average"};
}

inline TrafficPattern pattern_by_name(const std::string& name) {
  if (name == "balanced") return balanced_pattern();
  if (name == "dominant") return dominant_pattern();
  if (name == "average") return average_pattern();
  throw DomainError("unknown traffic pattern: " + name);
}

// One session's cover stream.  sequence[i] is the slot index of packet i.
struct CoverTraffic {
  std::vector<std::uint32_t> counts;
  std::vector<std::uint8_t> sequence;
};

inline CoverTraffic generate_cover(const TrafficPattern& pattern,
                                   std::size_t total_packets,
                                   double burst_mean, std::uint64_t seed) {
  pattern.validate();
  if (total_packets == 0)
    throw DomainError("generate_cover: need at least one packet");
  if (burst_mean < 1.0)
    throw DomainError("generate_cover: burst mean must be >= 1");

  const std::size_t k = pattern.slots.size();

  // Integer weights keep the categorical draw portable across platforms.
  std::vector<std::uint64_t> weight(k);
  for (std::size_t i = 0; i < k; ++i)
    weight[i] = static_cast<std::uint64_t>(
        std::llround(pattern.slots[i].share * 1e9));
  const std::uint64_t weight_total =
      std::accumulate(weight.begin(), weight.end(), std::uint64_t{0});

  CoverTraffic out;
  out.counts.assign(k, 0);

  Rng count_rng(derive_seed(seed, "traffic-counts"));
  for (std::size_t p = 0; p < total_packets; ++p) {
    std::uint64_t u = count_rng.uniform(weight_total);
    std::size_t slot = 0;
    while (u >= weight[slot]) {
      u -= weight[slot];
      ++slot;
    }
    ++out.counts[slot];
  }

  out.sequence.reserve(total_packets);
  std::vector<std::uint64_t> remaining(out.counts.begin(), out.counts.end());
  std::uint64_t total_remaining = total_packets;

  Rng burst_rng(derive_seed(seed, "traffic-bursts"));
  while (total_remaining > 0) {
    std::uint64_t u = burst_rng.uniform(total_remaining);
    std::size_t slot = 0;
    while (u >= remaining[slot]) {
      u -= remaining[slot];
      ++slot;
    }
    const std::uint64_t len = burst_rng.geometric(burst_mean, remaining[slot]);
    out.sequence.insert(out.sequence.end(), len,
                        static_cast<std::uint8_t>(slot));
    remaining[slot] -= len;
    total_remaining -= len;
  }
  return out;
}

// Slot indices ordered most active first, judged by realized counts.
// Aggregate slots are skipped; ties break toward the lower slot index so
// the ranking is total.
inline std::vector<std::size_t> activity_ranking(
    const CoverTraffic& cover, const TrafficPattern& pattern) {
  if (cover.counts.size() != pattern.slots.size())
    throw DomainError("activity_ranking: cover does not match pattern");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pattern.slots.size(); ++i)
    if (!pattern.slots[i].aggregate) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cover.counts[a] != cover.counts[b])
      return cover.counts[a] > cover.counts[b];
    return a < b;
  });
  return order;
}

}  // namespace swarmsteg
