#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "swarmsteg/errors.hpp"
#include "swarmsteg/packet.hpp"
#include "swarmsteg/rng.hpp"

// Per-destination network model: fixed base delay, uniform jitter, i.i.d.
// loss with timer-driven retransmission.  Every destination runs its own
// generator seeded from (seed, address), so sessions can be simulated in
// any order or in parallel and still merge bit-identically.
//
// Draw order per packet, on its destination's generator: one Bernoulli
// per delivery attempt while loss_prob > 0 (none when it is zero), then
// one jitter draw for the attempt that gets through (skipped when
// jitter_us is zero).  Attempt k leaves at
// send_time + k * retransmit_timeout_us and arrives base_delay + jitter
// later (never before it left); the retransmitted copy is header-identical,
// timestamp included.

namespace swarmsteg {

struct ChannelConfig {
  std::uint64_t seed = 0;
  std::uint64_t base_delay_us = 25000;
  std::uint64_t jitter_us = 2000;
  double loss_prob = 0.01;
  std::uint64_t retransmit_timeout_us = 100000;

  void validate() const {
    if (loss_prob < 0.0 || loss_prob >= 1.0)
      throw DomainError("channel: loss probability must be in [0, 1)");
  }
};

struct TransmitStats {
  std::uint64_t delivered = 0;
  std::uint64_t retransmit_events = 0;
};

inline ReceivedStream transmit(
    const std::vector<PacketEvent>& schedule,
    const std::map<std::string, ChannelConfig>& configs,
    TransmitStats* stats = nullptr) {
  for (const auto& [ip, cfg] : configs) cfg.validate();

  std::map<std::string, Rng> generators;
  auto rng_for = [&](const std::string& ip,
                     const ChannelConfig& cfg) -> Rng& {
    auto it = generators.find(ip);
    if (it == generators.end())
      it = generators.emplace(ip, Rng(derive_seed(cfg.seed, ip))).first;
    return it->second;
  };

  ReceivedStream delivered;
  delivered.reserve(schedule.size());

  for (const auto& ev : schedule) {
    auto cfg_it = configs.find(ev.dest_ip);
    if (cfg_it == configs.end())
      throw DomainError("transmit: no channel configured for " + ev.dest_ip);
    const ChannelConfig& cfg = cfg_it->second;
    Rng& rng = rng_for(ev.dest_ip, cfg);

    std::uint64_t attempt = 0;
    if (cfg.loss_prob > 0.0)
      while (rng.bernoulli(cfg.loss_prob)) ++attempt;
    if (stats) stats->retransmit_events += attempt;

    const std::int64_t jitter =
        cfg.jitter_us == 0
            ? 0
            : rng.uniform_range(-static_cast<std::int64_t>(cfg.jitter_us),
                                static_cast<std::int64_t>(cfg.jitter_us));
    std::int64_t delay = static_cast<std::int64_t>(cfg.base_delay_us) + jitter;
    if (delay < 0) delay = 0;

    PacketEvent copy = ev;
    copy.is_retransmit = attempt > 0;
    copy.send_time_us = ev.send_time_us + attempt * cfg.retransmit_timeout_us;
    copy.arrival_time_us = copy.send_time_us + static_cast<std::uint64_t>(delay);
    delivered.push_back(std::move(copy));
    if (stats) ++stats->delivered;
  }

  std::stable_sort(delivered.begin(), delivered.end(),
                   [](const PacketEvent& a, const PacketEvent& b) {
                     return a.arrival_time_us < b.arrival_time_us;
                   });
  return delivered;
}

}  // namespace swarmsteg
