#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "swarmsteg/bits.hpp"
#include "swarmsteg/errors.hpp"
#include "swarmsteg/lehmer.hpp"
#include "swarmsteg/packet.hpp"

// Secret bits -> wire schedule.  The secret is chunked into
// capacity_bits(n) pieces (last chunk zero-padded), each chunk becomes a
// permutation, and each permutation is emitted as n odd-length symbol
// runs in permuted order.  Cover traffic is woven in between runs:
// even-length filler runs to in-package addresses and free-length noise
// runs to outside addresses.
//
// Two layout rules keep the receiver's parity rule sound:
//   - a filler run never sits directly against a symbol run of the same
//     address, so maximal runs stay cleanly odd (symbol) or even (filler);
//   - when consecutive packages would put two equal-address symbol runs
//     back to back, a two-packet filler run to a different in-package
//     address is inserted as a separator.

namespace swarmsteg {

namespace detail {

struct CoverBlock {
  std::string ip;
  std::size_t len;
  PacketRole role;
};

}  // namespace detail

inline SendSchedule build_schedule(const Bits& secret, const DataPackage& pkg,
                                   const RunPolicy& policy,
                                   const CoverPlan& cover, double rate_pps,
                                   std::uint64_t seed) {
  pkg.validate();
  policy.validate();
  if (secret.empty()) throw DomainError("build_schedule: secret is empty");
  if (rate_pps <= 0) throw DomainError("build_schedule: rate must be positive");
  for (const auto& ip : cover.noise_ips)
    if (std::find(pkg.ips.begin(), pkg.ips.end(), ip) != pkg.ips.end())
      throw DomainError("build_schedule: noise address " + ip +
                        " is inside the package");
  if (cover.noise_packets > 0 && cover.noise_ips.empty())
    throw DomainError("build_schedule: noise packets without noise addresses");

  const unsigned n = pkg.size();
  const unsigned cap = capacity_bits(n);
  const auto [package_count, pad_bits] = pad_info(secret.size(), n);

  std::vector<Permutation> perms;
  perms.reserve(package_count);
  for (std::size_t p = 0; p < package_count; ++p) {
    Bits chunk(secret.begin() + static_cast<std::ptrdiff_t>(p * cap),
               secret.begin() +
                   static_cast<std::ptrdiff_t>(
                       std::min(secret.size(), (p + 1) * cap)));
    chunk.resize(cap, 0);  // zero-pad the final chunk
    perms.push_back(bits_to_permutation(chunk, n));
  }

  // Cover blocks are pre-assigned to gaps between symbol runs.  Gap g sits
  // before the g-th symbol run; the last gap trails the final run.
  const std::size_t run_count = package_count * n;
  std::vector<std::vector<detail::CoverBlock>> gaps(run_count + 1);
  Rng cover_rng(derive_seed(seed, "cover-layout"));

  std::size_t noise_left = cover.noise_packets;
  while (noise_left > 0) {
    const std::size_t len = std::min<std::size_t>(
        noise_left, 1 + cover_rng.uniform(3));
    const auto& ip = cover.noise_ips[cover_rng.uniform(cover.noise_ips.size())];
    gaps[cover_rng.uniform(gaps.size())].push_back(
        {ip, len, PacketRole::Noise});
    noise_left -= len;
  }

  const unsigned filler_len =
      policy.filler_run_length > 0 ? policy.filler_run_length : 2;
  std::size_t filler_runs = cover.filler_packets / filler_len;
  while (filler_runs-- > 0) {
    const auto& ip = pkg.ips[cover_rng.uniform(n)];
    gaps[cover_rng.uniform(gaps.size())].push_back(
        {ip, filler_len, PacketRole::Filler});
  }

  SendSchedule out;
  out.bits_embedded = package_count * cap;
  out.pad_bits = pad_bits;

  ScheduleBuilder builder(rate_pps, seed);
  std::string last_ip;  // address of the most recently emitted packet

  auto emit_run = [&](const std::string& ip, std::size_t len,
                      PacketRole role) {
    for (std::size_t i = 0; i < len; ++i) {
      out.entries.push_back(builder.make_packet(ip));
      out.roles.push_back(role);
    }
    last_ip = ip;
  };

  // A filler block may not touch a symbol run of its own address; rotate
  // to another in-package address when the drawn one collides.
  auto filler_ip_for = [&](const std::string& drawn,
                           const std::string& next_symbol_ip) -> std::string {
    if (drawn != last_ip && drawn != next_symbol_ip) return drawn;
    for (const auto& ip : pkg.ips)
      if (ip != last_ip && ip != next_symbol_ip) return ip;
    return {};  // no safe address; caller drops the block
  };

  std::size_t run_index = 0;
  for (std::size_t p = 0; p < package_count; ++p) {
    for (unsigned s = 0; s < n; ++s, ++run_index) {
      const std::string& symbol_ip = pkg.ips[perms[p][s]];
      for (const auto& block : gaps[run_index]) {
        if (block.role == PacketRole::Noise) {
          emit_run(block.ip, block.len, block.role);
        } else {
          const auto ip = filler_ip_for(block.ip, symbol_ip);
          if (!ip.empty()) emit_run(ip, block.len, block.role);
        }
      }
      if (s == 0 && last_ip == symbol_ip) {
        // Package boundary with equal addresses on both sides: separate
        // with a minimal filler pair so the two odd runs cannot merge.
        for (const auto& ip : pkg.ips) {
          if (ip != symbol_ip) {
            emit_run(ip, 2, PacketRole::Filler);
            break;
          }
        }
      }
      emit_run(symbol_ip, policy.symbol_run_length, PacketRole::Symbol);
    }
    out.package_boundaries.push_back(out.entries.size());
  }
  for (const auto& block : gaps[run_count]) {
    if (block.role == PacketRole::Noise) {
      emit_run(block.ip, block.len, block.role);
    } else {
      const auto ip = filler_ip_for(block.ip, "");
      if (!ip.empty()) emit_run(ip, block.len, block.role);
    }
  }

  if (cover.max_total_packets > 0 &&
      out.entries.size() > cover.max_total_packets)
    throw CapacityError(
        "schedule needs " + std::to_string(out.entries.size()) +
        " packets but the cover plan allows only " +
        std::to_string(cover.max_total_packets));

  return out;
}

}  // namespace swarmsteg
