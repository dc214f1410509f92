#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "swarmsteg/experiment.hpp"

using namespace swarmsteg;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.packets_per_session = 20000;
  cfg.sessions = 1;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("strategy letters round trip") {
  for (const auto s : {PoolStrategy::EveryPeer, PoolStrategy::TopPackagePeers,
                       PoolStrategy::TopSixPeers})
    CHECK(strategy_from_letter(strategy_letter(s)) == s);
  CHECK_THROWS_AS(strategy_from_letter('D'), DomainError);
}

TEST_CASE("sessions are deterministic") {
  const auto cfg = small_config();
  const auto a = run_session(cfg, PoolStrategy::EveryPeer, 3, 0);
  const auto b = run_session(cfg, PoolStrategy::EveryPeer, 3, 0);
  CHECK(a == b);

  const auto other = run_session(cfg, PoolStrategy::EveryPeer, 3, 1);
  CHECK(a.packages != other.packages);
}

TEST_CASE("reference session for a pinned seed") {
  const auto cfg = small_config();
  const auto m = run_session(cfg, PoolStrategy::EveryPeer, 2, 0);
  CHECK(m.packages == 5774);
  CHECK(m.emitted_packets == 20000);
  CHECK(m.symbol_packets == 2 * 5774);
  CHECK(m.verified);
}

TEST_CASE("every strategy and size survives the full loop") {
  const auto cfg = small_config();
  for (const auto strat :
       {PoolStrategy::EveryPeer, PoolStrategy::TopPackagePeers,
        PoolStrategy::TopSixPeers}) {
    for (unsigned n = 2; n <= 6; ++n) {
      const auto m = run_session(cfg, strat, n, 0);
      INFO("strategy " << strategy_letter(strat) << " size " << n);
      CHECK(m.verified);
      CHECK(m.packages > 0);
      // The rewrite conserves traffic volume up to one dropped packet.
      CHECK(m.emitted_packets >= cfg.packets_per_session - 1);
      CHECK(m.emitted_packets <= cfg.packets_per_session);
    }
  }
}

TEST_CASE("bandwidth, utilization, rate and capacity stay consistent") {
  const auto cfg = small_config();
  for (unsigned n = 2; n <= 6; ++n) {
    const auto m = run_session(cfg, PoolStrategy::TopSixPeers, n, 0);
    CHECK(m.duration_s ==
          static_cast<double>(cfg.packets_per_session) / cfg.rate_pps);
    const double via_util = m.utilization_pct / 100.0 *
                            capacity_bits(n) * cfg.rate_pps /
                            static_cast<double>(n);
    CHECK_THAT(m.bandwidth_bps,
               Catch::Matchers::WithinRel(via_util, 1e-9));
  }
}

TEST_CASE("the package-ranked and six-ranked pools coincide at size six") {
  auto cfg = small_config();
  cfg.sessions = 2;
  for (std::size_t s = 0; s < cfg.sessions; ++s) {
    const auto b = run_session(cfg, PoolStrategy::TopPackagePeers, 6, s);
    const auto c = run_session(cfg, PoolStrategy::TopSixPeers, 6, s);
    CHECK(b == c);
  }
}

TEST_CASE("cells aggregate sessions") {
  auto cfg = small_config();
  cfg.sessions = 2;
  const auto cell = run_cell(cfg, PoolStrategy::EveryPeer, 2);
  REQUIRE(cell.sessions.size() == 2);
  CHECK(cell.all_verified);
  const double lo = std::min(cell.sessions[0].bandwidth_bps,
                             cell.sessions[1].bandwidth_bps);
  const double hi = std::max(cell.sessions[0].bandwidth_bps,
                             cell.sessions[1].bandwidth_bps);
  CHECK(cell.mean_bandwidth_bps >= lo);
  CHECK(cell.mean_bandwidth_bps <= hi);
  CHECK(cell.std_bandwidth_bps >= 0.0);
  CHECK(cell.wall_seconds > 0.0);

  // A single session has no spread to report.
  cfg.sessions = 1;
  const auto solo = run_cell(cfg, PoolStrategy::EveryPeer, 2);
  CHECK(solo.std_bandwidth_bps == 0.0);
}

TEST_CASE("multithreaded cells match single threaded ones") {
  auto cfg = small_config();
  cfg.sessions = 3;
  const auto serial = run_cell(cfg, PoolStrategy::TopSixPeers, 4);
  cfg.threads = 3;
  const auto parallel = run_cell(cfg, PoolStrategy::TopSixPeers, 4);
  REQUIRE(serial.sessions.size() == parallel.sessions.size());
  for (std::size_t i = 0; i < serial.sessions.size(); ++i)
    CHECK(serial.sessions[i] == parallel.sessions[i]);
  CHECK(serial.mean_bandwidth_bps == parallel.mean_bandwidth_bps);
}

TEST_CASE("csv output carries one row per cell in fixed format") {
  auto cfg = small_config();
  const auto cells = run_experiment(cfg);
  REQUIRE(cells.size() == 15);

  const auto csv = results_csv(cells);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "case,package_size,mean_bandwidth_bps,std_bandwidth_bps,"
        "mean_utilization_pct");

  std::size_t rows = 0;
  const std::string order = "AAAAABBBBBCCCCC";
  while (std::getline(in, line)) {
    char letter = 0;
    unsigned size = 0;
    double bw = 0, sd = 0, util = 0;
    REQUIRE(std::sscanf(line.c_str(), "%c,%u,%lf,%lf,%lf", &letter, &size,
                        &bw, &sd, &util) == 5);
    CHECK(letter == order[rows]);
    CHECK(size == 2 + rows % 5);
    CHECK(sd == 0.0);  // single session
    CHECK(bw > 0.0);
    ++rows;
  }
  CHECK(rows == 15);

  const auto table = results_table(cells);
  CHECK(table.find("case") != std::string::npos);
  CHECK(table.find("NO") == std::string::npos);
}

TEST_CASE("qualitative shape of the comparison holds at reduced scale") {
  ExperimentConfig cfg;
  cfg.packets_per_session = 60000;
  cfg.sessions = 1;
  cfg.seed = 7;

  std::vector<double> a_bw, a_util;
  for (unsigned n = 2; n <= 6; ++n) {
    const auto m = run_session(cfg, PoolStrategy::EveryPeer, n, 0);
    REQUIRE(m.verified);
    a_bw.push_back(m.bandwidth_bps);
    a_util.push_back(m.utilization_pct);
  }
  CHECK(a_util.front() > 50.0);
  CHECK(a_util.back() > 20.0);
  CHECK(a_util.back() < 40.0);
  for (std::size_t i = 0; i + 1 < a_bw.size(); ++i)
    CHECK(a_bw[i] <= a_bw[i + 1]);
  for (const auto bw : a_bw) {
    CHECK(bw > 301.0);
    CHECK(bw < 858.0);
  }

  const auto c2 = run_session(cfg, PoolStrategy::TopSixPeers, 2, 0);
  const auto b6 = run_session(cfg, PoolStrategy::TopPackagePeers, 6, 0);
  REQUIRE(c2.verified);
  REQUIRE(b6.verified);
  CHECK(c2.bandwidth_bps > 3.0 * b6.bandwidth_bps);
}
