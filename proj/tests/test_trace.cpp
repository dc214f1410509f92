#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "swarmsteg/bits.hpp"
#include "swarmsteg/channel.hpp"
#include "swarmsteg/receiver.hpp"
#include "swarmsteg/sender.hpp"
#include "swarmsteg/trace.hpp"

using namespace swarmsteg;

namespace {

std::vector<PacketEvent> sample_events() {
  DataPackage pkg{{"10.0.0.1", "10.0.0.2", "10.0.0.3"}};
  CoverPlan cover;
  cover.filler_packets = 12;
  SendSchedule sched = build_schedule(bits_from_string("1100101"), pkg,
                                      RunPolicy{}, cover, 1000.0, 77);
  std::map<std::string, ChannelConfig> channels;
  for (const auto& ip : pkg.ips) {
    ChannelConfig cfg;
    cfg.seed = 9;
    cfg.jitter_us = 400;
    cfg.loss_prob = 0.05;
    channels[ip] = cfg;
  }
  return transmit(sched.entries, channels);
}

std::string render(const std::vector<PacketEvent>& events) {
  std::ostringstream out;
  write_trace(out, events);
  return out.str();
}

}  // namespace

TEST_CASE("trace file roundtrip is lossless") {
  const auto events = sample_events();
  REQUIRE(events.size() > 10);

  const std::string text = render(events);
  std::istringstream in(text);
  const auto back = read_trace(in);

  REQUIRE(back.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(back[i].dest_ip == events[i].dest_ip);
    CHECK(back[i].arrival_time_us == events[i].arrival_time_us);
    CHECK(back[i].send_time_us == events[i].send_time_us);
    CHECK(back[i].is_retransmit == events[i].is_retransmit);
    CHECK(back[i].header.connection_id == events[i].header.connection_id);
    CHECK(back[i].header.seq_nr == events[i].header.seq_nr);
    CHECK(back[i].header.timestamp_microseconds ==
          events[i].header.timestamp_microseconds);
    CHECK(back[i].header.type == events[i].header.type);
  }

  // Write -> read -> write is byte identical; the file is the contract.
  CHECK(render(back) == text);
}

TEST_CASE("trace text is exact for a known event") {
  PacketEvent ev;
  ev.dest_ip = "10.9.8.7";
  ev.arrival_time_us = 123456;
  ev.send_time_us = 120000;
  ev.is_retransmit = true;
  ev.header.connection_id = 0x1002;
  ev.header.seq_nr = 41;
  ev.header.timestamp_microseconds = 900;
  ev.header.type = PacketType::Data;

  CHECK(render({ev}) ==
        "arrival_us,send_us,dest_ip,conn_id,seq_nr,timestamp_us,type,"
        "is_retransmit\n"
        "123456,120000,10.9.8.7,4098,41,900,DATA,1\n");
}

TEST_CASE("trace reader accepts comments, blanks and unsorted lines") {
  std::istringstream in(
      "# capture from desk run 3\n"
      "arrival_us,send_us,dest_ip,conn_id,seq_nr,timestamp_us,type,"
      "is_retransmit\n"
      "\n"
      "900,800,10.0.0.2,4097,2,450,DATA,0   # arrives second\n"
      "500,400,10.0.0.1,4096,1,100,STATE,0\n");
  const auto events = read_trace(in);
  REQUIRE(events.size() == 2);
  CHECK(events[0].dest_ip == "10.0.0.2");
  CHECK(events[0].header.type == PacketType::Data);
  CHECK(events[1].dest_ip == "10.0.0.1");
  CHECK(events[1].header.type == PacketType::State);
  CHECK(events[1].header.timestamp_microseconds == 100);
}

TEST_CASE("trace reader reports the offending line") {
  const std::string header =
      "arrival_us,send_us,dest_ip,conn_id,seq_nr,timestamp_us,type,"
      "is_retransmit\n";

  auto line_of = [](auto fn) -> std::size_t {
    try {
      fn();
    } catch (const TraceParseError& e) {
      return e.line;
    }
    return 0;
  };

  SECTION("missing header") {
    std::istringstream in("1,2,10.0.0.1,3,4,5,DATA,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 1);
  }
  SECTION("empty input") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_trace(in), TraceParseError);
  }
  SECTION("wrong field count") {
    std::istringstream in(header + "1,2,10.0.0.1,3,4,5,DATA\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("non numeric field") {
    std::istringstream in(header + "1,2,10.0.0.1,3,4,5,DATA,0\n" +
                          "x,2,10.0.0.1,3,4,5,DATA,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 3);
  }
  SECTION("trailing junk inside a number") {
    std::istringstream in(header + "1,2,10.0.0.1,3,44z,5,DATA,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("connection id overflow") {
    std::istringstream in(header + "1,2,10.0.0.1,70000,4,5,DATA,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("timestamp overflow") {
    std::istringstream in(header + "1,2,10.0.0.1,3,4,4294967296,DATA,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("unknown packet type") {
    std::istringstream in(header + "1,2,10.0.0.1,3,4,5,PING,0\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("bad retransmit flag") {
    std::istringstream in(header + "1,2,10.0.0.1,3,4,5,DATA,2\n");
    CHECK(line_of([&] { read_trace(in); }) == 2);
  }
  SECTION("comment lines still count for numbering") {
    std::istringstream in(header + "# note\n# note\n1,2,3,4\n");
    CHECK(line_of([&] { read_trace(in); }) == 4);
  }
}

TEST_CASE("trace writer refuses unprintable destinations") {
  PacketEvent ev;
  ev.dest_ip = "bad,ip";
  std::ostringstream out;
  CHECK_THROWS_AS(write_trace(out, {ev}), DomainError);
  ev.dest_ip = "";
  CHECK_THROWS_AS(write_trace(out, {ev}), DomainError);
  ev.dest_ip = "has space";
  CHECK_THROWS_AS(write_trace(out, {ev}), DomainError);
  ev.dest_ip = "has#hash";
  CHECK_THROWS_AS(write_trace(out, {ev}), DomainError);
}

TEST_CASE("envelope roundtrip") {
  Envelope env;
  env.package_size = 4;
  env.pad_bits = 3;
  env.ips = {"10.0.0.4", "10.0.0.1", "10.0.0.3", "10.0.0.2"};

  std::ostringstream out;
  write_envelope(out, env);
  std::istringstream in(out.str());
  const Envelope back = read_envelope(in);

  CHECK(back.package_size == env.package_size);
  CHECK(back.pad_bits == env.pad_bits);
  CHECK(back.ips == env.ips);  // order is part of the secret
}

TEST_CASE("envelope validation rejects broken sidecars") {
  auto base = [] {
    return std::string(
        R"({"magic":"swarmsteg-envelope","version":1,)"
        R"("package_size":3,"pad_bits":1,)"
        R"("ips":["a","b","c"]})");
  };

  auto reject = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_envelope(in), DomainError);
  };

  SECTION("valid baseline parses") {
    std::istringstream in(base());
    CHECK(read_envelope(in).package_size == 3);
  }
  SECTION("not json") { reject("not json at all"); }
  SECTION("not an object") { reject("[1,2,3]"); }
  SECTION("wrong magic") {
    auto t = base();
    t.replace(t.find("swarmsteg-envelope"), 18, "swarmsteg-envelopX");
    reject(t);
  }
  SECTION("wrong version") {
    auto t = base();
    t.replace(t.find("\"version\":1"), 11, "\"version\":2");
    reject(t);
  }
  SECTION("missing field") {
    reject(R"({"magic":"swarmsteg-envelope","version":1,"pad_bits":0,)"
           R"("ips":["a","b"]})");
  }
  SECTION("package size out of range") {
    auto t = base();
    t.replace(t.find("\"package_size\":3"), 16, "\"package_size\":7");
    reject(t);
  }
  SECTION("too few addresses") {
    reject(R"({"magic":"swarmsteg-envelope","version":1,)"
           R"("package_size":3,"pad_bits":0,"ips":["a","b"]})");
  }
  SECTION("duplicate address") {
    reject(R"({"magic":"swarmsteg-envelope","version":1,)"
           R"("package_size":3,"pad_bits":0,"ips":["a","b","a"]})");
  }
  SECTION("pad as wide as the chunk") {
    auto t = base();
    t.replace(t.find("\"pad_bits\":1"), 12, "\"pad_bits\":2");
    reject(t);  // capacity at n=3 is 2 bits
  }
  SECTION("ips holding non strings") {
    reject(R"({"magic":"swarmsteg-envelope","version":1,)"
           R"("package_size":2,"pad_bits":0,"ips":["a",5]})");
  }
}

TEST_CASE("trace plus envelope reproduce the secret") {
  const Bits secret = bits_from_string("10110100111000101");
  DataPackage pkg{{"10.1.1.1", "10.1.1.2", "10.1.1.3", "10.1.1.4"}};
  CoverPlan cover;
  cover.noise_ips = {"172.16.0.9"};
  cover.noise_packets = 30;
  cover.filler_packets = 40;
  SendSchedule sched =
      build_schedule(secret, pkg, RunPolicy{}, cover, 2000.0, 5);

  std::map<std::string, ChannelConfig> channels;
  for (const auto& ip : pkg.ips) channels[ip] = ChannelConfig{.seed = 31};
  channels["172.16.0.9"] = ChannelConfig{.seed = 31};
  const auto delivered = transmit(sched.entries, channels);

  Envelope env;
  env.package_size = pkg.size();
  env.pad_bits = sched.pad_bits;
  env.ips = pkg.ips;

  std::ostringstream tout, eout;
  write_trace(tout, delivered);
  write_envelope(eout, env);

  std::istringstream tin(tout.str()), ein(eout.str());
  const auto events = read_trace(tin);
  const Envelope back = read_envelope(ein);

  auto report = receive(events, back.ips, back.package_size);
  REQUIRE(report.bits.size() >= back.pad_bits);
  report.bits.resize(report.bits.size() - back.pad_bits);
  CHECK(report.bits == secret);
}
