// Command line front end: encode secrets into packet traces, decode
// traces back, run the bandwidth experiment grid, print capacities.
//
// Exit codes are part of the interface so scripts can tell failure
// modes apart: 2 file I/O, 3 domain errors, 4 ambiguous timestamp
// order, 5 out-of-codebook package, 6 malformed trace line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmsteg/bits.hpp"
#include "swarmsteg/channel.hpp"
#include "swarmsteg/errors.hpp"
#include "swarmsteg/experiment.hpp"
#include "swarmsteg/lehmer.hpp"
#include "swarmsteg/receiver.hpp"
#include "swarmsteg/sender.hpp"
#include "swarmsteg/trace.hpp"
#include "swarmsteg/traffic.hpp"

namespace {

using namespace swarmsteg;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "2..6", "2,4,6" or "3"; values kept in the order given.
std::vector<unsigned> parse_sizes(const std::string& text, unsigned lo,
                                  unsigned hi) {
  std::vector<unsigned> sizes;
  auto push = [&](unsigned v) {
    if (v < lo || v > hi)
      throw DomainError("size " + std::to_string(v) + " outside " +
                        std::to_string(lo) + ".." + std::to_string(hi));
    for (unsigned seen : sizes)
      if (seen == v) throw DomainError("size " + std::to_string(v) + " repeated");
    sizes.push_back(v);
  };
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const unsigned a = static_cast<unsigned>(std::stoul(text.substr(0, dots)));
    const unsigned b = static_cast<unsigned>(std::stoul(text.substr(dots + 2)));
    if (a > b) throw DomainError("size range " + text + " is reversed");
    for (unsigned v = a; v <= b; ++v) push(v);
  } else {
    for (const auto& item : split_list(text))
      push(static_cast<unsigned>(std::stoul(item)));
  }
  if (sizes.empty()) throw DomainError("empty size list");
  return sizes;
}

Bits secret_to_bits(const std::string& data, const std::string& format) {
  if (format == "raw") {
    std::vector<std::uint8_t> bytes(data.begin(), data.end());
    return bits_from_bytes(bytes);
  }
  std::string trimmed;
  for (char c : data)
    if (c != ' ' && c != '\n' && c != '\r' && c != '\t') trimmed += c;
  return bits_from_string(trimmed);
}

std::string read_all(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_all(in);
}

struct EncodeArgs {
  std::string ips;
  std::string secret;
  std::string secret_file;
  std::string format = "bits";
  std::string out;
  double rate_pps = 1350.0;
  std::uint64_t seed = 1;
  std::string noise_ips;
  std::size_t noise_packets = 0;
  std::size_t filler_packets = 0;
  unsigned symbol_run = 1;
  unsigned filler_run = 2;
  std::uint64_t base_delay_us = 0;
  std::uint64_t jitter_us = 0;
  double loss = 0.0;
  std::uint64_t rto_us = 100000;
};

int cmd_encode(const EncodeArgs& a) {
  DataPackage pkg{split_list(a.ips)};

  std::string raw;
  if (!a.secret.empty())
    raw = a.secret;
  else if (!a.secret_file.empty())
    raw = read_file(a.secret_file);
  else
    raw = read_all(std::cin);
  const Bits secret = secret_to_bits(raw, a.format);

  RunPolicy policy{a.symbol_run, a.filler_run};
  CoverPlan cover;
  cover.noise_ips = split_list(a.noise_ips);
  cover.noise_packets = a.noise_packets;
  cover.filler_packets = a.filler_packets;

  const SendSchedule sched =
      build_schedule(secret, pkg, policy, cover, a.rate_pps, a.seed);

  ChannelConfig ch;
  ch.seed = a.seed;
  ch.base_delay_us = a.base_delay_us;
  ch.jitter_us = a.jitter_us;
  ch.loss_prob = a.loss;
  ch.retransmit_timeout_us = a.rto_us;
  std::map<std::string, ChannelConfig> channels;
  for (const auto& ip : pkg.ips) channels[ip] = ch;
  for (const auto& ip : cover.noise_ips) channels[ip] = ch;

  TransmitStats stats;
  const ReceivedStream delivered = transmit(sched.entries, channels, &stats);

  std::ofstream tout(a.out, std::ios::binary);
  if (!tout) throw IoError("cannot open " + a.out);
  write_trace(tout, delivered);

  Envelope env;
  env.package_size = pkg.size();
  env.pad_bits = sched.pad_bits;
  env.ips = pkg.ips;
  const std::string meta_path = a.out + ".meta.json";
  std::ofstream eout(meta_path, std::ios::binary);
  if (!eout) throw IoError("cannot open " + meta_path);
  write_envelope(eout, env);

  std::cerr << "encoded " << secret.size() << " bits into "
            << sched.entries.size() << " packets ("
            << sched.package_boundaries.size() << " packages, "
            << sched.pad_bits << " pad bits, " << stats.retransmit_events
            << " retransmits)\n"
            << "trace: " << a.out << "\nenvelope: " << meta_path << '\n';
  return 0;
}

struct DecodeArgs {
  std::string trace;
  std::string meta;
  std::string format = "bits";
  std::string out = "-";
};

int cmd_decode(const DecodeArgs& a) {
  std::ifstream tin(a.trace, std::ios::binary);
  if (!tin) throw IoError("cannot open " + a.trace);
  const auto events = read_trace(tin);

  const std::string meta_path =
      a.meta.empty() ? a.trace + ".meta.json" : a.meta;
  std::ifstream ein(meta_path, std::ios::binary);
  if (!ein) throw IoError("cannot open " + meta_path);
  const Envelope env = read_envelope(ein);

  std::set<std::string> data_dests;
  for (const auto& ev : events)
    if (ev.header.type == PacketType::Data) data_dests.insert(ev.dest_ip);
  for (const auto& ip : env.ips)
    if (!data_dests.count(ip))
      throw DomainError("envelope address " + ip +
                        " never appears in the trace");

  const auto ordered = restore_order(events);
  const auto ex = extract_symbols_lenient(ordered, env.ips, env.package_size);
  Bits bits = decode_bits(ex.packages, env.package_size);

  std::cerr << "decoded " << ex.packages.size() << " packages, discarded "
            << ex.discarded_even_runs << " even runs, skipped "
            << ex.packets_out_of_package << " outside packets\n";
  if (ex.corruption_at)
    std::cerr << "warning: symbol repeated inside a package at packet "
              << *ex.corruption_at << "; extraction stopped there\n";

  const bool clean_tail = ex.pending.empty() && !ex.corruption_at;
  if (clean_tail) {
    if (env.pad_bits > bits.size())
      throw DomainError("envelope pad exceeds the recovered bit count");
    bits.resize(bits.size() - env.pad_bits);
  } else if (!ex.pending.empty()) {
    std::cerr << "warning: incomplete tail, " << ex.pending.size()
              << " symbols pending; final package missing from output\n";
  }

  std::string payload;
  if (a.format == "raw") {
    if (bits.size() % 8 != 0)
      throw DomainError("recovered " + std::to_string(bits.size()) +
                        " bits, not a whole byte count; use --format bits");
    const auto bytes = bits_to_bytes(bits);
    payload.assign(bytes.begin(), bytes.end());
  } else {
    payload = bits_to_string(bits) + "\n";
  }

  if (a.out == "-" || a.out.empty()) {
    std::cout.write(payload.data(),
                    static_cast<std::streamsize>(payload.size()));
    std::cout.flush();
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw IoError("cannot open " + a.out);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("write failed: " + a.out);
  }
  return 0;
}

struct ExperimentArgs {
  std::string cases = "A,B,C";
  std::string sizes = "2..6";
  std::uint64_t packets = 500000;
  double rate_pps = 1350.0;
  double burst_mean = 2.0;
  std::size_t sessions = 3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string preset = "average";
  std::string broad_preset = "balanced";
  std::uint64_t jitter_us = 2000;
  double loss = 0.01;
  std::string out;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  cfg.packets_per_session = a.packets;
  cfg.rate_pps = a.rate_pps;
  cfg.burst_mean = a.burst_mean;
  cfg.sessions = a.sessions;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.ranked_pattern = pattern_by_name(a.preset);
  cfg.broad_pattern = pattern_by_name(a.broad_preset);
  cfg.channel.jitter_us = a.jitter_us;
  cfg.channel.loss_prob = a.loss;

  std::vector<PoolStrategy> strategies;
  for (const auto& item : split_list(a.cases)) {
    if (item.size() != 1)
      throw DomainError("case must be a single letter, got '" + item + "'");
    strategies.push_back(strategy_from_letter(item[0]));
  }
  const auto sizes = parse_sizes(a.sizes, 2, 6);

  const auto cells = run_experiment(cfg, strategies, sizes);
  std::cout << results_table(cells);

  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw IoError("cannot open " + a.out);
    out << results_csv(cells);
    if (!out) throw IoError("write failed: " + a.out);
    std::cerr << "csv: " << a.out << '\n';
  }
  return 0;
}

int cmd_capacity(const std::string& sizes_text) {
  const auto sizes = parse_sizes(sizes_text, 2, 20);
  std::printf("%4s  %15s  %13s\n", "size", "permutations", "capacity_bits");
  for (unsigned n : sizes)
    std::printf("%4u  %15llu  %13u\n", n,
                static_cast<unsigned long long>(factorial(n)),
                capacity_bits(n));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "packet order covert channel: secrets ride the send order of "
      "micro-transport DATA packets across several receivers"};
  app.require_subcommand(1);

  std::string capacity_sizes = "2..6";
  auto* cap = app.add_subcommand("capacity", "print bits per package size");
  cap->add_option("--sizes", capacity_sizes, "sizes, e.g. 2..6 or 2,4");

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "embed a secret into a trace");
  encode->add_option("--ips", enc.ips, "package addresses, comma separated, shared-secret order")
      ->required();
  encode->add_option("--out", enc.out, "trace output path")->required();
  encode->add_option("--secret", enc.secret, "inline secret");
  encode->add_option("--secret-file", enc.secret_file,
                     "secret file (default: stdin)");
  encode->add_option("--format", enc.format, "bits|raw (default bits)")
      ->check(CLI::IsMember({"bits", "raw"}));
  encode->add_option("--rate-pps", enc.rate_pps, "send rate, packets/s");
  encode->add_option("--seed", enc.seed, "deterministic seed");
  encode->add_option("--noise-ips", enc.noise_ips,
                     "cover addresses outside the package");
  encode->add_option("--noise-packets", enc.noise_packets,
                     "cover packets to noise addresses");
  encode->add_option("--filler-packets", enc.filler_packets,
                     "even-run filler packets inside the package");
  encode->add_option("--symbol-run", enc.symbol_run, "odd symbol run length");
  encode->add_option("--filler-run", enc.filler_run, "even filler run length");
  encode->add_option("--base-delay-us", enc.base_delay_us,
                     "channel propagation delay");
  encode->add_option("--jitter-us", enc.jitter_us, "channel jitter bound");
  encode->add_option("--loss", enc.loss, "loss probability [0,1)");
  encode->add_option("--retransmit-timeout-us", enc.rto_us,
                     "retransmission timeout");

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "recover a secret from a trace");
  decode->add_option("--trace", dec.trace, "trace input path")->required();
  decode->add_option("--meta", dec.meta,
                     "envelope path (default: trace + .meta.json)");
  decode->add_option("--format", dec.format, "bits|raw (default bits)")
      ->check(CLI::IsMember({"bits", "raw"}));
  decode->add_option("--out", dec.out, "secret output path, - for stdout");

  ExperimentArgs exp;
  auto* experiment =
      app.add_subcommand("experiment", "run the bandwidth measurement grid");
  experiment->add_option("--case", exp.cases, "cases, e.g. A,B,C");
  experiment->add_option("--sizes", exp.sizes, "package sizes, e.g. 2..6");
  experiment->add_option("--packets", exp.packets, "packets per session");
  experiment->add_option("--rate-pps", exp.rate_pps, "carrier rate");
  experiment->add_option("--burst-mean", exp.burst_mean,
                         "mean same-destination burst length");
  experiment->add_option("--sessions", exp.sessions, "sessions per cell");
  experiment->add_option("--seed", exp.seed, "deterministic seed");
  experiment->add_option("--threads", exp.threads, "worker threads");
  experiment->add_option("--preset", exp.preset,
                         "traffic preset for ranked cases B and C")
      ->check(CLI::IsMember(pattern_names()));
  experiment->add_option("--broad-preset", exp.broad_preset,
                         "traffic preset for the every-peer case A")
      ->check(CLI::IsMember(pattern_names()));
  experiment->add_option("--jitter-us", exp.jitter_us, "channel jitter bound");
  experiment->add_option("--loss", exp.loss, "loss probability [0,1)");
  experiment->add_option("--out", exp.out, "also write CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cap->parsed()) return cmd_capacity(capacity_sizes);
    if (encode->parsed()) return cmd_encode(enc);
    if (decode->parsed()) return cmd_decode(dec);
    if (experiment->parsed()) return cmd_experiment(exp);
  } catch (const TraceParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 6;
  } catch (const OutOfCodebookError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const AmbiguousOrderError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
