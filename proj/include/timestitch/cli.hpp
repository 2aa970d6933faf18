#ifndef TIMESTITCH_CLI_HPP
#define TIMESTITCH_CLI_HPP

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "timestitch/bench.hpp"
#include "timestitch/dd.hpp"
#include "timestitch/device.hpp"
#include "timestitch/qasm.hpp"
#include "timestitch/sched.hpp"
#include "timestitch/sim.hpp"
#include "timestitch/slice.hpp"
#include "timestitch/tuner.hpp"

namespace timestitch::cli {

inline constexpr const char* kDeviceEnv = "TIMESTITCH_DEVICE";

struct RunConfig {
  std::string input;     // circuit .qasm
  std::string schedule;  // timed .qasm, replayed as written
  std::string bench;
  std::size_t n = 0;
  std::string device;
  std::string policy = "alap";
  std::string mode = "ts-si-c";
  std::string dd = "off";
  double dd_factor = 4.0;
  std::size_t budget = kDefaultBudget;
  std::uint64_t shots = kDefaultShots;
  std::uint64_t eval_shots = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;
  std::string json;
  std::string accepted;  // comma-separated bitstrings
  BenchParams params;
};

namespace detail {

inline std::string fixed(double v, int digits = 6) { return timestitch::detail::fixed(v, digits); }

inline Policy parse_policy(const std::string& s) {
  if (s == "asap") return Policy::ASAP;
  if (s == "alap") return Policy::ALAP;
  if (s == "middle") return Policy::Middle;
  throw Error("unknown policy '" + s + "' (asap, alap, middle)");
}

inline TuneMode parse_mode(const std::string& s) {
  if (s == "ts-si") return TuneMode::TS_SI;
  if (s == "ts-si-c") return TuneMode::TS_SI_C;
  throw Error("unknown mode '" + s + "' (ts-si, ts-si-c)");
}

inline std::optional<DDConfig> parse_dd(const RunConfig& rc) {
  if (rc.dd == "off") return std::nullopt;
  if (rc.dd != "on" && rc.dd != "heuristic") {
    throw Error("unknown dd setting '" + rc.dd + "' (off, on, heuristic)");
  }
  DDConfig cfg = DDConfig::xyxy(rc.dd == "heuristic");
  cfg.heuristic_factor = rc.dd_factor;
  cfg.check();
  return cfg;
}

inline std::shared_ptr<const DeviceModel> load_device_for(const RunConfig& rc) {
  std::string path = rc.device;
  if (path.empty()) {
    if (const char* env = std::getenv(kDeviceEnv)) path = env;
  }
  if (path.empty()) return std::make_shared<const DeviceModel>(reference_device());
  return std::make_shared<const DeviceModel>(load_device(path));
}

inline std::set<std::string> split_accepted(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    if (item.find_first_not_of("01") != std::string::npos) {
      throw Error("accepted output '" + item + "' is not a bitstring");
    }
    out.insert(item);
  }
  return out;
}

inline Benchmark load_benchmark(const RunConfig& rc, const DeviceModel* d = nullptr) {
  const int sources = !rc.input.empty() + !rc.bench.empty() + !rc.schedule.empty();
  if (sources != 1) throw Error("give exactly one of --input, --schedule or --bench");
  Benchmark b;
  if (!rc.bench.empty()) {
    const auto kind = parse_bench_kind(rc.bench);
    b = make_benchmark(kind, rc.n ? rc.n : default_size(kind), rc.params, d);
    if (!rc.accepted.empty()) b.accepted = split_accepted(rc.accepted);
  } else {
    b = benchmark_from_file(rc.input.empty() ? rc.schedule : rc.input,
                            split_accepted(rc.accepted));
  }
  return b;
}

/// The schedule to work on: a replayed timed file, or the circuit under the policy.
inline TimedCircuit load_schedule(const RunConfig& rc, const Benchmark& b,
                                  std::shared_ptr<const DeviceModel> d) {
  if (!rc.schedule.empty()) return schedule(b.circuit, std::move(d), Policy::ASAP);
  return schedule(b.circuit, std::move(d), parse_policy(rc.policy));
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  f << text;
}

inline std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
  return out;
}

inline std::string distribution_lines(const OutcomeDistribution& d) {
  std::ostringstream os;
  for (const auto& [bits, n] : d.counts) os << "count " << bits << " " << n << "\n";
  return os.str();
}

struct PolicyRow {
  std::string name;
  TimedCircuit schedule;
  std::size_t inserted = 0;
  double pos = 0.0;
  double hellinger = 0.0;
};

inline std::uint64_t eval_seed(std::uint64_t seed) { return derive_seed(seed, 0xe7a1ULL); }

// ---------------------------------------------------------------------------

inline int cmd_bench(const RunConfig& rc, std::ostream& out) {
  if (rc.bench.empty()) throw Error("bench requires --bench");
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  const std::string text = qasm::serialize(b.circuit);
  out << "benchmark " << b.name << " qubits=" << b.circuit.num_qubits()
      << " instructions=" << b.circuit.size() << " cx_depth=" << cx_depth(b.circuit)
      << " accepted=" << join(b.accepted) << " provenance=" << b.provenance << "\n";
  if (!rc.out.empty()) {
    const std::filesystem::path dir(rc.out);
    write_file(dir / (b.name + ".qasm"), text);
    write_file(dir / (b.name + ".accepted"), join(b.accepted) + "\n");
    out << "wrote " << (dir / (b.name + ".qasm")).string() << "\n";
  } else {
    out << text;
  }
  return 0;
}

inline int cmd_schedule(const RunConfig& rc, std::ostream& out) {
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  const auto tc = load_schedule(rc, b, d);
  out << timeline_report(tc, find_slack_windows(tc));
  if (!rc.out.empty()) write_file(rc.out, to_timed_qasm(tc));
  return 0;
}

inline int cmd_slice(const RunConfig& rc, std::ostream& out) {
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  const auto tc = schedule(b.circuit, d, Policy::ALAP);
  const auto original_depth = cx_depth(b.circuit);
  std::ostringstream manifest;
  manifest << "window qubit start duration offset_min offset_max slice_cx_depth si_cx_depth "
              "original_cx_depth criteria\n";
  for (const auto& w : find_slack_windows(tc)) {
    const auto si = build_si_circuit(tc, w, w.block_offset);
    const auto slice_depth = cx_depth(build_slice(tc, w));
    manifest << w.id << " " << w.qubit << " " << w.start << " " << w.duration << " 0 "
             << w.max_offset() << " " << slice_depth << " " << cx_depth(si.unitary_part()) << " "
             << original_depth << " " << (passes_depth_criteria(si, b.circuit) ? "pass" : "fail")
             << "\n";
    if (!rc.out.empty()) {
      write_file(std::filesystem::path(rc.out) / ("si_w" + std::to_string(w.id) + ".qasm"),
                 to_timed_qasm(si.combined()));
    }
  }
  if (!rc.out.empty()) write_file(std::filesystem::path(rc.out) / "manifest.txt", manifest.str());
  out << manifest.str();
  return 0;
}

inline PipelineOptions pipeline_options(const RunConfig& rc, TuneMode mode) {
  PipelineOptions opt;
  opt.mode = mode;
  opt.budget = rc.budget;
  opt.shots = rc.shots;
  opt.seed = rc.seed;
  opt.threads = rc.threads;
  return opt;
}

inline int cmd_tune(const RunConfig& rc, std::ostream& out) {
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  DensityMatrixBackend backend;
  const auto res = run_pipeline(b.circuit, d, backend, pipeline_options(rc, parse_mode(rc.mode)));
  TimedCircuit final_schedule = res.stitched.schedule;
  std::size_t inserted = 0;
  if (auto cfg = parse_dd(rc)) final_schedule = apply_dd(final_schedule, *cfg, &inserted);
  out << tuning_report(res);
  out << "dd " << rc.dd << " inserted=" << inserted
      << " final_duration=" << final_schedule.total_duration() << "\n";
  if (!rc.out.empty()) write_file(rc.out, to_timed_qasm(final_schedule));
  return 0;
}

inline int cmd_run(const RunConfig& rc, std::ostream& out) {
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  TimedCircuit tc = load_schedule(rc, b, d);
  std::size_t inserted = 0;
  if (auto cfg = parse_dd(rc)) tc = apply_dd(tc, *cfg, &inserted);
  const auto dist = DensityMatrixBackend{}.run(tc, rc.eval_shots, eval_seed(rc.seed));
  const double p = pos(dist, b.accepted);
  const double h = hellinger_fidelity(to_probabilities(dist), ideal_distribution(tc));
  out << "run circuit=" << b.name << " device=" << d->name << " total_duration="
      << tc.total_duration() << " inserted=" << inserted << " shots=" << rc.eval_shots
      << " seed=" << rc.seed << "\n";
  out << distribution_lines(dist);
  out << "accepted " << join(b.accepted) << "\n";
  out << "pos " << fixed(p) << "\n";
  out << "hellinger " << fixed(h) << "\n";
  if (!rc.json.empty()) {
    nlohmann::json j;
    j["circuit"] = b.name;
    j["device"] = d->name;
    j["total_duration"] = tc.total_duration();
    j["shots"] = rc.eval_shots;
    j["seed"] = rc.seed;
    j["counts"] = dist.counts;
    j["pos"] = p;
    j["hellinger"] = h;
    write_file(rc.json, j.dump(2) + "\n");
  }
  return 0;
}

inline std::vector<PolicyRow> compare_policies(const RunConfig& rc, const Benchmark& b,
                                               const std::shared_ptr<const DeviceModel>& d) {
  DensityMatrixBackend backend;
  std::vector<PolicyRow> rows;
  auto add = [&](std::string name, TimedCircuit tc, std::size_t inserted = 0) {
    rows.push_back({std::move(name), std::move(tc), inserted, 0.0, 0.0});
  };
  const auto alap = schedule(b.circuit, d, Policy::ALAP);
  add("ALAP", alap);
  add("ASAP", schedule(b.circuit, d, Policy::ASAP));
  add("Middle", schedule(b.circuit, d, Policy::Middle));
  const auto ts_si = run_pipeline(b.circuit, d, backend, pipeline_options(rc, TuneMode::TS_SI));
  const auto ts_sic = run_pipeline(b.circuit, d, backend, pipeline_options(rc, TuneMode::TS_SI_C));
  add("TS-SI", ts_si.stitched.schedule);
  add("TS-SI+C", ts_sic.stitched.schedule);

  DDConfig plain = DDConfig::xyxy(false);
  DDConfig heur = DDConfig::xyxy(true);
  heur.heuristic_factor = rc.dd_factor;
  heur.check();
  std::size_t k = 0;
  auto dd_row = [&](const std::string& name, const TimedCircuit& base, const DDConfig& cfg) {
    auto tc = apply_dd(base, cfg, &k);
    add(name, std::move(tc), k);
  };
  dd_row("DD", alap, plain);
  dd_row("DD(H)", alap, heur);
  dd_row("TS+DD", ts_sic.stitched.schedule, plain);
  dd_row("TS+DD(H)", ts_sic.stitched.schedule, heur);

  const auto ideal = ideal_distribution(b.circuit);
  for (auto& r : rows) {
    const auto dist = backend.run(r.schedule, rc.eval_shots, eval_seed(rc.seed));
    r.pos = pos(dist, b.accepted);
    r.hellinger = hellinger_fidelity(to_probabilities(dist), ideal);
  }
  return rows;
}

inline std::string compare_table(const RunConfig& rc, const Benchmark& b, const DeviceModel& d,
                                 const std::vector<PolicyRow>& rows) {
  std::ostringstream os;
  os << "compare circuit=" << b.name << " device=" << d.name << " seed=" << rc.seed
     << " budget=" << rc.budget << " shots=" << rc.shots << " eval_shots=" << rc.eval_shots
     << " dd_factor=" << fixed(rc.dd_factor, 2) << "\n";
  os << "accepted " << join(b.accepted) << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %12s %9s %9s %10s %10s\n", "policy", "duration",
                "inserted", "pos", "rel_pos", "hellinger");
  os << line;
  const double base = rows.front().pos;
  for (const auto& r : rows) {
    const std::string rel = base > 0.0 ? fixed((r.pos - base) / base, 4) : std::string("nan");
    std::snprintf(line, sizeof line, "%-10s %12lld %9zu %9.4f %10s %10.4f\n", r.name.c_str(),
                  static_cast<long long>(r.schedule.total_duration()), r.inserted, r.pos,
                  rel.c_str(), r.hellinger);
    os << line;
  }
  return os.str();
}

inline int cmd_compare(const RunConfig& rc, std::ostream& out) {
  const auto d = load_device_for(rc);
  const auto b = load_benchmark(rc, d.get());
  const auto rows = compare_policies(rc, b, d);
  const auto table = compare_table(rc, b, *d, rows);
  out << table;
  if (!rc.out.empty()) write_file(rc.out, table);
  if (!rc.json.empty()) {
    nlohmann::json j;
    j["circuit"] = b.name;
    j["device"] = d->name;
    j["seed"] = rc.seed;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"policy", r.name},
                           {"total_duration", r.schedule.total_duration()},
                           {"inserted", r.inserted},
                           {"pos", r.pos},
                           {"hellinger", r.hellinger}});
    }
    write_file(rc.json, j.dump(2) + "\n");
  }
  return 0;
}

inline void add_source_options(CLI::App* app, RunConfig& rc) {
  app->add_option("--input", rc.input, "OpenQASM 2 circuit file");
  app->add_option("--bench", rc.bench, "built-in benchmark: ghz, qft, qaoa, adder, rep, hahn");
  app->add_option("--n", rc.n, "benchmark size");
  app->add_option("--target", rc.params.qft_target, "qft output bitstring");
  app->add_option("--adder-a", rc.params.adder_a, "adder first addend (0-3)");
  app->add_option("--adder-b", rc.params.adder_b, "adder second addend (0-3)");
  app->add_option("--hahn-split", rc.params.hahn_split, "idle slots before the hahn X");
  app->add_option("--accepted", rc.accepted, "comma-separated accepted outputs");
  app->add_option("--device", rc.device, std::string("device JSON (default: $") + kDeviceEnv +
                                             ", else the built-in reference device)");
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Slack-window gate-position tuning for scheduled quantum circuits", "timestitch"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "write a benchmark circuit and its accepted outputs");
  detail::add_source_options(bench, rc);
  bench->add_option("--out", rc.out, "output directory");

  auto* sched = app.add_subcommand("schedule", "schedule a circuit and report its slack windows");
  auto* windows = app.add_subcommand("windows", "same report as schedule");
  for (auto* s : {sched, windows}) {
    detail::add_source_options(s, rc);
    s->add_option("--schedule", rc.schedule, "timed QASM replayed as written");
    s->add_option("--policy", rc.policy, "alap, asap or middle");
    s->add_option("--out", rc.out, "write the schedule as timed QASM");
  }

  auto* slice = app.add_subcommand("slice", "emit slice+inverse circuits and the depth manifest");
  detail::add_source_options(slice, rc);
  slice->add_option("--out", rc.out, "output directory");

  auto* tune = app.add_subcommand("tune", "tune slack windows and stitch the schedule");
  detail::add_source_options(tune, rc);

  auto* run = app.add_subcommand("run", "simulate a schedule and score it");
  detail::add_source_options(run, rc);
  run->add_option("--schedule", rc.schedule, "timed QASM replayed as written");
  run->add_option("--policy", rc.policy, "alap, asap or middle");

  auto* compare = app.add_subcommand("compare", "evaluate every scheduling policy");
  detail::add_source_options(compare, rc);

  for (auto* s : {tune, compare}) {
    s->add_option("--budget", rc.budget, "tuning circuits across all windows");
    s->add_option("--shots", rc.shots, "shots per tuning circuit");
    s->add_option("--threads", rc.threads, "worker threads for tuning (0: all cores)");
  }
  tune->add_option("--mode", rc.mode, "ts-si or ts-si-c");
  tune->add_option("--out", rc.out, "write the stitched schedule as timed QASM");
  for (auto* s : {tune, run}) {
    s->add_option("--dd", rc.dd, "off, on or heuristic");
  }
  for (auto* s : {tune, run, compare}) {
    s->add_option("--dd-factor", rc.dd_factor, "interval / sequence ratio for heuristic DD");
    s->add_option("--seed", rc.seed, "master seed");
  }
  for (auto* s : {run, compare}) {
    s->add_option("--eval-shots", rc.eval_shots, "shots for the final evaluation");
    s->add_option("--json", rc.json, "also write a JSON document");
  }
  compare->add_option("--out", rc.out, "write the table to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*bench) return detail::cmd_bench(rc, out);
    if (*sched || *windows) return detail::cmd_schedule(rc, out);
    if (*slice) return detail::cmd_slice(rc, out);
    if (*tune) return detail::cmd_tune(rc, out);
    if (*run) return detail::cmd_run(rc, out);
    if (*compare) return detail::cmd_compare(rc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace timestitch::cli

#endif  // TIMESTITCH_CLI_HPP
