#ifndef TIMESTITCH_TUNER_HPP
#define TIMESTITCH_TUNER_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "timestitch/ir.hpp"
#include "timestitch/sched.hpp"
#include "timestitch/sim.hpp"
#include "timestitch/slice.hpp"

namespace timestitch {

inline constexpr std::size_t kDefaultBudget = 900;
inline constexpr std::uint64_t kDefaultShots = 1024;

/// A window is tunable when it holds a block that occupies time. Blocks made
/// only of zero-duration virtual gates have no position to tune.
inline bool is_tunable(const SlackWindow& w) { return w.has_block() && w.block_span > 0; }

struct WindowGrid {
  std::size_t window_id = 0;
  std::vector<Duration> offsets;
};

struct TuningPlan {
  std::size_t budget = kDefaultBudget;
  std::size_t per_window_slots = 0;
  std::uint64_t shots = kDefaultShots;
  std::vector<WindowGrid> grids;
};

/// `slots` evenly spaced offsets over [0, max_offset], endpoints included,
/// capped at the number of distinct dt positions.
inline std::vector<Duration> sweep_grid(Duration max_offset, std::size_t slots) {
  if (max_offset < 0) throw Error("negative sweep range");
  if (max_offset == 0) return {0};
  if (slots < 2) throw Error("a sweep needs at least 2 slots");
  const auto count = static_cast<Duration>(
      std::min<std::uint64_t>(slots, static_cast<std::uint64_t>(max_offset) + 1));
  std::vector<Duration> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (Duration k = 0; k < count; ++k) {
    // round(k * max / (count - 1)) in integer arithmetic
    const Duration num = 2 * k * max_offset + (count - 1);
    grid.push_back(num / (2 * (count - 1)));
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline TuningPlan plan_sweep(const std::vector<SlackWindow>& windows, std::size_t budget,
                             std::uint64_t shots = kDefaultShots) {
  if (windows.empty()) throw Error("no tunable windows to plan");
  TuningPlan plan;
  plan.budget = budget;
  plan.shots = shots;
  plan.per_window_slots = budget / windows.size();
  if (plan.per_window_slots < 2) {
    throw Error("budget " + std::to_string(budget) + " gives fewer than 2 slots to each of " +
                std::to_string(windows.size()) + " windows");
  }
  for (const auto& w : windows) {
    plan.grids.push_back({w.id, sweep_grid(w.max_offset(), plan.per_window_slots)});
  }
  return plan;
}

struct WindowResult {
  std::size_t window_id = 0;
  std::vector<Duration> grid;
  std::vector<double> scores;  // ground-truth frequency per grid offset
  Duration best_offset = 0;
  Duration baseline_offset = 0;

  double score_at(Duration offset) const {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] == offset) return scores[k];
    }
    throw Error("offset " + std::to_string(offset) + " not on the grid of window " +
                std::to_string(window_id));
  }
};

namespace detail {

/// Runs fn(0..count-1) on up to `threads` workers. The first exception by
/// task index is rethrown after all workers finish.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t pick_best(const std::vector<Duration>& grid, const std::vector<double>& scores,
                             Duration preferred) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (scores[k] > scores[best]) {
      best = k;
    } else if (scores[k] == scores[best]) {
      if (grid[best] == preferred) continue;
      if (grid[k] == preferred || grid[k] > grid[best]) best = k;
    }
  }
  return best;
}

}  // namespace detail

using SIBuilder = std::function<SICircuit(Duration)>;

/// Scores every grid offset by the frequency of the ground truth. Ties go to
/// `baseline_offset`, then to the larger offset.
template <Backend B>
WindowResult tune_window(std::size_t window_id, const SIBuilder& build,
                         const std::vector<Duration>& grid, Duration baseline_offset,
                         const B& backend, std::uint64_t shots, std::uint64_t seed,
                         std::size_t threads = 1) {
  if (grid.empty()) throw Error("empty grid for window " + std::to_string(window_id));
  WindowResult r;
  r.window_id = window_id;
  r.grid = grid;
  r.baseline_offset = baseline_offset;
  r.scores.assign(grid.size(), 0.0);
  detail::parallel_for(grid.size(), threads, [&](std::size_t k) {
    try {
      const auto si = build(grid[k]);
      const auto dist = backend.run(si.combined(), shots, derive_seed(seed, window_id, k));
      r.scores[k] = pos(dist, {si.ground_truth});
    } catch (const std::exception& e) {
      throw Error("window " + std::to_string(window_id) + ": " + e.what());
    }
  });
  r.best_offset = grid[detail::pick_best(grid, r.scores, baseline_offset)];
  return r;
}

struct StitchedSchedule {
  TimedCircuit schedule;
  std::map<std::size_t, WindowResult> provenance;
};

/// Moves each tuned window's block to its best offset; every other
/// instruction keeps its baseline time.
inline StitchedSchedule stitch(const TimedCircuit& tc, const std::vector<WindowResult>& results) {
  const auto windows = find_slack_windows(tc);
  StitchedSchedule out{tc, {}};
  for (const auto& r : results) {
    if (r.window_id >= windows.size()) {
      throw Error("no window " + std::to_string(r.window_id) + " in schedule");
    }
    out.schedule = move_block(out.schedule, windows[r.window_id], r.best_offset);
    out.provenance[r.window_id] = r;
  }
  if (out.schedule.total_duration() != tc.total_duration()) {
    throw Error("stitching changed the schedule duration");
  }
  return out;
}

enum class TuneMode { TS_SI, TS_SI_C };

inline std::string_view mode_name(TuneMode m) {
  return m == TuneMode::TS_SI ? "ts-si" : "ts-si-c";
}

struct PipelineOptions {
  TuneMode mode = TuneMode::TS_SI_C;
  std::size_t budget = kDefaultBudget;
  std::uint64_t shots = kDefaultShots;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct WindowReport {
  SlackWindow window;
  bool tunable = false;
  std::size_t slice_cx_depth = 0;
  std::size_t si_cx_depth = 0;
  bool passes_criteria = false;
  std::optional<WindowResult> result;
};

struct PipelineResult {
  TuneMode mode = TuneMode::TS_SI_C;
  TimedCircuit baseline;
  StitchedSchedule stitched;
  std::size_t original_cx_depth = 0;
  std::size_t per_window_slots = 0;
  std::vector<WindowReport> windows;
};

/// ALAP schedule, window discovery, filtering, sweep, and stitching.
template <Backend B>
PipelineResult run_pipeline(const Circuit& c, std::shared_ptr<const DeviceModel> d,
                            const B& backend, const PipelineOptions& opt) {
  PipelineResult res;
  res.mode = opt.mode;
  res.baseline = schedule(c, std::move(d), Policy::ALAP);
  res.original_cx_depth = cx_depth(c);
  const auto windows = find_slack_windows(res.baseline);

  std::vector<SlackWindow> selected;
  for (const auto& w : windows) {
    WindowReport wr;
    wr.window = w;
    wr.tunable = is_tunable(w);
    wr.slice_cx_depth = cx_depth(build_slice(res.baseline, w));
    const auto si = build_si_circuit(res.baseline, w, 0);
    wr.si_cx_depth = cx_depth(si.unitary_part());
    wr.passes_criteria = passes_depth_criteria(si, c);
    if (wr.tunable && (opt.mode == TuneMode::TS_SI || wr.passes_criteria)) selected.push_back(w);
    res.windows.push_back(std::move(wr));
  }

  std::vector<WindowResult> results;
  if (!selected.empty()) {
    const auto plan = plan_sweep(selected, opt.budget, opt.shots);
    res.per_window_slots = plan.per_window_slots;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      const auto& w = selected[k];
      const TimedCircuit& base = res.baseline;
      SIBuilder build = [&base, &w](Duration off) { return build_si_circuit(base, w, off); };
      results.push_back(tune_window(w.id, build, plan.grids[k].offsets, w.block_offset, backend,
                                    opt.shots, opt.seed, opt.threads));
      res.windows[w.id].result = results.back();
    }
  }
  res.stitched = stitch(res.baseline, results);
  return res;
}

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Line-oriented tuning report: one `window` line per slack window, its score
/// curve, and the instructions whose start moved relative to ALAP.
inline std::string tuning_report(const PipelineResult& r) {
  std::ostringstream os;
  os << "tuning mode=" << mode_name(r.mode) << " windows=" << r.windows.size()
     << " original_cx_depth=" << r.original_cx_depth << " slots_per_window=" << r.per_window_slots
     << " baseline_duration=" << r.baseline.total_duration()
     << " stitched_duration=" << r.stitched.schedule.total_duration() << "\n";
  for (const auto& wr : r.windows) {
    const auto& w = wr.window;
    os << "window " << w.id << " qubit=" << w.qubit << " start=" << w.start
       << " duration=" << w.duration << " max_offset=" << w.max_offset()
       << " tunable=" << (wr.tunable ? "yes" : "no") << " slice_cx_depth=" << wr.slice_cx_depth
       << " si_cx_depth=" << wr.si_cx_depth
       << " criteria=" << (wr.passes_criteria ? "pass" : "fail");
    if (wr.result) {
      os << " best_offset=" << wr.result->best_offset
         << " baseline_offset=" << wr.result->baseline_offset << "\n";
      os << "  grid";
      for (auto g : wr.result->grid) os << " " << g;
      os << "\n  scores";
      for (auto s : wr.result->scores) os << " " << detail::fixed(s, 4);
      os << "\n";
    } else {
      os << " tuned=no\n";
    }
  }
  const auto& a = r.baseline;
  const auto& b = r.stitched.schedule;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].start != b[i].start) {
      os << "moved " << i << " " << qasm::format_instruction(a[i].instr) << " " << a[i].start
         << " -> " << b[i].start << "\n";
    }
  }
  return os.str();
}

}  // namespace timestitch

#endif  // TIMESTITCH_TUNER_HPP
