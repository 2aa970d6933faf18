#ifndef TIMESTITCH_SCHED_HPP
#define TIMESTITCH_SCHED_HPP

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "timestitch/device.hpp"
#include "timestitch/ir.hpp"
#include "timestitch/qasm.hpp"

namespace timestitch {

enum class Policy { ASAP, ALAP, Middle };

inline std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::ASAP: return "asap";
    case Policy::ALAP: return "alap";
    case Policy::Middle: return "middle";
  }
  return "?";
}

struct TimedInstruction {
  Instruction instr;
  Duration start = 0;
  Duration duration = 0;

  Duration end() const { return start + duration; }
  friend bool operator==(const TimedInstruction&, const TimedInstruction&) = default;
};

/// Instructions with start times on the device's dt grid.
///
/// The list is kept in a dependency-respecting order: on every qubit,
/// list order equals time order. Delays only shape timing during
/// scheduling and never appear here; idle time is implicit.
class TimedCircuit {
 public:
  TimedCircuit() = default;
  TimedCircuit(std::shared_ptr<const DeviceModel> device, std::size_t num_qubits,
               std::vector<TimedInstruction> timed)
      : device_(std::move(device)), num_qubits_(num_qubits), timed_(std::move(timed)) {
    for (const auto& t : timed_) total_ = std::max(total_, t.end());
    check();
  }

  const DeviceModel& device() const { return *device_; }
  const std::shared_ptr<const DeviceModel>& device_ptr() const { return device_; }
  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<TimedInstruction>& timed() const { return timed_; }
  std::size_t size() const { return timed_.size(); }
  const TimedInstruction& operator[](std::size_t i) const { return timed_[i]; }
  Duration total_duration() const { return total_; }

  /// Indices of the instructions acting on each qubit, in time order.
  std::vector<std::vector<std::size_t>> per_qubit() const {
    std::vector<std::vector<std::size_t>> out(num_qubits_);
    for (std::size_t i = 0; i < timed_.size(); ++i) {
      for (Qubit q : timed_[i].instr.qubits) out[q].push_back(i);
    }
    return out;
  }

  friend bool operator==(const TimedCircuit& a, const TimedCircuit& b) {
    return a.num_qubits_ == b.num_qubits_ && a.timed_ == b.timed_ && a.total_ == b.total_;
  }

 private:
  void check() const {
    std::vector<Duration> busy_until(num_qubits_, 0);
    for (const auto& t : timed_) {
      if (t.start < 0 || t.duration < 0) throw Error("negative time in schedule");
      if (t.instr.type == GateType::Delay) throw Error("delays are not kept in timed circuits");
      for (Qubit q : t.instr.qubits) {
        if (q >= num_qubits_) throw Error("qubit out of range in schedule");
        if (t.start < busy_until[q]) {
          throw Error("overlapping instructions on qubit " + std::to_string(q) + " at " +
                      std::to_string(t.start));
        }
        busy_until[q] = t.end();
      }
    }
  }

  std::shared_ptr<const DeviceModel> device_;
  std::size_t num_qubits_ = 0;
  std::vector<TimedInstruction> timed_;
  Duration total_ = 0;
};

inline Duration total_duration(const TimedCircuit& tc) { return tc.total_duration(); }

/// The instruction list of a timed circuit, in list order.
inline Circuit to_circuit(const TimedCircuit& tc) {
  Circuit c(tc.num_qubits());
  for (const auto& t : tc.timed()) c.append(t.instr);
  return c;
}

/// A maximal idle stretch on one qubit between two anchors, together with
/// the single-qubit gates inside it.
///
/// Anchors are the qubit's first instruction, two-qubit gates, barriers,
/// measurements and the end of the schedule. The block is moved as one rigid
/// unit; `block_offset` is the block start relative to `start`.
struct SlackWindow {
  std::size_t id = 0;
  Qubit qubit = 0;
  Duration start = 0;
  Duration duration = 0;
  std::vector<std::size_t> block;           // indices into the timed circuit
  Duration block_span = 0;                  // first block start to last block end
  Duration block_offset = 0;
  std::optional<std::size_t> left_anchor;   // always set: the runtime has begun
  std::optional<std::size_t> right_anchor;  // empty: end of schedule

  Duration end() const { return start + duration; }
  Duration max_offset() const { return duration - block_span; }
  bool has_block() const { return !block.empty(); }

  friend bool operator==(const SlackWindow&, const SlackWindow&) = default;
};

namespace detail {

inline bool is_anchor(const Instruction& ins) { return !is_single_qubit_gate(ins.type); }

}  // namespace detail

/// All slack windows, ordered by qubit then start. Time before a qubit's
/// first instruction is never slack.
inline std::vector<SlackWindow> find_slack_windows(const TimedCircuit& tc) {
  std::vector<SlackWindow> out;
  const auto lanes = tc.per_qubit();
  for (Qubit q = 0; q < lanes.size(); ++q) {
    const auto& lane = lanes[q];
    if (lane.empty()) continue;
    std::size_t k = 0;
    while (k < lane.size()) {
      const std::size_t left = lane[k];
      std::size_t j = k + 1;
      std::vector<std::size_t> block;
      Duration busy = 0;
      while (j < lane.size() && !detail::is_anchor(tc[lane[j]].instr)) {
        block.push_back(lane[j]);
        busy += tc[lane[j]].duration;
        ++j;
      }
      const Duration start = tc[left].end();
      const std::optional<std::size_t> right =
          j < lane.size() ? std::optional<std::size_t>(lane[j]) : std::nullopt;
      const Duration stop = right ? tc[*right].start : tc.total_duration();
      if (stop - start - busy > 0) {
        SlackWindow w;
        w.id = out.size();
        w.qubit = q;
        w.start = start;
        w.duration = stop - start;
        w.left_anchor = left;
        w.right_anchor = right;
        if (!block.empty()) {
          w.block_offset = tc[block.front()].start - start;
          w.block_span = tc[block.back()].end() - tc[block.front()].start;
        }
        w.block = std::move(block);
        out.push_back(std::move(w));
      }
      k = j;
    }
  }
  return out;
}

/// Moves the window's gate block rigidly so it starts at `offset` past the
/// window start. Anchors and every other instruction keep their times.
inline TimedCircuit move_block(const TimedCircuit& tc, const SlackWindow& w, Duration offset) {
  if (offset < 0 || offset > w.max_offset()) {
    throw Error("offset " + std::to_string(offset) + " outside [0, " +
                std::to_string(w.max_offset()) + "] for window " + std::to_string(w.id));
  }
  if (w.block.empty()) return tc;
  auto timed = tc.timed();
  const Duration delta = (w.start + offset) - timed[w.block.front()].start;
  for (std::size_t i : w.block) timed[i].start += delta;
  return TimedCircuit(tc.device_ptr(), tc.num_qubits(), std::move(timed));
}

namespace detail {

inline std::vector<Duration> durations_for(const Circuit& c, const DeviceModel& d) {
  std::vector<Duration> out;
  out.reserve(c.size());
  for (const auto& ins : c.instructions()) out.push_back(d.duration_of(ins));
  return out;
}

inline std::vector<Duration> asap_starts(const Circuit& c, const std::vector<Duration>& dur,
                                         Duration& makespan) {
  std::vector<Duration> ready(c.num_qubits(), 0);
  std::vector<Duration> start(c.size(), 0);
  makespan = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Duration s = 0;
    for (Qubit q : c[i].qubits) s = std::max(s, ready[q]);
    start[i] = s;
    for (Qubit q : c[i].qubits) ready[q] = s + dur[i];
    makespan = std::max(makespan, s + dur[i]);
  }
  return start;
}

inline std::vector<Duration> alap_starts(const Circuit& c, const std::vector<Duration>& dur,
                                         Duration makespan) {
  std::vector<Duration> latest(c.num_qubits(), makespan);
  std::vector<Duration> start(c.size(), 0);
  for (std::size_t i = c.size(); i-- > 0;) {
    Duration e = makespan;
    for (Qubit q : c[i].qubits) e = std::min(e, latest[q]);
    start[i] = e - dur[i];
    for (Qubit q : c[i].qubits) latest[q] = start[i];
  }
  return start;
}

}  // namespace detail

/// Assigns start times under the given policy. ALAP keeps the makespan at the
/// ASAP optimum; Middle recentres every ALAP gate block in its window.
inline TimedCircuit schedule(const Circuit& c, std::shared_ptr<const DeviceModel> d,
                             Policy policy) {
  require_valid(c, *d);
  const auto dur = detail::durations_for(c, *d);
  Duration makespan = 0;
  auto start = detail::asap_starts(c, dur, makespan);
  if (policy != Policy::ASAP) start = detail::alap_starts(c, dur, makespan);

  std::vector<TimedInstruction> timed;
  timed.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].type == GateType::Delay) continue;
    timed.push_back({c[i], start[i], dur[i]});
  }
  TimedCircuit tc(std::move(d), c.num_qubits(), std::move(timed));
  if (policy == Policy::Middle) {
    for (const auto& w : find_slack_windows(tc)) {
      if (!w.has_block()) continue;
      tc = move_block(tc, w, w.max_offset() / 2);
    }
  }
  return tc;
}

inline TimedCircuit schedule(const Circuit& c, const DeviceModel& d, Policy policy) {
  return schedule(c, std::make_shared<const DeviceModel>(d), policy);
}

/// Serializes a schedule as QASM with explicit `delay[n]` idles so that an
/// ASAP schedule of the result reproduces every start time.
inline std::string to_timed_qasm(const TimedCircuit& tc) {
  std::vector<Duration> clock(tc.num_qubits(), 0);
  std::vector<const TimedInstruction*> measures;
  bool has_measure = false;
  for (const auto& t : tc.timed()) has_measure |= t.instr.type == GateType::Measure;

  std::string out = "// timestitch schedule: total_duration=" +
                    std::to_string(tc.total_duration()) + " dt\n";
  out += qasm::header(tc.num_qubits(), has_measure);
  auto pad = [&](Qubit q, Duration until) {
    if (until > clock[q]) {
      out += qasm::format_instruction(Instruction::delay_for(until - clock[q], q)) + "\n";
      clock[q] = until;
    }
  };
  for (const auto& t : tc.timed()) {
    if (t.instr.type == GateType::Measure) {
      measures.push_back(&t);
      continue;
    }
    if (!measures.empty()) throw Error("schedule has instructions after a measurement");
    for (Qubit q : t.instr.qubits) pad(q, t.start);
    out += qasm::format_instruction(t.instr) + "\n";
    for (Qubit q : t.instr.qubits) clock[q] = t.end();
  }
  for (const auto* m : measures) {
    if (clock[m->instr.qubits[0]] > m->start) throw Error("qubit measured twice");
    pad(m->instr.qubits[0], m->start);
  }
  for (const auto* m : measures) out += qasm::format_instruction(m->instr) + "\n";
  return out;
}

/// Inverse of to_timed_qasm.
inline TimedCircuit from_timed_qasm(std::string_view text, std::shared_ptr<const DeviceModel> d) {
  return schedule(qasm::parse(text), std::move(d), Policy::ASAP);
}

/// Human-readable per-qubit timeline plus the window list.
inline std::string timeline_report(const TimedCircuit& tc,
                                   const std::vector<SlackWindow>& windows) {
  std::ostringstream os;
  os << "schedule qubits=" << tc.num_qubits() << " instructions=" << tc.size()
     << " total_duration=" << tc.total_duration() << "\n";
  for (std::size_t i = 0; i < tc.size(); ++i) {
    const auto& t = tc[i];
    os << "instr " << i << " start=" << t.start << " duration=" << t.duration << " "
       << qasm::format_instruction(t.instr) << "\n";
  }
  const auto lanes = tc.per_qubit();
  for (Qubit q = 0; q < lanes.size(); ++q) {
    os << "timeline q" << q << ":";
    Duration clock = -1;
    for (std::size_t i : lanes[q]) {
      const auto& t = tc[i];
      if (clock >= 0 && t.start > clock) os << " idle[" << clock << "," << t.start << ")";
      os << " " << gate_name(t.instr.type) << "[" << t.start << "," << t.end() << ")";
      clock = t.end();
    }
    if (clock >= 0 && clock < tc.total_duration()) {
      os << " idle[" << clock << "," << tc.total_duration() << ")";
    }
    os << "\n";
  }
  for (const auto& w : windows) {
    os << "window " << w.id << " qubit=" << w.qubit << " start=" << w.start
       << " duration=" << w.duration << " block=";
    if (w.block.empty()) os << "-";
    for (std::size_t k = 0; k < w.block.size(); ++k) {
      os << (k ? "," : "") << gate_name(tc[w.block[k]].instr.type);
    }
    os << " offset=" << w.block_offset << " max_offset=" << w.max_offset() << " right="
       << (w.right_anchor ? std::to_string(*w.right_anchor) : std::string("end")) << "\n";
  }
  return os.str();
}

}  // namespace timestitch

#endif  // TIMESTITCH_SCHED_HPP
