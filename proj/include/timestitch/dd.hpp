#ifndef TIMESTITCH_DD_HPP
#define TIMESTITCH_DD_HPP

#include <algorithm>
#include <vector>

#include "timestitch/device.hpp"
#include "timestitch/ir.hpp"
#include "timestitch/sched.hpp"

namespace timestitch {

/// Dynamical-decoupling settings. The default is one XYXY round; with the
/// heuristic on, an interval must also be `heuristic_factor` times longer
/// than the sequence.
struct DDConfig {
  std::vector<GateType> sequence{GateType::X, GateType::Y, GateType::X, GateType::Y};
  bool heuristic_enabled = false;
  double heuristic_factor = 4.0;

  static DDConfig xyxy(bool heuristic = false) {
    DDConfig c;
    c.heuristic_enabled = heuristic;
    return c;
  }

  static DDConfig xx(bool heuristic = false) {
    DDConfig c;
    c.sequence = {GateType::X, GateType::X};
    c.heuristic_enabled = heuristic;
    return c;
  }

  void check() const {
    if (sequence.empty()) throw Error("empty DD sequence");
    for (auto g : sequence) {
      if (!is_single_qubit_gate(g)) throw Error("DD sequence must contain single-qubit gates");
    }
    if (!(heuristic_factor > 0.0)) throw Error("DD heuristic factor must be positive");
  }
};

/// Sum of the sequence's gate durations on qubit `q`.
inline Duration dd_sequence_duration(const DDConfig& cfg, const DeviceModel& d, Qubit q = 0) {
  Duration s = 0;
  for (auto g : cfg.sequence) s += d.duration_of(Instruction{g, {q}});
  return s;
}

inline bool dd_fits(Duration interval, const DDConfig& cfg, const DeviceModel& d, Qubit q = 0) {
  const Duration s = dd_sequence_duration(cfg, d, q);
  if (interval < s) return false;
  if (cfg.heuristic_enabled) {
    return static_cast<double>(interval) >= cfg.heuristic_factor * static_cast<double>(s);
  }
  return true;
}

/// One round spread with equal gaps before, between and after the gates.
/// Leftover dt go one each to the leading gaps.
inline std::vector<TimedInstruction> schedule_dd_in_interval(Duration start, Duration duration,
                                                             Qubit q, const DDConfig& cfg,
                                                             const DeviceModel& d) {
  cfg.check();
  const Duration s = dd_sequence_duration(cfg, d, q);
  if (duration < s) throw Error("DD sequence does not fit the interval");
  const auto gaps = static_cast<Duration>(cfg.sequence.size() + 1);
  const Duration g = (duration - s) / gaps;
  Duration extra = (duration - s) % gaps;
  std::vector<TimedInstruction> out;
  Duration t = start;
  for (auto kind : cfg.sequence) {
    t += g;
    if (extra > 0) {
      ++t;
      --extra;
    }
    Instruction ins{kind, {q}};
    const Duration len = d.duration_of(ins);
    out.push_back({ins, t, len});
    t += len;
  }
  return out;
}

struct IdleInterval {
  Qubit qubit = 0;
  Duration start = 0;
  Duration duration = 0;
};

/// Gaps between consecutive instructions on each qubit.
inline std::vector<IdleInterval> idle_intervals(const TimedCircuit& tc) {
  std::vector<IdleInterval> out;
  const auto lanes = tc.per_qubit();
  for (Qubit q = 0; q < lanes.size(); ++q) {
    for (std::size_t k = 1; k < lanes[q].size(); ++k) {
      const Duration a = tc[lanes[q][k - 1]].end();
      const Duration b = tc[lanes[q][k]].start;
      if (b > a) out.push_back({q, a, b - a});
    }
  }
  return out;
}

/// Inserts one DD round into every idle interval that qualifies. Existing
/// instructions keep their times; measurements stay at the end of the list.
inline TimedCircuit apply_dd(const TimedCircuit& tc, const DDConfig& cfg,
                             std::size_t* inserted = nullptr) {
  cfg.check();
  const auto& d = tc.device();
  auto timed = tc.timed();
  std::size_t added = 0;
  for (const auto& iv : idle_intervals(tc)) {
    if (!dd_fits(iv.duration, cfg, d, iv.qubit)) continue;
    for (auto& t : schedule_dd_in_interval(iv.start, iv.duration, iv.qubit, cfg, d)) {
      timed.push_back(std::move(t));
      ++added;
    }
  }
  std::stable_sort(timed.begin(), timed.end(), [](const auto& a, const auto& b) {
    const bool ma = a.instr.type == GateType::Measure, mb = b.instr.type == GateType::Measure;
    if (ma != mb) return mb;
    return a.start < b.start;
  });
  if (inserted) *inserted = added;
  return TimedCircuit(tc.device_ptr(), tc.num_qubits(), std::move(timed));
}

}  // namespace timestitch

#endif  // TIMESTITCH_DD_HPP
