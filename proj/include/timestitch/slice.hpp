#ifndef TIMESTITCH_SLICE_HPP
#define TIMESTITCH_SLICE_HPP

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "timestitch/ir.hpp"
#include "timestitch/sched.hpp"

namespace timestitch {

/// Slice + inverse circuit for one window at one block offset. Running it
/// ideally returns `ground_truth` with certainty.
struct SICircuit {
  std::size_t window_id = 0;
  Duration offset = 0;
  Duration max_offset = 0;
  TimedCircuit forward;   // the slice, with the block at `offset`
  TimedCircuit inverse;   // time-mirrored inverse followed by measurements
  std::vector<Qubit> qubits;
  std::string ground_truth;

  /// forward followed by inverse, as one executable schedule.
  TimedCircuit combined() const {
    auto timed = forward.timed();
    timed.insert(timed.end(), inverse.timed().begin(), inverse.timed().end());
    return TimedCircuit(forward.device_ptr(), forward.num_qubits(), std::move(timed));
  }

  /// Gate list of forward ++ inverse without the measurements.
  Circuit unitary_part() const {
    Circuit c(forward.num_qubits());
    for (const auto& t : forward.timed()) c.append(t.instr);
    for (const auto& t : inverse.timed()) {
      if (t.instr.type != GateType::Measure) c.append(t.instr);
    }
    return c;
  }
};

/// Indices of every non-measurement instruction that ends no later than the
/// window's right edge. The set is closed under dependencies.
inline std::vector<std::size_t> slice_indices(const TimedCircuit& tc, const SlackWindow& w) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tc.size(); ++i) {
    const auto& t = tc[i];
    if (t.instr.type == GateType::Measure) continue;
    if (t.end() <= w.end()) out.push_back(i);
  }
  return out;
}

/// The dependency cone of everything finished by the end of `w`.
inline Circuit build_slice(const TimedCircuit& tc, const SlackWindow& w) {
  Circuit c(tc.num_qubits());
  for (std::size_t i : slice_indices(tc, w)) c.append(tc[i].instr);
  return c;
}

/// Builds the SI schedule with the window's block at `offset`.
///
/// The forward half keeps the baseline times of the slice. The inverse half
/// is its reflection about the window's right edge, so the inverted block sits
/// at the mirrored offset. Each slice qubit is measured as soon as its
/// uncomputation ends.
inline SICircuit build_si_circuit(const TimedCircuit& baseline, const SlackWindow& w,
                                  Duration offset) {
  if (offset < 0 || offset > w.max_offset()) {
    throw Error("offset " + std::to_string(offset) + " outside [0, " +
                std::to_string(w.max_offset()) + "] for window " + std::to_string(w.id));
  }
  const auto idx = slice_indices(baseline, w);
  const std::set<std::size_t> block(w.block.begin(), w.block.end());
  const Duration delta =
      w.block.empty() ? 0 : (w.start + offset) - baseline[w.block.front()].start;

  std::vector<TimedInstruction> fwd;
  fwd.reserve(idx.size());
  for (std::size_t i : idx) {
    auto t = baseline[i];
    if (block.count(i)) t.start += delta;
    fwd.push_back(std::move(t));
  }

  const Duration mirror = 2 * w.end();
  const std::size_t n = baseline.num_qubits();
  std::vector<Duration> first_start(n, -1);
  for (const auto& t : fwd) {
    for (Qubit q : t.instr.qubits) {
      if (first_start[q] < 0) first_start[q] = t.start;
    }
  }

  std::vector<TimedInstruction> inv;
  inv.reserve(fwd.size() + n);
  for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) {
    inv.push_back({inverse(it->instr), mirror - it->end(), it->duration});
  }

  SICircuit si;
  si.window_id = w.id;
  si.offset = offset;
  si.max_offset = w.max_offset();
  const auto& dev = baseline.device();
  for (Qubit q = 0; q < n; ++q) {
    if (first_start[q] < 0) continue;
    si.qubits.push_back(q);
    const auto m = Instruction::measure(q);
    inv.push_back({m, mirror - first_start[q], dev.duration_of(m)});
  }
  si.ground_truth.assign(si.qubits.size(), '0');
  si.forward = TimedCircuit(baseline.device_ptr(), n, std::move(fwd));
  si.inverse = TimedCircuit(baseline.device_ptr(), n, std::move(inv));
  return si;
}

/// True when the SI circuit is no deeper in CX than the original circuit.
inline bool passes_depth_criteria(const SICircuit& si, const Circuit& original) {
  return cx_depth(si.unitary_part()) <= cx_depth(original);
}

}  // namespace timestitch

#endif  // TIMESTITCH_SLICE_HPP
