#ifndef TIMESTITCH_IR_HPP
#define TIMESTITCH_IR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace timestitch {

/// Time on the device grid, in units of the device's dt.
using Duration = std::int64_t;
using Qubit = std::uint32_t;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GateType {
  X,
  Y,
  Z,
  H,
  S,
  Sdg,
  SX,
  SXdg,
  RZ,
  CX,
  Measure,
  Delay,
  Barrier,
};

inline constexpr std::string_view gate_name(GateType t) {
  switch (t) {
    case GateType::X: return "x";
    case GateType::Y: return "y";
    case GateType::Z: return "z";
    case GateType::H: return "h";
    case GateType::S: return "s";
    case GateType::Sdg: return "sdg";
    case GateType::SX: return "sx";
    case GateType::SXdg: return "sxdg";
    case GateType::RZ: return "rz";
    case GateType::CX: return "cx";
    case GateType::Measure: return "measure";
    case GateType::Delay: return "delay";
    case GateType::Barrier: return "barrier";
  }
  return "?";
}

/// Single-qubit unitary gates: the only instructions that may move inside
/// a slack window.
inline constexpr bool is_single_qubit_gate(GateType t) {
  switch (t) {
    case GateType::X:
    case GateType::Y:
    case GateType::Z:
    case GateType::H:
    case GateType::S:
    case GateType::Sdg:
    case GateType::SX:
    case GateType::SXdg:
    case GateType::RZ:
      return true;
    default:
      return false;
  }
}

inline constexpr bool is_unitary(GateType t) {
  return is_single_qubit_gate(t) || t == GateType::CX;
}

struct Instruction {
  GateType type = GateType::X;
  std::vector<Qubit> qubits;
  double theta = 0.0;     // RZ only
  Duration delay = 0;     // Delay only

  Instruction() = default;
  Instruction(GateType t, std::vector<Qubit> qs) : type(t), qubits(std::move(qs)) {}

  static Instruction x(Qubit q) { return {GateType::X, {q}}; }
  static Instruction y(Qubit q) { return {GateType::Y, {q}}; }
  static Instruction z(Qubit q) { return {GateType::Z, {q}}; }
  static Instruction h(Qubit q) { return {GateType::H, {q}}; }
  static Instruction s(Qubit q) { return {GateType::S, {q}}; }
  static Instruction sdg(Qubit q) { return {GateType::Sdg, {q}}; }
  static Instruction sx(Qubit q) { return {GateType::SX, {q}}; }
  static Instruction sxdg(Qubit q) { return {GateType::SXdg, {q}}; }
  static Instruction cx(Qubit control, Qubit target) {
    return {GateType::CX, {control, target}};
  }
  static Instruction measure(Qubit q) { return {GateType::Measure, {q}}; }
  static Instruction barrier(std::vector<Qubit> qs) {
    return {GateType::Barrier, std::move(qs)};
  }
  static Instruction rz(double theta, Qubit q) {
    Instruction i{GateType::RZ, {q}};
    i.theta = theta;
    return i;
  }
  static Instruction delay_for(Duration d, Qubit q) {
    Instruction i{GateType::Delay, {q}};
    i.delay = d;
    return i;
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

inline std::string to_string(const Instruction& ins) {
  std::string s{gate_name(ins.type)};
  if (ins.type == GateType::RZ) s += "(" + std::to_string(ins.theta) + ")";
  if (ins.type == GateType::Delay) s += "[" + std::to_string(ins.delay) + "]";
  for (std::size_t i = 0; i < ins.qubits.size(); ++i) {
    s += (i == 0 ? " q" : ",q") + std::to_string(ins.qubits[i]);
  }
  return s;
}

/// Checks arity, distinct qubits and parameter ranges. Throws Error.
inline void check_instruction(const Instruction& ins) {
  const auto n = ins.qubits.size();
  if (ins.type == GateType::CX) {
    if (n != 2) throw Error("cx requires exactly 2 qubits");
  } else if (ins.type == GateType::Barrier) {
    if (n == 0) throw Error("barrier requires at least 1 qubit");
  } else if (n != 1) {
    throw Error(std::string(gate_name(ins.type)) + " requires exactly 1 qubit");
  }
  auto sorted = ins.qubits;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("repeated qubit in " + to_string(ins));
  }
  if (ins.type == GateType::RZ && !std::isfinite(ins.theta)) {
    throw Error("rz angle must be finite");
  }
  if (ins.type == GateType::Delay && ins.delay < 0) {
    throw Error("delay duration must be non-negative");
  }
}

/// An ordered gate list over `num_qubits` indexed qubits. Measurements may
/// only appear as a trailing suffix.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t num_qubits) : num_qubits_(num_qubits) {}
  Circuit(std::size_t num_qubits, std::initializer_list<Instruction> ins)
      : num_qubits_(num_qubits) {
    for (const auto& i : ins) append(i);
  }

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<Instruction>& instructions() const { return instructions_; }
  std::size_t size() const { return instructions_.size(); }
  bool empty() const { return instructions_.empty(); }
  const Instruction& operator[](std::size_t i) const { return instructions_[i]; }

  Circuit& append(Instruction ins) {
    check_instruction(ins);
    for (Qubit q : ins.qubits) {
      if (q >= num_qubits_) {
        throw Error("qubit index out of range in " + to_string(ins));
      }
    }
    if (ins.type != GateType::Measure && has_measure_) {
      throw Error("instruction after measurement: " + to_string(ins));
    }
    if (ins.type == GateType::Measure) has_measure_ = true;
    instructions_.push_back(std::move(ins));
    return *this;
  }

  bool has_measure() const { return has_measure_; }

  /// The instructions without the trailing measurement suffix.
  Circuit without_measurements() const {
    Circuit out(num_qubits_);
    for (const auto& i : instructions_) {
      if (i.type != GateType::Measure) out.append(i);
    }
    return out;
  }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.num_qubits_ == b.num_qubits_ && a.instructions_ == b.instructions_;
  }

 private:
  std::size_t num_qubits_ = 0;
  std::vector<Instruction> instructions_;
  bool has_measure_ = false;
};

/// Inverse of a single instruction. Barrier stays a barrier.
inline Instruction inverse(const Instruction& ins) {
  Instruction out = ins;
  switch (ins.type) {
    case GateType::S: out.type = GateType::Sdg; break;
    case GateType::Sdg: out.type = GateType::S; break;
    case GateType::SX: out.type = GateType::SXdg; break;
    case GateType::SXdg: out.type = GateType::SX; break;
    case GateType::RZ: out.theta = -ins.theta; break;
    case GateType::Measure: throw Error("measurement is not reversible");
    default: break;
  }
  return out;
}

/// Reverses the gate order and inverts every gate.
inline Circuit invert_circuit(const Circuit& c) {
  Circuit out(c.num_qubits());
  const auto& ins = c.instructions();
  for (auto it = ins.rbegin(); it != ins.rend(); ++it) out.append(inverse(*it));
  return out;
}

/// Longest path through the dependency DAG counting CX gates only.
inline std::size_t cx_depth(const Circuit& c) {
  std::vector<std::size_t> level(c.num_qubits(), 0);
  std::size_t best = 0;
  for (const auto& ins : c.instructions()) {
    std::size_t d = 0;
    for (Qubit q : ins.qubits) d = std::max(d, level[q]);
    if (ins.type == GateType::CX) ++d;
    for (Qubit q : ins.qubits) level[q] = d;
    best = std::max(best, d);
  }
  return best;
}

/// Concatenation over the wider of the two qubit counts.
inline Circuit concatenate(const Circuit& a, const Circuit& b) {
  Circuit out(std::max(a.num_qubits(), b.num_qubits()));
  for (const auto& i : a.instructions()) out.append(i);
  for (const auto& i : b.instructions()) out.append(i);
  return out;
}

}  // namespace timestitch

#endif  // TIMESTITCH_IR_HPP
