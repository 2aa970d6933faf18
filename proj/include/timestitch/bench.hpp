#ifndef TIMESTITCH_BENCH_HPP
#define TIMESTITCH_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "timestitch/device.hpp"
#include "timestitch/ir.hpp"
#include "timestitch/qasm.hpp"
#include "timestitch/sim.hpp"

namespace timestitch {

enum class BenchKind { GHZ_ECHO, QFT, QAOA_RING, ADDER, REP_ENCODER, HAHN_MICRO };

inline std::string_view bench_name(BenchKind k) {
  switch (k) {
    case BenchKind::GHZ_ECHO: return "ghz";
    case BenchKind::QFT: return "qft";
    case BenchKind::QAOA_RING: return "qaoa";
    case BenchKind::ADDER: return "adder";
    case BenchKind::REP_ENCODER: return "rep";
    case BenchKind::HAHN_MICRO: return "hahn";
  }
  return "?";
}

inline BenchKind parse_bench_kind(std::string_view s) {
  for (auto k : {BenchKind::GHZ_ECHO, BenchKind::QFT, BenchKind::QAOA_RING, BenchKind::ADDER,
                 BenchKind::REP_ENCODER, BenchKind::HAHN_MICRO}) {
    if (bench_name(k) == s) return k;
  }
  throw Error("unknown benchmark '" + std::string(s) + "' (ghz, qft, qaoa, adder, rep, hahn)");
}

inline std::size_t default_size(BenchKind k) {
  switch (k) {
    case BenchKind::GHZ_ECHO: return 5;
    case BenchKind::QFT: return 4;
    case BenchKind::QAOA_RING: return 4;
    case BenchKind::ADDER: return 6;
    case BenchKind::REP_ENCODER: return 5;
    case BenchKind::HAHN_MICRO: return 1;
  }
  return 0;
}

struct BenchParams {
  std::string qft_target;  // empty: alternating 1010...
  unsigned adder_a = 1;    // 2-bit addends
  unsigned adder_b = 2;
  double qaoa_gamma = std::numbers::pi / 8;
  std::size_t hahn_window = 799;
  std::size_t hahn_split = 399;  // identity slots before the X
  bool hahn_prep_one = false;
  bool hahn_xbasis = true;
};

struct Benchmark {
  BenchKind kind = BenchKind::GHZ_ECHO;
  std::string name;
  Circuit circuit;
  std::set<std::string> accepted;
  std::string provenance = "derived";
};

/// Appends gates to a line-coupled register, inserting SWAP chains for
/// CX between distant qubits and undoing them afterwards.
class LineBuilder {
 public:
  explicit LineBuilder(std::size_t n) : c_(n) {}

  LineBuilder& gate(Instruction i) {
    c_.append(std::move(i));
    return *this;
  }

  LineBuilder& cx(Qubit control, Qubit target) {
    if (control == target) throw Error("cx on a single qubit");
    std::vector<std::pair<Qubit, Qubit>> swaps;
    Qubit pos = control;
    while (distance(pos, target) > 1) {
      const Qubit next = pos < target ? pos + 1 : pos - 1;
      swap(pos, next);
      swaps.emplace_back(pos, next);
      pos = next;
    }
    c_.append(Instruction::cx(pos, target));
    for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) swap(it->first, it->second);
    return *this;
  }

  /// Controlled phase diag(1,1,1,e^{i lambda}) up to global phase.
  LineBuilder& cphase(double lambda, Qubit a, Qubit b) {
    gate(Instruction::rz(lambda / 2, a));
    cx(a, b);
    gate(Instruction::rz(-lambda / 2, b));
    cx(a, b);
    gate(Instruction::rz(lambda / 2, b));
    return *this;
  }

  /// SWAP followed by a controlled phase on adjacent qubits, using 3 CX.
  LineBuilder& cphase_swap(double lambda, Qubit a, Qubit b) {
    cx(a, b);
    cx(b, a);
    gate(Instruction::rz(lambda / 2, a));
    gate(Instruction::rz(-lambda / 2, b));
    cx(a, b);
    gate(Instruction::rz(lambda / 2, b));
    return *this;
  }

  /// exp(-i theta/2 Z_a Z_b)
  LineBuilder& rzz(double theta, Qubit a, Qubit b) {
    cx(a, b);
    gate(Instruction::rz(theta, b));
    cx(a, b);
    return *this;
  }

  /// Toffoli with controls a, b and target t, in the 6-CX Clifford+T form.
  LineBuilder& ccx(Qubit a, Qubit b, Qubit t) {
    const double q = std::numbers::pi / 4;
    gate(Instruction::h(t));
    cx(b, t);
    gate(Instruction::rz(-q, t));
    cx(a, t);
    gate(Instruction::rz(q, t));
    cx(b, t);
    gate(Instruction::rz(-q, t));
    cx(a, t);
    gate(Instruction::rz(q, b));
    gate(Instruction::rz(q, t));
    gate(Instruction::h(t));
    cx(a, b);
    gate(Instruction::rz(q, a));
    gate(Instruction::rz(-q, b));
    cx(a, b);
    return *this;
  }

  LineBuilder& measure_all() {
    for (Qubit q = 0; q < c_.num_qubits(); ++q) c_.append(Instruction::measure(q));
    return *this;
  }

  const Circuit& circuit() const { return c_; }

 private:
  static Qubit distance(Qubit a, Qubit b) { return a > b ? a - b : b - a; }

  void swap(Qubit a, Qubit b) {
    c_.append(Instruction::cx(a, b));
    c_.append(Instruction::cx(b, a));
    c_.append(Instruction::cx(a, b));
  }

  Circuit c_;
};

/// Outcomes that the ideal circuit produces with probability above `floor`.
inline std::set<std::string> accepted_outputs(const Circuit& c, double floor = 1e-6) {
  std::set<std::string> out;
  for (const auto& [bits, p] : ideal_distribution(c)) {
    if (p > floor) out.insert(bits);
  }
  return out;
}

namespace detail {

inline void require_size(BenchKind k, std::size_t n, std::size_t lo, std::size_t hi,
                         bool even = false) {
  if (n < lo || n > hi || (even && n % 2 != 0)) {
    throw Error("unsupported size " + std::to_string(n) + " for " + std::string(bench_name(k)) +
                " (supported " + std::to_string(lo) + "-" + std::to_string(hi) +
                (even ? ", even" : "") + ")");
  }
}

inline Circuit ghz_echo(std::size_t n) {
  LineBuilder b(n);
  b.gate(Instruction::h(0));
  for (Qubit q = 0; q + 1 < n; ++q) b.cx(q, q + 1);
  for (Qubit q = 0; q < n; ++q) b.gate(Instruction::x(q));
  for (Qubit q = static_cast<Qubit>(n - 1); q-- > 0;) b.cx(q, q + 1);
  b.gate(Instruction::h(0));
  return b.measure_all().circuit();
}

/// QFT on a line as a swap network: each round applies H to the qubit at
/// position 0 and carries it to the far end with controlled-phase swaps.
/// Qubit order comes out reversed, which the state preparation absorbs.
inline void qft_core(LineBuilder& b, std::size_t n) {
  std::vector<std::size_t> logical(n);  // logical index held at each position
  for (std::size_t p = 0; p < n; ++p) logical[p] = n - 1 - p;
  for (std::size_t r = 0; r < n; ++r) {
    b.gate(Instruction::h(0));
    for (std::size_t p = 0; p + 1 < n - r; ++p) {
      const std::size_t j = logical[p], k = logical[p + 1];
      b.cphase_swap(std::numbers::pi / static_cast<double>(std::size_t{1} << (j - k)),
                    static_cast<Qubit>(p), static_cast<Qubit>(p + 1));
      std::swap(logical[p], logical[p + 1]);
    }
  }
}

/// Fourier-state preparation followed by the QFT, so the ideal output is the
/// basis state `target`.
inline Circuit qft(std::size_t n, std::string target) {
  if (target.empty()) {
    for (std::size_t i = 0; i < n; ++i) target += (i % 2 == 0) ? '1' : '0';
  }
  if (target.size() != n || target.find_first_not_of("01") != std::string::npos) {
    throw Error("qft target must be a " + std::to_string(n) + "-bit string");
  }
  std::size_t index = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (target[n - 1 - k] == '1') index |= std::size_t{1} << k;
  }

  // Undo the QFT on |target> to find the product state that maps onto it.
  LineBuilder core(n);
  qft_core(core, n);
  Statevector s(n);
  for (std::size_t k = 0; k < n; ++k) {
    if ((index >> k) & 1U) s.apply(Instruction::x(static_cast<Qubit>(k)));
  }
  const Circuit undo = invert_circuit(core.circuit());
  for (const auto& ins : undo.instructions()) s.apply(ins);
  const auto& amp = s.amplitudes();

  LineBuilder b(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Qubit q = static_cast<Qubit>(k);
    const double phi = std::arg(amp[std::size_t{1} << k] / amp[0]);
    b.gate(Instruction::h(q));
    if (std::abs(phi) > 1e-12) b.gate(Instruction::rz(phi, q));
  }
  qft_core(b, n);
  return b.measure_all().circuit();
}

/// Antiferromagnetic ring state (|0101..> + |1010..>)/sqrt(2) followed by one
/// ring cost layer, which only adds a global phase to it.
inline Circuit qaoa_ring(std::size_t n, double gamma) {
  LineBuilder b(n);
  b.gate(Instruction::h(0));
  for (Qubit q = 0; q + 1 < n; ++q) b.cx(q, q + 1);
  for (Qubit q = 1; q < n; q += 2) b.gate(Instruction::x(q));
  for (Qubit q = 0; q < n; ++q) {
    const Qubit r = static_cast<Qubit>((q + 1) % n);
    b.rzz(2 * gamma, std::min(q, r), std::max(q, r));
  }
  return b.measure_all().circuit();
}

/// Two-bit ripple-carry adder on (c0, b0, a0, b1, a1, z) = q0..q5. The sum
/// lands in b1 b0 with the carry in z.
inline Circuit adder(unsigned a, unsigned bval) {
  if (a > 3 || bval > 3) throw Error("adder inputs must be 2-bit values");
  constexpr Qubit c0 = 0, b0 = 1, a0 = 2, b1 = 3, a1 = 4, z = 5;
  LineBuilder b(6);
  if (a & 1U) b.gate(Instruction::x(a0));
  if (a & 2U) b.gate(Instruction::x(a1));
  if (bval & 1U) b.gate(Instruction::x(b0));
  if (bval & 2U) b.gate(Instruction::x(b1));
  auto maj = [&](Qubit c, Qubit bb, Qubit aa) {
    b.cx(aa, bb);
    b.cx(aa, c);
    b.ccx(c, bb, aa);
  };
  auto uma = [&](Qubit c, Qubit bb, Qubit aa) {
    b.ccx(c, bb, aa);
    b.cx(aa, c);
    b.cx(c, bb);
  };
  maj(c0, b0, a0);
  maj(a0, b1, a1);
  b.cx(a1, z);
  uma(a0, b1, a1);
  uma(c0, b0, a0);
  return b.measure_all().circuit();
}

/// Three-qubit repetition code: data on q0, q2, q4, ancillas q1, q3 carry the
/// parity checks. The data qubit is put in superposition first.
inline Circuit rep_encoder() {
  LineBuilder b(5);
  b.gate(Instruction::h(0));
  b.cx(0, 1).cx(1, 2).cx(0, 1);
  b.cx(2, 3).cx(3, 4).cx(2, 3);
  b.cx(0, 1).cx(2, 1);
  b.cx(2, 3).cx(4, 3);
  return b.measure_all().circuit();
}

}  // namespace detail

/// One member of the echo micro-benchmark: optional X, (H), idle `a` slots,
/// X, idle `window_len - a` slots, (H), measure. A slot lasts one
/// single-qubit gate. Without X-basis readout both H gates are omitted.
inline Circuit hahn_micro_split(std::size_t window_len, std::size_t a, bool prep_one, bool xbasis,
                                Duration slot) {
  if (window_len < 1) throw Error("hahn window must hold at least one slot");
  if (a > window_len) throw Error("hahn split beyond window");
  Circuit c(1);
  if (prep_one) c.append(Instruction::x(0));
  if (xbasis) c.append(Instruction::h(0));
  if (a > 0) c.append(Instruction::delay_for(static_cast<Duration>(a) * slot, 0));
  c.append(Instruction::x(0));
  if (a < window_len) {
    c.append(Instruction::delay_for(static_cast<Duration>(window_len - a) * slot, 0));
  }
  if (xbasis) c.append(Instruction::h(0));
  c.append(Instruction::measure(0));
  return c;
}

/// The whole sweep, indexed by the number of slots before the X.
inline std::vector<Circuit> hahn_micro(std::size_t window_len, bool prep_one, bool xbasis,
                                       const DeviceModel& d) {
  const Duration slot = d.duration_of(GateType::X);
  std::vector<Circuit> out;
  out.reserve(window_len + 1);
  for (std::size_t a = 0; a <= window_len; ++a) {
    out.push_back(hahn_micro_split(window_len, a, prep_one, xbasis, slot));
  }
  return out;
}

inline Benchmark make_benchmark(BenchKind kind, std::size_t n, const BenchParams& p = {},
                                const DeviceModel* d = nullptr) {
  Benchmark b;
  b.kind = kind;
  switch (kind) {
    case BenchKind::GHZ_ECHO:
      detail::require_size(kind, n, 2, 7);
      b.circuit = detail::ghz_echo(n);
      break;
    case BenchKind::QFT:
      detail::require_size(kind, n, 3, 5);
      b.circuit = detail::qft(n, p.qft_target);
      break;
    case BenchKind::QAOA_RING:
      detail::require_size(kind, n, 4, 6, true);
      b.circuit = detail::qaoa_ring(n, p.qaoa_gamma);
      break;
    case BenchKind::ADDER:
      detail::require_size(kind, n, 6, 6);
      b.circuit = detail::adder(p.adder_a, p.adder_b);
      break;
    case BenchKind::REP_ENCODER:
      detail::require_size(kind, n, 5, 5);
      b.circuit = detail::rep_encoder();
      break;
    case BenchKind::HAHN_MICRO: {
      detail::require_size(kind, n, 1, 1);
      const Duration slot = d ? d->duration_of(GateType::X) : 160;
      b.circuit = hahn_micro_split(p.hahn_window, p.hahn_split, p.hahn_prep_one, p.hahn_xbasis, slot);
      break;
    }
  }
  b.name = std::string(bench_name(kind)) + "-" + std::to_string(n);
  b.accepted = accepted_outputs(b.circuit);
  return b;
}

/// A circuit read from a file with user-supplied accepted outputs.
inline Benchmark benchmark_from_file(const std::string& path, std::set<std::string> accepted) {
  Benchmark b;
  b.circuit = qasm::parse_file(path);
  b.name = path;
  b.provenance = "file";
  if (accepted.empty()) accepted = accepted_outputs(b.circuit);
  b.accepted = std::move(accepted);
  return b;
}

}  // namespace timestitch

#endif  // TIMESTITCH_BENCH_HPP
