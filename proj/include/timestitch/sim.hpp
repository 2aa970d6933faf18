#ifndef TIMESTITCH_SIM_HPP
#define TIMESTITCH_SIM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "timestitch/device.hpp"
#include "timestitch/ir.hpp"
#include "timestitch/sched.hpp"

namespace timestitch {

using Complex = std::complex<double>;

/// Row-major 2x2 matrix.
using Mat2 = std::array<Complex, 4>;

inline constexpr std::size_t kMaxDensityQubits = 10;
inline constexpr std::size_t kMaxStatevectorQubits = 24;

class SimulationError : public Error {
 public:
  using Error::Error;
};

inline Mat2 gate_matrix(const Instruction& ins) {
  using namespace std::complex_literals;
  const double r = 1.0 / std::numbers::sqrt2;
  switch (ins.type) {
    case GateType::X: return {0, 1, 1, 0};
    case GateType::Y: return {0, -1i, 1i, 0};
    case GateType::Z: return {1, 0, 0, -1};
    case GateType::H: return {r, r, r, -r};
    case GateType::S: return {1, 0, 0, 1i};
    case GateType::Sdg: return {1, 0, 0, -1i};
    case GateType::SX: return {0.5 + 0.5i, 0.5 - 0.5i, 0.5 - 0.5i, 0.5 + 0.5i};
    case GateType::SXdg: return {0.5 - 0.5i, 0.5 + 0.5i, 0.5 + 0.5i, 0.5 - 0.5i};
    case GateType::RZ:
      return {std::exp(-0.5i * ins.theta), 0, 0, std::exp(0.5i * ins.theta)};
    default:
      throw Error("no single-qubit matrix for " + std::string(gate_name(ins.type)));
  }
}

// ---------------------------------------------------------------------------
// Statevector (noiseless oracle)
// ---------------------------------------------------------------------------

class Statevector {
 public:
  explicit Statevector(std::size_t num_qubits) : n_(num_qubits) {
    if (n_ > kMaxStatevectorQubits) {
      throw SimulationError("statevector limited to " + std::to_string(kMaxStatevectorQubits) +
                            " qubits");
    }
    amp_.assign(std::size_t{1} << n_, Complex{0.0, 0.0});
    amp_[0] = 1.0;
  }

  std::size_t num_qubits() const { return n_; }
  const std::vector<Complex>& amplitudes() const { return amp_; }

  void apply(const Mat2& u, Qubit q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if (i & bit) continue;
      const Complex a = amp_[i], b = amp_[i | bit];
      amp_[i] = u[0] * a + u[1] * b;
      amp_[i | bit] = u[2] * a + u[3] * b;
    }
  }

  void apply_cx(Qubit control, Qubit target) {
    const std::size_t cb = std::size_t{1} << control, tb = std::size_t{1} << target;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if ((i & cb) && !(i & tb)) std::swap(amp_[i], amp_[i | tb]);
    }
  }

  /// Applies the unitary part of `ins`; measurements, barriers and delays are no-ops.
  void apply(const Instruction& ins) {
    if (ins.type == GateType::CX) {
      apply_cx(ins.qubits[0], ins.qubits[1]);
    } else if (is_single_qubit_gate(ins.type)) {
      apply(gate_matrix(ins), ins.qubits[0]);
    }
  }

 private:
  std::size_t n_;
  std::vector<Complex> amp_;
};

/// Exact amplitudes of `c` applied to |0...0>. Measurements are ignored.
inline std::vector<Complex> run_statevector(const Circuit& c) {
  Statevector sv(c.num_qubits());
  for (const auto& ins : c.instructions()) sv.apply(ins);
  return sv.amplitudes();
}

// ---------------------------------------------------------------------------
// Density matrix
// ---------------------------------------------------------------------------

class DensityMatrix {
 public:
  explicit DensityMatrix(std::size_t num_qubits) : n_(num_qubits), dim_(std::size_t{1} << num_qubits) {
    if (n_ > kMaxDensityQubits) {
      throw SimulationError("density-matrix simulation limited to " +
                            std::to_string(kMaxDensityQubits) + " qubits, circuit has " +
                            std::to_string(n_));
    }
    rho_.assign(dim_ * dim_, Complex{0.0, 0.0});
    rho_[0] = 1.0;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return dim_; }
  Complex at(std::size_t r, std::size_t c) const { return rho_[r * dim_ + c]; }

  void apply_unitary(const Mat2& u, Qubit q) {
    const std::size_t bit = std::size_t{1} << q;
    // U rho
    for (std::size_t r = 0; r < dim_; ++r) {
      if (r & bit) continue;
      Complex* row0 = &rho_[r * dim_];
      Complex* row1 = &rho_[(r | bit) * dim_];
      for (std::size_t c = 0; c < dim_; ++c) {
        const Complex a = row0[c], b = row1[c];
        row0[c] = u[0] * a + u[1] * b;
        row1[c] = u[2] * a + u[3] * b;
      }
    }
    // (U rho) U^dagger
    const Complex c00 = std::conj(u[0]), c01 = std::conj(u[1]);
    const Complex c10 = std::conj(u[2]), c11 = std::conj(u[3]);
    for (std::size_t r = 0; r < dim_; ++r) {
      Complex* row = &rho_[r * dim_];
      for (std::size_t c = 0; c < dim_; ++c) {
        if (c & bit) continue;
        const Complex a = row[c], b = row[c | bit];
        row[c] = a * c00 + b * c01;
        row[c | bit] = a * c10 + b * c11;
      }
    }
  }

  void apply_cx(Qubit control, Qubit target) {
    const std::size_t cb = std::size_t{1} << control, tb = std::size_t{1} << target;
    for (std::size_t r = 0; r < dim_; ++r) {
      if ((r & cb) && !(r & tb)) {
        std::swap_ranges(&rho_[r * dim_], &rho_[r * dim_] + dim_, &rho_[(r | tb) * dim_]);
      }
    }
    for (std::size_t r = 0; r < dim_; ++r) {
      Complex* row = &rho_[r * dim_];
      for (std::size_t c = 0; c < dim_; ++c) {
        if ((c & cb) && !(c & tb)) std::swap(row[c], row[c | tb]);
      }
    }
  }

  /// Amplitude damping (gamma), then phase damping (lambda), then RZ(phase)
  /// on one qubit, fused into a single pass over the 2x2 blocks.
  void apply_idle(Qubit q, double gamma, double lambda, double phase) {
    const std::size_t bit = std::size_t{1} << q;
    const double keep = std::sqrt((1.0 - gamma) * (1.0 - lambda));
    const Complex rot = std::polar(keep, -phase);
    const Complex rot_conj = std::conj(rot);
    for (std::size_t r = 0; r < dim_; ++r) {
      if (r & bit) continue;
      Complex* row0 = &rho_[r * dim_];
      Complex* row1 = &rho_[(r | bit) * dim_];
      for (std::size_t c = 0; c < dim_; ++c) {
        if (c & bit) continue;
        const Complex p11 = row1[c | bit];
        row0[c] += gamma * p11;
        row1[c | bit] = (1.0 - gamma) * p11;
        row0[c | bit] *= rot;
        row1[c] *= rot_conj;
      }
    }
  }

  /// rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on one qubit.
  void apply_depolarizing(Qubit q, double p) {
    if (p == 0.0) return;
    const std::size_t bit = std::size_t{1} << q;
    const double shrink = 1.0 - 4.0 * p / 3.0;
    const double mix = 2.0 * p / 3.0;
    for (std::size_t r = 0; r < dim_; ++r) {
      if (r & bit) continue;
      Complex* row0 = &rho_[r * dim_];
      Complex* row1 = &rho_[(r | bit) * dim_];
      for (std::size_t c = 0; c < dim_; ++c) {
        if (c & bit) continue;
        const Complex tr = row0[c] + row1[c | bit];
        row0[c] = shrink * row0[c] + mix * tr;
        row1[c | bit] = shrink * row1[c | bit] + mix * tr;
        row0[c | bit] *= shrink;
        row1[c] *= shrink;
      }
    }
  }

  /// Uniform two-qubit Pauli error with total probability p.
  void apply_depolarizing(Qubit a, Qubit b, double p) {
    if (p == 0.0) return;
    const std::size_t ba = std::size_t{1} << a, bb = std::size_t{1} << b;
    const std::size_t offs[4] = {0, ba, bb, ba | bb};
    const double shrink = 1.0 - 16.0 * p / 15.0;
    const double mix = 4.0 * p / 15.0;
    for (std::size_t r = 0; r < dim_; ++r) {
      if (r & (ba | bb)) continue;
      for (std::size_t c = 0; c < dim_; ++c) {
        if (c & (ba | bb)) continue;
        Complex tr = 0.0;
        for (std::size_t k = 0; k < 4; ++k) tr += rho_[(r | offs[k]) * dim_ + (c | offs[k])];
        for (std::size_t i = 0; i < 4; ++i) {
          for (std::size_t j = 0; j < 4; ++j) {
            Complex& e = rho_[(r | offs[i]) * dim_ + (c | offs[j])];
            e *= shrink;
            if (i == j) e += mix * tr;
          }
        }
      }
    }
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += rho_[i * dim_ + i].real();
    return t;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = rho_[i * dim_ + i].real();
    return d;
  }

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<Complex> rho_;
};

// ---------------------------------------------------------------------------
// Noise channels
// ---------------------------------------------------------------------------

struct ChannelParams {
  double gamma = 0.0;   // amplitude-damping probability
  double lambda = 0.0;  // pure-dephasing probability
  double phase = 0.0;   // coherent Z angle from detuning, radians
};

/// Idle channel for `t` dt on a qubit. The combined off-diagonal decay of
/// damping and dephasing is exp(-t/T2).
inline ChannelParams idle_channel(Duration t, const QubitParams& p, double dt_seconds) {
  if (t < 0) throw Error("negative idle time");
  ChannelParams ch;
  if (t == 0) return ch;
  const double secs = static_cast<double>(t) * dt_seconds;
  ch.gamma = -std::expm1(-secs / p.t1);
  const double inv_tphi = std::max(0.0, 1.0 / p.t2 - 0.5 / p.t1);
  ch.lambda = -std::expm1(-2.0 * secs * inv_tphi);
  ch.phase = 2.0 * std::numbers::pi * p.detuning_hz * secs;
  return ch;
}

// ---------------------------------------------------------------------------
// Distributions and metrics
// ---------------------------------------------------------------------------

/// Measured bitstring -> count. Bitstrings list measured qubits in
/// descending index order, so the lowest measured qubit is rightmost.
struct OutcomeDistribution {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t shots = 0;

  std::uint64_t count(const std::string& bits) const {
    auto it = counts.find(bits);
    return it == counts.end() ? 0 : it->second;
  }

  friend bool operator==(const OutcomeDistribution&, const OutcomeDistribution&) = default;
};

using Probabilities = std::map<std::string, double>;

inline std::string bitstring(std::size_t index, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t k = 0; k < width; ++k) {
    if ((index >> k) & 1U) s[width - 1 - k] = '1';
  }
  return s;
}

inline Probabilities to_probabilities(const OutcomeDistribution& d) {
  if (d.shots == 0) throw Error("empty distribution");
  Probabilities p;
  for (const auto& [k, v] : d.counts) {
    p[k] = static_cast<double>(v) / static_cast<double>(d.shots);
  }
  return p;
}

/// Probability of success: the fraction of shots landing on an accepted bitstring.
inline double pos(const OutcomeDistribution& d, const std::set<std::string>& accepted) {
  if (d.shots == 0) throw Error("probability of success of an empty distribution");
  std::uint64_t good = 0;
  for (const auto& a : accepted) good += d.count(a);
  return static_cast<double>(good) / static_cast<double>(d.shots);
}

inline void require_normalized(const Probabilities& p) {
  double s = 0.0;
  for (const auto& [k, v] : p) {
    if (v < 0.0) throw Error("negative probability for '" + k + "'");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "distribution not normalized (sum " << s << ")";
    throw Error(os.str());
  }
}

/// (sum_i sqrt(p_i q_i))^2
inline double hellinger_fidelity(const Probabilities& p, const Probabilities& q) {
  require_normalized(p);
  require_normalized(q);
  double bc = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    if (it != q.end()) bc += std::sqrt(v * it->second);
  }
  return std::min(1.0, bc * bc);
}

inline double hellinger_fidelity(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  return hellinger_fidelity(to_probabilities(p), to_probabilities(q));
}

inline double total_variation(const Probabilities& p, const Probabilities& q) {
  double s = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    s += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.count(k)) s += std::abs(v);
  }
  return 0.5 * s;
}

namespace detail {

/// Qubits that are read out: those with a Measure, or all of them when the
/// circuit has none.
template <class Range>
std::vector<Qubit> measured_qubits(const Range& instructions, std::size_t num_qubits) {
  std::set<Qubit> m;
  for (const auto& ins : instructions) {
    if (ins.type == GateType::Measure) m.insert(ins.qubits[0]);
  }
  if (m.empty()) {
    for (std::size_t q = 0; q < num_qubits; ++q) m.insert(static_cast<Qubit>(q));
  }
  return {m.begin(), m.end()};
}

inline std::vector<double> marginal(const std::vector<double>& full, const std::vector<Qubit>& keep) {
  std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < keep.size(); ++k) j |= ((i >> keep[k]) & 1U) << k;
    out[j] += full[i];
  }
  return out;
}

inline Probabilities to_map(const std::vector<double>& probs, std::size_t width, double floor = 0.0) {
  Probabilities p;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > floor) p[bitstring(i, width)] = probs[i];
  }
  return p;
}

inline std::uint64_t mix_seed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derives an independent stream seed from a master seed and two indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return detail::mix_seed(detail::mix_seed(detail::mix_seed(master) ^ a) ^ (b + 0x51ed27ULL));
}

/// Noiseless output distribution of a circuit over its measured qubits.
inline Probabilities ideal_distribution(const Circuit& c) {
  const auto amps = run_statevector(c);
  std::vector<double> full(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) full[i] = std::norm(amps[i]);
  const auto keep = detail::measured_qubits(c.instructions(), c.num_qubits());
  return detail::to_map(detail::marginal(full, keep), keep.size());
}

inline Probabilities ideal_distribution(const TimedCircuit& tc) {
  return ideal_distribution(to_circuit(tc));
}

/// Draws `shots` samples from an outcome vector indexed like `bitstring`.
inline OutcomeDistribution sample(const std::vector<double>& probs, std::size_t width,
                                  std::uint64_t shots, std::uint64_t seed) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += std::max(0.0, probs[i]);
    cdf[i] = acc;
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> hits(probs.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= probs.size()) idx = probs.size() - 1;
    while (probs[idx] <= 0.0 && idx > 0) --idx;
    ++hits[idx];
  }
  OutcomeDistribution d;
  d.shots = shots;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) d.counts[bitstring(i, width)] = hits[i];
  }
  return d;
}

/// Exact noisy outcome probabilities of a schedule on `noise`.
///
/// Instructions are processed in list order. Before each instruction every
/// participating qubit idles for the gap since its previous instruction;
/// gates apply their ideal unitary followed by depolarizing noise. A qubit
/// stops evolving at its measurement, and readout confusion is applied to
/// the final marginal.
inline std::vector<double> noisy_probabilities(const TimedCircuit& tc, const DeviceModel& noise,
                                               std::vector<Qubit>* measured_out = nullptr) {
  const std::size_t n = tc.num_qubits();
  if (noise.num_qubits < n) throw SimulationError("noise model has fewer qubits than the schedule");
  DensityMatrix rho(n);
  std::vector<std::optional<Duration>> clock(n);
  std::vector<bool> frozen(n, false);

  auto idle_to = [&](Qubit q, Duration t) {
    if (clock[q] && t > *clock[q]) {
      const auto ch = idle_channel(t - *clock[q], noise.qubits[q], noise.dt);
      rho.apply_idle(q, ch.gamma, ch.lambda, ch.phase);
    }
  };
  auto check_trace = [&](std::size_t i) {
    const double tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "trace deviates from 1 by " << (tr - 1.0) << " after instruction " << i << " ("
         << to_string(tc[i].instr) << " at t=" << tc[i].start << ")";
      throw SimulationError(os.str());
    }
  };

  std::vector<Instruction> listing;
  listing.reserve(tc.size());
  for (std::size_t i = 0; i < tc.size(); ++i) {
    const auto& t = tc[i];
    listing.push_back(t.instr);
    const auto& ins = t.instr;
    if (ins.type == GateType::Barrier || ins.type == GateType::Delay) continue;
    if (ins.type == GateType::Measure) {
      const Qubit q = ins.qubits[0];
      if (!frozen[q]) idle_to(q, t.start);
      frozen[q] = true;
      check_trace(i);
      continue;
    }
    for (Qubit q : ins.qubits) {
      if (frozen[q]) throw SimulationError("gate after measurement on qubit " + std::to_string(q));
      idle_to(q, t.start);
    }
    if (ins.type == GateType::CX) {
      rho.apply_cx(ins.qubits[0], ins.qubits[1]);
      rho.apply_depolarizing(ins.qubits[0], ins.qubits[1], noise.depol_2q);
    } else {
      rho.apply_unitary(gate_matrix(ins), ins.qubits[0]);
      rho.apply_depolarizing(ins.qubits[0], noise.depol_1q);
    }
    for (Qubit q : ins.qubits) clock[q] = t.end();
    check_trace(i);
  }

  const auto keep = detail::measured_qubits(listing, n);
  auto probs = detail::marginal(rho.diagonal(), keep);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto& p = noise.qubits[keep[k]];
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (i & bit) continue;
      const double p0 = probs[i], p1 = probs[i | bit];
      probs[i] = p0 * (1.0 - p.readout_p01) + p1 * p.readout_p10;
      probs[i | bit] = p0 * p.readout_p01 + p1 * (1.0 - p.readout_p10);
    }
  }
  if (measured_out) *measured_out = keep;
  return probs;
}

/// Samples `shots` outcomes of a schedule under the noise model `d`.
inline OutcomeDistribution run_counts(const TimedCircuit& tc, const DeviceModel& d,
                                      std::uint64_t shots, std::uint64_t seed) {
  std::vector<Qubit> keep;
  const auto probs = noisy_probabilities(tc, d, &keep);
  return sample(probs, keep.size(), shots, seed);
}

/// Exact noisy distribution as a bitstring map.
inline Probabilities noisy_distribution(const TimedCircuit& tc, const DeviceModel& d) {
  std::vector<Qubit> keep;
  const auto probs = noisy_probabilities(tc, d, &keep);
  return detail::to_map(probs, keep.size());
}

/// Anything that executes a schedule and returns sampled outcomes.
template <class B>
concept Backend = requires(const B& b, const TimedCircuit& tc, std::uint64_t shots,
                           std::uint64_t seed) {
  { b.run(tc, shots, seed) } -> std::convertible_to<OutcomeDistribution>;
};

/// The shipped backend. Uses the schedule's own device for noise unless a
/// separate noise model is supplied.
class DensityMatrixBackend {
 public:
  DensityMatrixBackend() = default;
  explicit DensityMatrixBackend(DeviceModel noise) : noise_(std::move(noise)) {}

  OutcomeDistribution run(const TimedCircuit& tc, std::uint64_t shots, std::uint64_t seed) const {
    return run_counts(tc, noise_ ? *noise_ : tc.device(), shots, seed);
  }

 private:
  std::optional<DeviceModel> noise_;
};

static_assert(Backend<DensityMatrixBackend>);

}  // namespace timestitch

#endif  // TIMESTITCH_SIM_HPP
