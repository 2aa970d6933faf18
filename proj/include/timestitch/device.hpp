#ifndef TIMESTITCH_DEVICE_HPP
#define TIMESTITCH_DEVICE_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "timestitch/ir.hpp"

namespace timestitch {

/// Per-qubit coherence and readout figures. Times in seconds, detuning in Hz.
/// readout_p01 is P(read 1 | prepared 0), readout_p10 is P(read 0 | prepared 1).
struct QubitParams {
  double t1 = std::numeric_limits<double>::infinity();
  double t2 = std::numeric_limits<double>::infinity();
  double detuning_hz = 0.0;
  double readout_p01 = 0.0;
  double readout_p10 = 0.0;

  friend bool operator==(const QubitParams&, const QubitParams&) = default;
};

/// Timing and noise description of a device.
///
/// Gate durations are keyed by class: "1q" is the default for every
/// single-qubit gate and may be overridden per gate name ("x", "rz", ...);
/// "cx" is the default two-qubit duration and "cx_<a>_<b>" (a < b)
/// overrides one coupling edge; "measure" is the readout duration.
struct DeviceModel {
  std::string name;
  double dt = 2.2222e-10;
  std::size_t num_qubits = 0;
  std::vector<QubitParams> qubits;
  std::map<std::string, Duration> gate_durations;
  double depol_1q = 0.0;
  double depol_2q = 0.0;
  std::set<std::pair<Qubit, Qubit>> coupling;

  bool coupled(Qubit a, Qubit b) const {
    if (a > b) std::swap(a, b);
    return coupling.count({a, b}) != 0;
  }

  void add_edge(Qubit a, Qubit b) {
    if (a > b) std::swap(a, b);
    coupling.insert({a, b});
  }

  /// Duration of `ins` in dt, or nothing when the device has no entry for it.
  std::optional<Duration> duration(const Instruction& ins) const {
    auto lookup = [&](const std::string& key) -> std::optional<Duration> {
      auto it = gate_durations.find(key);
      if (it == gate_durations.end()) return std::nullopt;
      return it->second;
    };
    switch (ins.type) {
      case GateType::Barrier: return 0;
      case GateType::Delay: return ins.delay;
      case GateType::Measure: return lookup("measure");
      case GateType::CX: {
        Qubit a = ins.qubits[0], b = ins.qubits[1];
        if (a > b) std::swap(a, b);
        if (auto d = lookup("cx_" + std::to_string(a) + "_" + std::to_string(b))) return d;
        return lookup("cx");
      }
      default:
        if (auto d = lookup(std::string(gate_name(ins.type)))) return d;
        return lookup("1q");
    }
  }

  Duration duration_of(const Instruction& ins) const {
    auto d = duration(ins);
    if (!d) throw Error("device has no duration for " + to_string(ins));
    return *d;
  }

  Duration duration_of(GateType t) const {
    Instruction probe{t, t == GateType::CX ? std::vector<Qubit>{0, 1} : std::vector<Qubit>{0}};
    return duration_of(probe);
  }

  /// Throws Error on a physically inconsistent model.
  void check() const {
    if (!(dt > 0.0)) throw Error("device dt must be positive");
    if (qubits.size() != num_qubits) {
      throw Error("device lists " + std::to_string(qubits.size()) +
                  " qubit entries for num_qubits=" + std::to_string(num_qubits));
    }
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    for (std::size_t q = 0; q < qubits.size(); ++q) {
      const auto& p = qubits[q];
      const std::string tag = "qubit " + std::to_string(q) + ": ";
      if (!(p.t1 > 0.0)) throw Error(tag + "t1 must be positive");
      if (!(p.t2 > 0.0) || p.t2 > 2.0 * p.t1) throw Error(tag + "t2 must satisfy 0 < t2 <= 2 t1");
      if (!std::isfinite(p.detuning_hz)) throw Error(tag + "detuning must be finite");
      if (!prob(p.readout_p01) || !prob(p.readout_p10)) throw Error(tag + "readout error outside [0,1]");
    }
    if (!prob(depol_1q) || !prob(depol_2q)) throw Error("depolarizing probability outside [0,1]");
    for (const auto& [key, d] : gate_durations) {
      const Duration min = (key == "rz") ? 0 : 1;
      if (d < min) throw Error("duration for '" + key + "' must be >= " + std::to_string(min) + " dt");
    }
    for (const auto& [a, b] : coupling) {
      if (a == b || b >= num_qubits) throw Error("invalid coupling edge");
    }
  }

  friend bool operator==(const DeviceModel&, const DeviceModel&) = default;
};

namespace detail {

inline double json_time(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw Error(std::string("field '") + key + "' must be a number or \"inf\"");
  }
  return v.get<double>();
}

inline nlohmann::json time_json(double t) {
  if (std::isinf(t)) return "inf";
  return t;
}

}  // namespace detail

inline DeviceModel device_from_json(const nlohmann::json& j) {
  DeviceModel d;
  try {
    d.name = j.value("name", std::string{});
    d.dt = j.at("dt").get<double>();
    d.num_qubits = j.at("num_qubits").get<std::size_t>();
    for (const auto& qj : j.at("qubits")) {
      QubitParams p;
      p.t1 = detail::json_time(qj, "t1", p.t1);
      p.t2 = detail::json_time(qj, "t2", p.t2);
      p.detuning_hz = qj.value("detuning_hz", 0.0);
      p.readout_p01 = qj.value("readout_p01", 0.0);
      p.readout_p10 = qj.value("readout_p10", 0.0);
      d.qubits.push_back(p);
    }
    for (const auto& [k, v] : j.at("gate_durations").items()) {
      d.gate_durations[k] = v.get<Duration>();
    }
    d.depol_1q = j.value("depol_1q", 0.0);
    d.depol_2q = j.value("depol_2q", 0.0);
    for (const auto& e : j.value("coupling", nlohmann::json::array())) {
      d.add_edge(e.at(0).get<Qubit>(), e.at(1).get<Qubit>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed device description: ") + e.what());
  }
  d.check();
  return d;
}

inline nlohmann::json device_to_json(const DeviceModel& d) {
  nlohmann::json j;
  j["name"] = d.name;
  j["dt"] = d.dt;
  j["num_qubits"] = d.num_qubits;
  j["qubits"] = nlohmann::json::array();
  for (const auto& p : d.qubits) {
    j["qubits"].push_back({{"t1", detail::time_json(p.t1)},
                           {"t2", detail::time_json(p.t2)},
                           {"detuning_hz", p.detuning_hz},
                           {"readout_p01", p.readout_p01},
                           {"readout_p10", p.readout_p10}});
  }
  j["gate_durations"] = d.gate_durations;
  j["depol_1q"] = d.depol_1q;
  j["depol_2q"] = d.depol_2q;
  j["coupling"] = nlohmann::json::array();
  for (const auto& [a, b] : d.coupling) j["coupling"].push_back({a, b});
  return j;
}

inline DeviceModel load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open device file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("device file '" + path + "': " + e.what());
  }
  return device_from_json(j);
}

inline void save_device(const DeviceModel& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write device file '" + path + "'");
  out << device_to_json(d).dump(2) << "\n";
}

/// A device whose qubits are coupled in a line 0-1-...-(n-1), all sharing
/// the same parameters.
inline DeviceModel line_device(std::size_t n, const QubitParams& params,
                               Duration one_qubit = 160, Duration cx = 1600,
                               Duration measure = 16000) {
  DeviceModel d;
  d.name = "line" + std::to_string(n);
  d.num_qubits = n;
  d.qubits.assign(n, params);
  d.gate_durations = {{"1q", one_qubit}, {"rz", 0}, {"cx", cx}, {"measure", measure}};
  for (Qubit q = 0; q + 1 < n; ++q) d.add_edge(q, q + 1);
  return d;
}

/// The shipped reference device: 7 line-coupled qubits with
/// T1 = 100 us, T2 = 80 us, 35.56 ns single-qubit gates.
inline DeviceModel reference_device(std::size_t n = 7) {
  QubitParams p;
  p.t1 = 100e-6;
  p.t2 = 80e-6;
  p.readout_p01 = 0.01;
  p.readout_p10 = 0.01;
  DeviceModel d = line_device(n, p);
  d.name = "reference" + std::to_string(n);
  d.dt = 2.2222e-10;
  d.depol_1q = 1e-4;
  d.depol_2q = 1e-2;
  static constexpr double kDetuning[] = {12e3, -8e3, 15e3, -5e3, 9e3, -11e3, 7e3};
  for (std::size_t q = 0; q < n; ++q) d.qubits[q].detuning_hz = kDetuning[q % 7];
  return d;
}

inline DeviceModel noise_free_device(std::size_t n = 7) {
  DeviceModel d = line_device(n, QubitParams{});
  d.name = "noise-free" + std::to_string(n);
  return d;
}

struct Violation {
  std::optional<std::size_t> instruction;  // index into the circuit
  std::string message;
};

/// Checks register size, qubit indices, coupling of every CX and the
/// availability of a duration for every instruction. Returns all problems.
inline std::vector<Violation> validate(const Circuit& c, const DeviceModel& d) {
  std::vector<Violation> out;
  if (c.num_qubits() > d.num_qubits) {
    out.push_back({std::nullopt, "circuit register of " + std::to_string(c.num_qubits()) +
                                     " qubits exceeds device size " +
                                     std::to_string(d.num_qubits)});
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& ins = c[i];
    bool in_range = true;
    for (Qubit q : ins.qubits) {
      if (q >= d.num_qubits) {
        in_range = false;
        out.push_back({i, "qubit index out of range: q" + std::to_string(q) + " on a " +
                              std::to_string(d.num_qubits) + "-qubit device"});
      }
    }
    if (ins.type == GateType::CX && in_range && !d.coupled(ins.qubits[0], ins.qubits[1])) {
      auto a = std::min(ins.qubits[0], ins.qubits[1]);
      auto b = std::max(ins.qubits[0], ins.qubits[1]);
      out.push_back({i, "uncoupled pair (" + std::to_string(a) + "," + std::to_string(b) + ")"});
    }
    if (!d.duration(ins)) {
      out.push_back({i, "no duration for " + std::string(gate_name(ins.type))});
    }
  }
  return out;
}

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> v)
      : Error(summary(v)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string summary(const std::vector<Violation>& v) {
    std::ostringstream os;
    os << "circuit does not fit the device:";
    for (const auto& x : v) {
      os << "\n  ";
      if (x.instruction) os << "[" << *x.instruction << "] ";
      os << x.message;
    }
    return os.str();
  }
  std::vector<Violation> violations_;
};

inline void require_valid(const Circuit& c, const DeviceModel& d) {
  auto v = validate(c, d);
  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace timestitch

#endif  // TIMESTITCH_DEVICE_HPP
