#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "timestitch/bench.hpp"

using namespace timestitch;
using oracle::cd;
using oracle::Mat;

namespace {

std::set<std::string> S(std::initializer_list<const char*> xs) {
  std::set<std::string> out;
  for (auto x : xs) out.insert(x);
  return out;
}

}  // namespace

TEST_CASE("benchmark names and size limits", "[bench]") {
  CHECK(make_benchmark(BenchKind::GHZ_ECHO, 5).name == "ghz-5");
  CHECK(parse_bench_kind("qaoa") == BenchKind::QAOA_RING);
  CHECK_THROWS_AS(parse_bench_kind("grover"), Error);
  CHECK_THROWS_AS(make_benchmark(BenchKind::GHZ_ECHO, 8), Error);
  CHECK_THROWS_AS(make_benchmark(BenchKind::QFT, 6), Error);
  CHECK_THROWS_AS(make_benchmark(BenchKind::QAOA_RING, 5), Error);
  CHECK_THROWS_AS(make_benchmark(BenchKind::ADDER, 4), Error);
  for (auto k : {BenchKind::GHZ_ECHO, BenchKind::QFT, BenchKind::QAOA_RING, BenchKind::ADDER,
                 BenchKind::REP_ENCODER, BenchKind::HAHN_MICRO}) {
    CHECK_NOTHROW(make_benchmark(k, default_size(k)));
  }
}

TEST_CASE("accepted outputs of the standard benchmarks", "[bench]") {
  CHECK(make_benchmark(BenchKind::GHZ_ECHO, 5).accepted == S({"00000"}));
  CHECK(make_benchmark(BenchKind::QFT, 4).accepted == S({"1010"}));
  CHECK(make_benchmark(BenchKind::QFT, 5).accepted == S({"10101"}));
  CHECK(make_benchmark(BenchKind::QAOA_RING, 4).accepted == S({"0101", "1010"}));
  CHECK(make_benchmark(BenchKind::QAOA_RING, 6).accepted == S({"010101", "101010"}));
  CHECK(make_benchmark(BenchKind::REP_ENCODER, 5).accepted == S({"00000", "10101"}));
  const auto g = ideal_distribution(make_benchmark(BenchKind::QAOA_RING, 4).circuit);
  CHECK(g.at("0101") == Catch::Approx(0.5));
}

TEST_CASE("QFT reaches every requested target", "[bench]") {
  for (std::size_t n : {3U, 4U}) {
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
      BenchParams p;
      p.qft_target = bitstring(v, n);
      const auto b = make_benchmark(BenchKind::QFT, n, p);
      CHECK(b.accepted == std::set<std::string>{p.qft_target});
    }
  }
  BenchParams bad;
  bad.qft_target = "10";
  CHECK_THROWS_AS(make_benchmark(BenchKind::QFT, 4, bad), Error);
}

TEST_CASE("the adder computes a+b for every input", "[bench]") {
  for (unsigned a = 0; a < 4; ++a) {
    for (unsigned b = 0; b < 4; ++b) {
      BenchParams p;
      p.adder_a = a;
      p.adder_b = b;
      const auto bm = make_benchmark(BenchKind::ADDER, 6, p);
      REQUIRE(bm.accepted.size() == 1);
      const std::string bits = *bm.accepted.begin();  // q5 .. q0
      auto at = [&](Qubit q) { return bits[5 - q] == '1' ? 1U : 0U; };
      const unsigned sum = at(1) | (at(3) << 1) | (at(5) << 2);
      INFO("a=" << a << " b=" << b << " out=" << bits);
      CHECK(sum == a + b);
      CHECK(at(2) == (a & 1U));
      CHECK(at(4) == (a >> 1));
      CHECK(at(0) == 0U);
    }
  }
}

TEST_CASE("line-builder composites match their unitaries", "[bench]") {
  for (double lambda : {std::numbers::pi / 2, std::numbers::pi / 4, 0.3}) {
    LineBuilder b(2);
    b.cphase_swap(lambda, 0, 1);
    Mat cp = Mat::Identity(4, 4);
    cp(3, 3) = std::exp(cd(0, lambda));
    Mat swap = Mat::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1;
    CHECK(oracle::equal_up_to_phase(oracle::unitary(b.circuit()), swap * cp));

    LineBuilder c(2);
    c.cphase(lambda, 0, 1);
    CHECK(oracle::equal_up_to_phase(oracle::unitary(c.circuit()), cp));
  }

  LineBuilder t(3);
  t.ccx(0, 1, 2);
  Mat toffoli = Mat::Identity(8, 8);
  toffoli(3, 3) = toffoli(7, 7) = 0;
  toffoli(3, 7) = toffoli(7, 3) = 1;
  CHECK(oracle::equal_up_to_phase(oracle::unitary(t.circuit()), toffoli));
  for (const auto& i : t.circuit().instructions()) {
    if (i.type == GateType::CX) CHECK(std::abs(int(i.qubits[0]) - int(i.qubits[1])) == 1);
  }

  LineBuilder r(3);
  r.cx(0, 2);
  CHECK(oracle::equal_up_to_phase(oracle::unitary(r.circuit()), oracle::cx(0, 2, 3)));
  for (const auto& i : r.circuit().instructions()) {
    if (i.type == GateType::CX) CHECK(std::abs(int(i.qubits[0]) - int(i.qubits[1])) == 1);
  }
}

TEST_CASE("the swap-network QFT is a DFT up to a qubit reversal", "[bench]") {
  for (std::size_t n : {3U, 4U}) {
    LineBuilder b(n);
    detail::qft_core(b, n);
    const Mat u = oracle::unitary(b.circuit());
    const std::size_t dim = std::size_t{1} << n;
    bool matched = false;
    for (bool reverse_in : {false, true}) {
      for (bool reverse_out : {false, true}) {
        auto rev = [&](std::size_t x, bool on) {
          if (!on) return x;
          std::size_t y = 0;
          for (std::size_t k = 0; k < n; ++k) y |= ((x >> k) & 1U) << (n - 1 - k);
          return y;
        };
        for (int sign : {1, -1}) {
          Mat f(dim, dim);
          for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c)
              f(rev(r, reverse_out), rev(c, reverse_in)) =
                  std::exp(cd(0, sign * 2 * std::numbers::pi * double(r * c) / double(dim))) /
                  std::sqrt(double(dim));
          matched |= oracle::equal_up_to_phase(u, f, 1e-9);
        }
      }
    }
    CHECK(matched);
  }
}

TEST_CASE("benchmarks fit a line device", "[bench]") {
  const auto d = reference_device();
  for (auto k : {BenchKind::GHZ_ECHO, BenchKind::QFT, BenchKind::QAOA_RING, BenchKind::ADDER,
                 BenchKind::REP_ENCODER, BenchKind::HAHN_MICRO}) {
    const auto b = make_benchmark(k, default_size(k));
    CHECK(validate(b.circuit, d).empty());
    CHECK(b.circuit.has_measure());
  }
  const auto q4 = make_benchmark(BenchKind::QFT, 4).circuit;
  CHECK(q4.size() == 52);
  CHECK(cx_depth(q4) == 15);
}

TEST_CASE("echo micro-benchmark members share one duration", "[bench]") {
  const auto d = std::make_shared<const DeviceModel>(reference_device(1));
  const auto family = hahn_micro(40, false, true, *d);
  REQUIRE(family.size() == 41);
  const Duration total = schedule(family[0], d, Policy::ALAP).total_duration();
  CHECK(total == 3 * 160 + 40 * 160 + 16000);
  for (const auto& c : family) {
    CHECK(schedule(c, d, Policy::ALAP).total_duration() == total);
    CHECK(accepted_outputs(c) == S({"0"}));  // H X H = Z fixes |0>
  }
  for (const auto& c : hahn_micro(10, true, false, *d)) CHECK(accepted_outputs(c) == S({"0"}));
  for (const auto& c : hahn_micro(10, false, false, *d)) CHECK(accepted_outputs(c) == S({"1"}));
  CHECK_THROWS_AS(hahn_micro_split(10, 11, false, true, 160), Error);
}

TEST_CASE("benchmarks load from QASM files", "[bench]") {
  const auto path = std::filesystem::temp_directory_path() / "timestitch_bench.qasm";
  {
    std::ofstream f(path);
    f << qasm::serialize(make_benchmark(BenchKind::GHZ_ECHO, 3).circuit);
  }
  const auto b = benchmark_from_file(path.string(), {});
  CHECK(b.accepted == S({"000"}));
  CHECK(benchmark_from_file(path.string(), S({"111"})).accepted == S({"111"}));
  std::filesystem::remove(path);
  CHECK_THROWS(benchmark_from_file("/nonexistent.qasm", {}));
}
