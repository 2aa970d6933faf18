#include <catch2/catch_amalgamated.hpp>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "timestitch/qasm.hpp"

using namespace timestitch;
using qasm::ParseError;
using qasm::ParseErrorKind;

namespace {

ParseError parse_error(std::string_view text) {
  try {
    qasm::parse(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for: " << text);
  throw;
}

}  // namespace

TEST_CASE("parses the basic grammar", "[qasm]") {
  const auto c = qasm::parse("OPENQASM 2.0; qreg q[2]; x q[0]; cx q[0],q[1];");
  REQUIRE(c.num_qubits() == 2);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Instruction::x(0));
  CHECK(c[1] == Instruction::cx(0, 1));
}

TEST_CASE("evaluates angle expressions", "[qasm]") {
  const auto c = qasm::parse(
      "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\n"
      "rz(pi/4) q[0];\nrz(-3*pi/2) q[0];\nrz(0.125) q[0];\nrz(1e-3*(2+pi)) q[0];\n");
  REQUIRE(c.size() == 4);
  CHECK(c[0].theta == 0.7853981633974483);
  CHECK(c[1].theta == Catch::Approx(-3 * std::numbers::pi / 2));
  CHECK(c[2].theta == 0.125);
  CHECK(c[3].theta == Catch::Approx(1e-3 * (2 + std::numbers::pi)));
}

TEST_CASE("accepts measure, barrier, delay, creg and broadcast", "[qasm]") {
  const auto c = qasm::parse(
      "OPENQASM 2.0;\nqreg q[3];\ncreg c[3];\nh q;\nbarrier q[0],q[2];\n"
      "delay[40] q[1];\nmeasure q[0] -> c[0];\n");
  REQUIRE(c.size() == 6);
  CHECK(c[0] == Instruction::h(0));
  CHECK(c[2] == Instruction::h(2));
  CHECK(c[3] == Instruction::barrier({0, 2}));
  CHECK(c[4] == Instruction::delay_for(40, 1));
  CHECK(c[5] == Instruction::measure(0));
}

TEST_CASE("reports structured errors with positions", "[qasm]") {
  auto e = parse_error("OPENQASM 2.0;\nqreg q[1];\nt q[0];\n");
  CHECK(e.kind() == ParseErrorKind::UnsupportedGate);
  CHECK(e.span() == qasm::SourceSpan{3, 1});
  CHECK(e.detail().find("'t'") != std::string::npos);

  e = parse_error("OPENQASM 2.0; qreg q[1]; qreg r[2];");
  CHECK(e.kind() == ParseErrorKind::MultipleQreg);

  e = parse_error("OPENQASM 2.0;\nqreg q[2];\nx q[0]\ncx q[0],q[1];");
  CHECK(e.kind() == ParseErrorKind::Syntax);
  CHECK(e.span().line == 4);

  e = parse_error("OPENQASM 2.0; qreg q[2]; x q[5];");
  CHECK(e.kind() == ParseErrorKind::Semantic);

  e = parse_error("OPENQASM 3.0; qreg q[1];");
  CHECK(e.kind() == ParseErrorKind::Syntax);

  e = parse_error("OPENQASM 2.0; qreg q[2]; cx q[0],q[0];");
  CHECK(e.kind() == ParseErrorKind::Semantic);

  e = parse_error("OPENQASM 2.0; qreg q[1]; measure q[0] -> c[0]; x q[0];");
  CHECK(e.kind() == ParseErrorKind::Semantic);
}

TEST_CASE("serializes the grammar it parses", "[qasm]") {
  Circuit one(1, {Instruction::x(0)});
  CHECK(qasm::serialize(one).find("x q[0];") != std::string::npos);

  const auto empty = qasm::serialize(Circuit(3));
  CHECK(empty == "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\n");
}

TEST_CASE("round trip of random circuits is exact", "[qasm]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = oracle::random_circuit(rng, 4, 30);
    c.append(Instruction::barrier({0, 3}));
    c.append(Instruction::delay_for(17 + trial, static_cast<Qubit>(trial % 4)));
    if (trial % 2) c.append(Instruction::measure(1));
    CHECK(qasm::parse(qasm::serialize(c)) == c);
  }
}

TEST_CASE("arbitrary bytes never crash the parser", "[qasm]") {
  const std::string seed =
      "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\n"
      "rz(pi/2*-(1.5e0)) q[1];\ncx q[0],q[1];\ndelay[12] q[2];\nmeasure q[0] -> c[0];\n";
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s = seed;
    const int edits = 1 + trial % 8;
    for (int k = 0; k < edits; ++k) {
      std::size_t pos = rng() % (s.size() + 1);
      switch (rng() % 3) {
        case 0:
          if (!s.empty()) s[pos % s.size()] = static_cast<char>(byte(rng));
          break;
        case 1: s.insert(pos, 1, static_cast<char>(byte(rng))); break;
        default:
          if (!s.empty()) s.erase(pos % s.size(), 1 + rng() % 4);
      }
    }
    try {
      qasm::parse(s);
    } catch (const ParseError& e) {
      CHECK(e.span().line >= 1);
      CHECK(e.span().column >= 1);
    }
  }
  std::string noise(512, '\0');
  for (auto& ch : noise) ch = static_cast<char>(byte(rng));
  CHECK_THROWS_AS(qasm::parse(noise), ParseError);
  CHECK_THROWS_AS(qasm::parse(std::string(200, '(')), ParseError);
}
