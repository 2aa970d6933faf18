#include <catch2/catch_amalgamated.hpp>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "timestitch/sched.hpp"

using namespace timestitch;

namespace {

/// cx = 20 dt, single-qubit = 4 dt, measure = 10 dt.
std::shared_ptr<const DeviceModel> small_device(std::size_t n) {
  return std::make_shared<const DeviceModel>(line_device(n, QubitParams{}, 4, 20, 10));
}

Circuit example() {
  Circuit c(3);
  c.append(Instruction::cx(0, 1)).append(Instruction::cx(1, 2)).append(Instruction::x(0));
  c.append(Instruction::cx(0, 1));
  return c;
}

std::vector<long long> durations(const Circuit& c, const DeviceModel& d) {
  std::vector<long long> out;
  for (const auto& i : c.instructions()) out.push_back(d.duration_of(i));
  return out;
}

}  // namespace

TEST_CASE("ALAP, ASAP and Middle on the worked example", "[sched]") {
  const auto d = small_device(3);
  const auto alap = schedule(example(), d, Policy::ALAP);
  CHECK(alap[0].start == 0);
  CHECK(alap[1].start == 20);
  CHECK(alap[2].start == 36);
  CHECK(alap[3].start == 40);
  CHECK(alap.total_duration() == 60);
  CHECK(schedule(example(), d, Policy::ASAP)[2].start == 20);
  CHECK(schedule(example(), d, Policy::Middle)[2].start == 28);
}

TEST_CASE("schedules match the reference list scheduler", "[sched]") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto d = small_device(n);
    auto c = oracle::random_line_circuit(rng, n, 25);
    if (trial % 3 == 0) c.append(Instruction::barrier({0, static_cast<Qubit>(n - 1)}));
    if (trial % 2 == 0) {
      for (Qubit q = 0; q < n; ++q) c.append(Instruction::measure(q));
    }
    const auto dur = durations(c, *d);
    const auto asap = schedule(c, d, Policy::ASAP);
    const auto alap = schedule(c, d, Policy::ALAP);
    const auto ref_asap = oracle::list_schedule_asap(c, dur);
    const auto ref_alap = oracle::list_schedule_alap(c, dur);
    for (std::size_t i = 0; i < c.size(); ++i) {
      INFO("trial " << trial << " instruction " << i);
      CHECK(asap[i].start == ref_asap[i]);
      CHECK(alap[i].start == ref_alap[i]);
    }
  }
}

TEST_CASE("all policies share total duration and instruction list", "[sched]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto d = small_device(n);
    const auto c = oracle::random_line_circuit(rng, n, 30);
    const auto a = schedule(c, d, Policy::ASAP);
    const auto l = schedule(c, d, Policy::ALAP);
    const auto m = schedule(c, d, Policy::Middle);
    CHECK(a.total_duration() == l.total_duration());
    CHECK(m.total_duration() == l.total_duration());
    CHECK(to_circuit(a) == to_circuit(l));
    CHECK(to_circuit(m) == to_circuit(l));
  }
  CHECK(schedule(Circuit(2), small_device(2), Policy::ALAP).total_duration() == 0);
  CHECK(schedule(Circuit(1, {Instruction::x(0)}), small_device(1), Policy::ALAP).total_duration() == 4);
}

TEST_CASE("slack windows of the worked example", "[sched]") {
  const auto d = small_device(3);
  const auto tc = schedule(example(), d, Policy::ALAP);
  const auto ws = find_slack_windows(tc);
  // q0 holds the X window; q2 idles from the end of its only CX to the end.
  REQUIRE(ws.size() == 2);
  CHECK(ws[0].qubit == 0);
  CHECK(ws[0].start == 20);
  CHECK(ws[0].duration == 20);
  REQUIRE(ws[0].block.size() == 1);
  CHECK(tc[ws[0].block[0]].instr == Instruction::x(0));
  CHECK(ws[0].block_offset == 16);
  CHECK(ws[0].max_offset() == 16);
  CHECK(ws[1].qubit == 2);
  CHECK(ws[1].start == 40);
  CHECK(ws[1].duration == 20);
  CHECK_FALSE(ws[1].right_anchor.has_value());
}

TEST_CASE("time before the first operation is not slack", "[sched]") {
  const auto d = small_device(2);
  Circuit c(2);
  c.append(Instruction::x(0)).append(Instruction::cx(0, 1));
  for (const auto& w : find_slack_windows(schedule(c, d, Policy::ALAP))) CHECK(w.qubit != 1);
}

TEST_CASE("an explicit delay opens a window with an empty block", "[sched]") {
  const auto d = small_device(2);
  Circuit c(2);
  c.append(Instruction::cx(0, 1)).append(Instruction::delay_for(50, 0)).append(Instruction::cx(0, 1));
  const auto ws = find_slack_windows(schedule(c, d, Policy::ALAP));
  int on_q0 = 0;
  for (const auto& w : ws) {
    if (w.qubit != 0) continue;
    ++on_q0;
    CHECK(w.duration == 50);
    CHECK(w.block.empty());
  }
  CHECK(on_q0 == 1);
}

TEST_CASE("windows tile each qubit's runtime and ALAP blocks sit flush right", "[sched]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto d = small_device(n);
    auto c = oracle::random_line_circuit(rng, n, 30);
    for (Qubit q = 0; q < n; ++q) c.append(Instruction::measure(q));
    for (auto policy : {Policy::ASAP, Policy::ALAP, Policy::Middle}) {
      const auto tc = schedule(c, d, policy);
      const auto ws = find_slack_windows(tc);
      const auto lanes = tc.per_qubit();
      for (Qubit q = 0; q < n; ++q) {
        if (lanes[q].empty()) continue;
        Duration busy = 0, idle = 0;
        for (std::size_t i : lanes[q]) busy += tc[i].duration;
        for (const auto& w : ws) {
          if (w.qubit != q) continue;
          Duration block = 0;
          for (std::size_t i : w.block) block += tc[i].duration;
          idle += w.duration - block;
          CHECK(w.duration > block);
          if (policy == Policy::ALAP && w.has_block() && w.right_anchor) {
            CHECK(tc[w.block.back()].end() == w.end());
          }
        }
        const Duration first = tc[lanes[q].front()].start;
        INFO("trial " << trial << " qubit " << q);
        CHECK(first + busy + idle == tc.total_duration());
      }
    }
  }
}

TEST_CASE("move_block shifts only the block and checks range", "[sched]") {
  const auto d = small_device(3);
  const auto tc = schedule(example(), d, Policy::ALAP);
  const auto w = find_slack_windows(tc)[0];
  const auto moved = move_block(tc, w, 0);
  CHECK(moved[2].start == 20);
  for (std::size_t i : {0, 1, 3}) CHECK(moved[i].start == tc[i].start);
  CHECK(moved.total_duration() == tc.total_duration());
  CHECK_THROWS_AS(move_block(tc, w, 17), Error);
  CHECK_THROWS_AS(move_block(tc, w, -1), Error);
}

TEST_CASE("timed QASM reproduces every start time", "[sched]") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto d = small_device(n);
    auto c = oracle::random_line_circuit(rng, n, 20);
    for (Qubit q = 0; q < n; ++q) c.append(Instruction::measure(q));
    for (auto policy : {Policy::ALAP, Policy::Middle}) {
      const auto tc = schedule(c, d, policy);
      const auto back = from_timed_qasm(to_timed_qasm(tc), d);
      CHECK(back == tc);
    }
  }
}

TEST_CASE("schedule rejects circuits that do not fit the device", "[sched]") {
  Circuit c(3);
  c.append(Instruction::cx(0, 2));
  CHECK_THROWS_AS(schedule(c, small_device(3), Policy::ALAP), ValidationError);
}
