#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "merit/rip.hpp"
#include "merit/workloads.hpp"

using namespace merit;

namespace {

// Nested-loop oracle for the phase schedule: records the segment indices
// a D-level loop nest would execute, with Pre_l before each level-l loop
// body and Post_l after it.
void phase_oracle_rec(const Shape& a, int level, std::vector<int>& seq) {
  int d = static_cast<int>(a.size());
  if (level == d) {
    seq.push_back(d);  // Body
    return;
  }
  for (int64_t i = 0; i < a[level]; ++i) {
    if (i == 0) seq.push_back(level);  // Pre_{level+1}
    phase_oracle_rec(a, level + 1, seq);
    if (i == a[level] - 1) seq.push_back(2 * d - level);  // Post_{level+1}
  }
}

std::vector<int> phase_oracle(const Shape& a) {
  std::vector<int> seq;
  phase_oracle_rec(a, 0, seq);
  return seq;
}

std::vector<int> phase_flat(const Shape& a) {
  std::vector<int> seq;
  Index k(a.size(), 0);
  do {
    auto [first, last] = phase_range(a, k);
    for (int s = first; s <= last; ++s) seq.push_back(s);
  } while (next_index(k, a));
  return seq;
}

}  // namespace

TEST_CASE("phase sequence equals the loop-nest oracle, D=2 exhaustive") {
  for (int64_t e1 = 1; e1 <= 4; ++e1)
    for (int64_t e2 = 1; e2 <= 4; ++e2)
      CHECK(phase_flat({e1, e2}) == phase_oracle({e1, e2}));
}

TEST_CASE("phase sequence for D=1 and D=3") {
  for (int64_t e = 1; e <= 6; ++e) CHECK(phase_flat({e}) == phase_oracle({e}));
  CHECK(phase_flat({2, 3, 2}) == phase_oracle({2, 3, 2}));
  CHECK(phase_flat({1, 1, 1}) == phase_oracle({1, 1, 1}));
}

TEST_CASE("phase_range boundary cases") {
  // k=0: everything from Pre_1; k=max: everything through Post_1.
  CHECK(phase_range({3, 3}, {0, 0}) == std::pair<int, int>{0, 2});
  CHECK(phase_range({3, 3}, {2, 2}) == std::pair<int, int>{2, 4});
  CHECK(phase_range({3, 3}, {1, 0}) == std::pair<int, int>{1, 2});
  CHECK(phase_range({3, 3}, {1, 2}) == std::pair<int, int>{2, 3});
  CHECK(phase_range({3, 3}, {1, 1}) == std::pair<int, int>{2, 2});
  CHECK_THROWS_AS(phase_range({3, 3}, {3, 0}), Error);
}

TEST_CASE("D=1 conv+ReLU semantics on random vectors") {
  StrategyProgram prog = detail::mac_program(1, 0);
  prog.segments[prog.post(1)] = {
      {Op::MAX, Dst::emit(), Operand::r(0), Operand::zero(), Operand::zero(),
       0, 0}};
  SplitMix64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    int64_t n = 1 + static_cast<int64_t>(rng.next() % 16);
    std::vector<float> a(n), b(n);
    double ref = 0;
    for (int64_t i = 0; i < n; ++i) {
      a[i] = static_cast<float>(rng.uniform(-1, 1));
      b[i] = static_cast<float>(rng.uniform(-1, 1));
      ref += static_cast<double>(a[i]) * b[i];
    }
    ref = std::max(ref, 0.0);
    auto out = rip_execute_real(
        prog, {n}, [&](const Index& k) { return a[k[0]]; },
        [&](const Index& k) { return b[k[0]]; });
    REQUIRE(out.size() == 1);
    CHECK(out[0] == doctest::Approx(ref).epsilon(1e-5));
  }
}

TEST_CASE("REAL32 ALU semantics: shift is a power-of-two scale") {
  CHECK(alu_op_real(Op::ADD, 1.0f, 3.0f, 5.0f, 2) == 3.0f);  // 1 + 8/4
  CHECK(alu_op_real(Op::SUB, 0.0f, 3.0f, 5.0f, 1) == -1.0f);
  CHECK(alu_op_real(Op::L1, 1.0f, 2.0f, 6.0f, 2) == 2.0f);
  CHECK(alu_op_real(Op::MAC, 1.0f, 3.0f, 4.0f, 1) == 7.0f);
  CHECK(alu_op_real(Op::MAX, -1.0f, 2.0f, 0.0f, 0) == 2.0f);
  CHECK(alu_op_real(Op::MIN, -1.0f, 2.0f, 0.0f, 0) == -1.0f);
  CHECK(alu_op_real(Op::SEL, 1.0f, 7.0f, 9.0f, 0) == 7.0f);
  CHECK(alu_op_real(Op::SEL, 0.0f, 7.0f, 9.0f, 0) == 9.0f);
  CHECK(alu_op_real(Op::DIV, 7.0f, 2.0f, 0.0f, 0) == 3.5f);
  CHECK_THROWS_AS(alu_op_real(Op::DIV, 1.0f, 0.0f, 0.0f, 0), Error);
}

TEST_CASE("FIX16 ALU semantics: 32-bit intermediates, floor shift, saturation") {
  CHECK(alu_op_fix(Op::MAC, 0, 300, 300, 0) == 32767);       // saturates
  CHECK(alu_op_fix(Op::MAC, 0, -300, 300, 0) == -32768);
  CHECK(alu_op_fix(Op::MAC, 0, 300, 300, 8) == 351);         // 90000 >> 8
  CHECK(alu_op_fix(Op::ADD, 0, -3, 0, 1) == -2);             // floor(-1.5)
  CHECK(alu_op_fix(Op::L1, 0, -5, 5, 1) == 5);
  CHECK(alu_op_fix(Op::BAND, 12, 10, 0, 0) == 8);
  CHECK(alu_op_fix(Op::BOR, 12, 10, 0, 0) == 14);
  CHECK(alu_op_fix(Op::BXOR, 12, 10, 0, 0) == 6);
  CHECK(alu_op_fix(Op::BNOT, 12, 0, 0, 0) == -13);
  CHECK_THROWS_AS(alu_op_fix(Op::DIV, 4, 2, 0, 0), Error);  // REAL32-only
  // intermediate exceeds 16 bits but not 32: no overflow before writeback
  CHECK(alu_op_fix(Op::MAC, 0, 32767, 32767, 15) == 32766);
}

TEST_CASE("bitwise ops on REAL32 round through integers") {
  CHECK(alu_op_real(Op::BAND, 12.0f, 10.0f, 0.0f, 0) == 8.0f);
  CHECK(alu_op_real(Op::BXOR, 12.0f, 10.0f, 0.0f, 0) == 6.0f);
}

TEST_CASE("lookup table interpolation") {
  LookupTable t{0.0, 4.0, {0.0, 1.0, 4.0, 9.0, 16.0}, true};
  CHECK(t.lookup(2.0) == 4.0);
  CHECK(t.lookup(2.5) == 6.5);   // halfway between 4 and 9
  CHECK(t.lookup(-1.0) == 0.0);  // clamped
  CHECK(t.lookup(9.0) == 16.0);
  LookupTable strict{0.0, 1.0, {0.0, 1.0}, false};
  CHECK_THROWS_AS(strict.lookup(1.5), Error);
  LookupTable single{0.0, 1.0, {7.0}, true};
  CHECK(single.lookup(0.3) == 7.0);
}

TEST_CASE("IDX, MOVC and emitted outputs") {
  StrategyProgram prog;
  prog.depth = 1;
  prog.segments.assign(3, {});
  prog.constants = {2.5};
  prog.outputs = 2;
  auto z = Operand::zero();
  prog.segments[2] = {
      {Op::IDX, Dst::emit(), z, z, z, 0, 0},   // a component of k
      {Op::MOVC, Dst::emit(), z, z, z, 0, 0},
  };
  auto out = rip_execute_real(
      prog, {3}, [](const Index&) { return 0.0f; },
      [](const Index&) { return 0.0f; });
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 2.0f);  // last a index
  CHECK(out[1] == 2.5f);
}

TEST_CASE("program validation") {
  StrategyProgram prog = detail::mac_program(2, 0);
  CHECK_NOTHROW(prog.validate());
  prog.segments.pop_back();
  CHECK_THROWS_AS(prog.validate(), Error);  // needs 2*depth+1 segments

  StrategyProgram bad = detail::mac_program(1, 0);
  bad.segments[1][0].dst = Dst::r(16);
  CHECK_THROWS_AS(bad.validate(), Error);  // register file has 16 entries
  bad = detail::mac_program(1, 0);
  bad.segments[1][0].shift = 16;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("registers persist across the accumulation sweep") {
  // Body adds port A into r1 without a Pre reset; 2 outputs per sweep.
  StrategyProgram prog;
  prog.depth = 1;
  prog.segments.assign(3, {});
  prog.outputs = 1;
  auto z = Operand::zero();
  prog.segments[0] = {{Op::ADD, Dst::r(1), z, z, z, 0, 0}};
  prog.segments[1] = {{Op::ADD, Dst::r(1), Operand::r(1), Operand::a(), z, 0, 0}};
  prog.segments[2] = {{Op::ADD, Dst::emit(), Operand::r(1), z, z, 0, 0}};
  auto out = rip_execute_real(
      prog, {4}, [](const Index& k) { return static_cast<float>(k[0]); },
      [](const Index&) { return 0.0f; });
  CHECK(out == std::vector<float>{6.0f});
}
