#include <doctest.h>

#include "merit/serialize.hpp"
#include "merit/workloads.hpp"

using namespace merit;

TEST_CASE("view specs survive a JSON round trip") {
  for (const auto& name : template_names()) {
    Workload w = build_template(name, {});
    for (const ViewSpec* v : {&w.view_a, &w.view_b}) {
      ViewSpec back = view_from_json(to_json(*v));
      CHECK(back.source_shape == v->source_shape);
      CHECK(back.p_shape == v->p_shape);
      CHECK(back.a_shape == v->a_shape);
      CHECK(back.boundary == v->boundary);
      REQUIRE(back.terms.size() == v->terms.size());
      for (size_t i = 0; i < back.terms.size(); ++i) {
        CHECK(back.terms[i].component == v->terms[i].component);
        CHECK(back.terms[i].axis == v->terms[i].axis);
        CHECK(back.terms[i].stride == v->terms[i].stride);
        CHECK(back.terms[i].offset == v->terms[i].offset);
      }
    }
  }
}

TEST_CASE("programs survive a JSON round trip and still run") {
  for (const auto& name : template_names()) {
    Workload w = build_template(name, {});
    StrategyProgram back = program_from_json(to_json(w.program));
    CHECK(back.depth == w.program.depth);
    CHECK(back.outputs == w.program.outputs);
    CHECK(back.constants == w.program.constants);
    REQUIRE(back.segments.size() == w.program.segments.size());
    for (size_t s = 0; s < back.segments.size(); ++s) {
      REQUIRE(back.segments[s].size() == w.program.segments[s].size());
      for (size_t i = 0; i < back.segments[s].size(); ++i) {
        const AluInstr& u = back.segments[s][i];
        const AluInstr& v = w.program.segments[s][i];
        CHECK(u.op == v.op);
        CHECK(u.dst.out == v.dst.out);
        CHECK(u.dst.reg == v.dst.reg);
        CHECK(u.a.kind == v.a.kind);
        CHECK(u.b.kind == v.b.kind);
        CHECK(u.c.kind == v.c.kind);
        if (u.a.kind == Operand::Kind::Reg) CHECK(u.a.reg == v.a.reg);
        if (u.b.kind == Operand::Kind::Reg) CHECK(u.b.reg == v.b.reg);
        if (u.c.kind == Operand::Kind::Reg) CHECK(u.c.reg == v.c.reg);
        CHECK(u.shift == v.shift);
        CHECK(u.aux == v.aux);
      }
    }
    REQUIRE(back.tables.size() == w.program.tables.size());
    for (size_t t = 0; t < back.tables.size(); ++t)
      CHECK(back.tables[t].samples == w.program.tables[t].samples);

    // swapping the round-tripped program back in must not change results
    Workload w2 = w;
    w2.program = back;
    fill_random(w.src_a, 31);
    fill_random(w.src_b, 32);
    if (template_shares_input(name)) w.src_b = w.src_a;
    w2.src_a = w.src_a;
    w2.src_b = w.src_b;
    if (name == "alexnet_conv1") continue;  // covered elsewhere; large
    CHECK(run_full(w).same_bits(run_full(w2)));
  }
}

TEST_CASE("operand and destination mnemonics") {
  using detail::operand_from_str;
  using detail::operand_str;
  CHECK(operand_str(Operand::a()) == "a");
  CHECK(operand_str(Operand::b()) == "b");
  CHECK(operand_str(Operand::zero()) == "_");
  CHECK(operand_str(Operand::r(13)) == "r13");
  CHECK(operand_from_str("r7").reg == 7);
  CHECK(operand_from_str("b").kind == Operand::Kind::PortB);
  CHECK_THROWS_AS(operand_from_str("r16"), Error);
  CHECK_THROWS_AS(operand_from_str("q3"), Error);
  CHECK(detail::dst_str(Dst::emit()) == "out");
  CHECK(detail::dst_from_str("out").out);
  CHECK(detail::dst_from_str("r4").reg == 4);
  CHECK_THROWS_AS(detail::dst_from_str("a"), Error);
}

TEST_CASE("op and boundary names round trip") {
  for (Op op : {Op::ADD, Op::SUB, Op::L1, Op::MAC, Op::MAX, Op::MIN, Op::SEL,
                Op::BAND, Op::BOR, Op::BXOR, Op::BNOT, Op::IDX, Op::LUT,
                Op::MOVC, Op::DIV})
    CHECK(detail::op_from_name(detail::op_name(op)) == op);
  CHECK_THROWS_AS(detail::op_from_name("FMA"), Error);
  for (Boundary b : {Boundary::ZeroPad, Boundary::Clamp, Boundary::Reject})
    CHECK(detail::boundary_from_name(detail::boundary_name(b)) == b);
  CHECK_THROWS_AS(detail::boundary_from_name("WRAP"), Error);
}

TEST_CASE("malformed documents are rejected") {
  Json j = to_json(build_template("gemm", {}).program);
  Json bad = j;
  bad["segments"][2][0]["op"] = "NOP";
  CHECK_THROWS_AS(program_from_json(bad), Error);
  bad = j;
  bad["depth"] = 3;  // segment count no longer matches 2*depth+1
  CHECK_THROWS_AS(program_from_json(bad), Error);
  bad = j;
  bad.erase("segments");
  CHECK_THROWS(program_from_json(bad));

  Json v = to_json(build_template("gemm", {}).view_a);
  Json badv = v;
  badv["boundary"] = "MIRROR";
  CHECK_THROWS_AS(view_from_json(badv), Error);
}
