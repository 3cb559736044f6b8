#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "merit/engine.hpp"
#include "merit/rip.hpp"
#include "merit/view.hpp"

namespace merit {

using Json = nlohmann::ordered_json;

namespace detail {

inline const char* op_name(Op op) {
  switch (op) {
    case Op::ADD: return "ADD";
    case Op::SUB: return "SUB";
    case Op::L1: return "L1";
    case Op::MAC: return "MAC";
    case Op::MAX: return "MAX";
    case Op::MIN: return "MIN";
    case Op::SEL: return "SEL";
    case Op::BAND: return "BAND";
    case Op::BOR: return "BOR";
    case Op::BXOR: return "BXOR";
    case Op::BNOT: return "BNOT";
    case Op::IDX: return "IDX";
    case Op::LUT: return "LUT";
    case Op::MOVC: return "MOVC";
    case Op::DIV: return "DIV";
  }
  return "?";
}

inline Op op_from_name(const std::string& s) {
  static const std::vector<std::pair<std::string, Op>> names = {
      {"ADD", Op::ADD},   {"SUB", Op::SUB},   {"L1", Op::L1},
      {"MAC", Op::MAC},   {"MAX", Op::MAX},   {"MIN", Op::MIN},
      {"SEL", Op::SEL},   {"BAND", Op::BAND}, {"BOR", Op::BOR},
      {"BXOR", Op::BXOR}, {"BNOT", Op::BNOT}, {"IDX", Op::IDX},
      {"LUT", Op::LUT},   {"MOVC", Op::MOVC}, {"DIV", Op::DIV}};
  for (const auto& [n, op] : names)
    if (n == s) return op;
  throw Error(ErrorCode::BadParams, "unknown op " + s);
}

inline std::string operand_str(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Reg: return "r" + std::to_string(o.reg);
    case Operand::Kind::PortA: return "a";
    case Operand::Kind::PortB: return "b";
    case Operand::Kind::Zero: return "_";
  }
  return "_";
}

inline Operand operand_from_str(const std::string& s) {
  if (s == "a") return Operand::a();
  if (s == "b") return Operand::b();
  if (s == "_") return Operand::zero();
  if (s.size() >= 2 && s[0] == 'r') {
    int id = std::stoi(s.substr(1));
    if (id < 0 || id > 15)
      throw Error(ErrorCode::BadParams, "register id out of range: " + s);
    return Operand::r(id);
  }
  throw Error(ErrorCode::BadParams, "bad operand " + s);
}

inline std::string dst_str(const Dst& d) {
  return d.out ? "out" : "r" + std::to_string(d.reg);
}

inline Dst dst_from_str(const std::string& s) {
  if (s == "out") return Dst::emit();
  Operand o = operand_from_str(s);
  if (o.kind != Operand::Kind::Reg)
    throw Error(ErrorCode::BadParams, "bad destination " + s);
  return Dst::r(o.reg);
}

inline const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::ZeroPad: return "ZERO_PAD";
    case Boundary::Clamp: return "CLAMP";
    case Boundary::Reject: return "REJECT";
  }
  return "?";
}

inline Boundary boundary_from_name(const std::string& s) {
  if (s == "ZERO_PAD") return Boundary::ZeroPad;
  if (s == "CLAMP") return Boundary::Clamp;
  if (s == "REJECT") return Boundary::Reject;
  throw Error(ErrorCode::BadParams, "unknown boundary " + s);
}

}  // namespace detail

inline Json to_json(const ViewSpec& v) {
  Json j;
  j["source_shape"] = v.source_shape;
  j["p_shape"] = v.p_shape;
  j["a_shape"] = v.a_shape;
  j["terms"] = Json::array();
  for (const ViewTerm& t : v.terms)
    j["terms"].push_back({{"component", t.component},
                          {"axis", t.axis},
                          {"stride", t.stride},
                          {"offset", t.offset}});
  j["boundary"] = detail::boundary_name(v.boundary);
  return j;
}

inline ViewSpec view_from_json(const Json& j) {
  ViewSpec v;
  v.source_shape = j.at("source_shape").get<Shape>();
  v.p_shape = j.at("p_shape").get<Shape>();
  v.a_shape = j.at("a_shape").get<Shape>();
  for (const Json& t : j.at("terms"))
    v.terms.push_back({t.at("component").get<int>(), t.at("axis").get<int>(),
                       t.at("stride").get<int64_t>(),
                       t.at("offset").get<int64_t>()});
  if (j.contains("boundary"))
    v.boundary = detail::boundary_from_name(j.at("boundary").get<std::string>());
  return v;
}

inline Json to_json(const StrategyProgram& p) {
  Json j;
  j["depth"] = p.depth;
  j["segments"] = Json::array();
  for (const auto& seg : p.segments) {
    Json js = Json::array();
    for (const AluInstr& in : seg)
      js.push_back({{"op", detail::op_name(in.op)},
                    {"dst", detail::dst_str(in.dst)},
                    {"a", detail::operand_str(in.a)},
                    {"b", detail::operand_str(in.b)},
                    {"c", detail::operand_str(in.c)},
                    {"shift", in.shift},
                    {"aux", in.aux}});
    j["segments"].push_back(js);
  }
  j["constants"] = p.constants;
  j["tables"] = Json::array();
  for (const LookupTable& t : p.tables)
    j["tables"].push_back({{"lo", t.lo},
                           {"hi", t.hi},
                           {"samples", t.samples},
                           {"clamp", t.clamp}});
  j["outputs"] = p.outputs;
  return j;
}

inline StrategyProgram program_from_json(const Json& j) {
  StrategyProgram p;
  p.depth = j.at("depth").get<int>();
  for (const Json& seg : j.at("segments")) {
    std::vector<AluInstr> instrs;
    for (const Json& in : seg)
      instrs.push_back({detail::op_from_name(in.at("op").get<std::string>()),
                        detail::dst_from_str(in.at("dst").get<std::string>()),
                        detail::operand_from_str(in.at("a").get<std::string>()),
                        detail::operand_from_str(in.at("b").get<std::string>()),
                        detail::operand_from_str(in.at("c").get<std::string>()),
                        in.value("shift", 0), in.value("aux", 0)});
    p.segments.push_back(std::move(instrs));
  }
  if (j.contains("constants"))
    p.constants = j.at("constants").get<std::vector<double>>();
  if (j.contains("tables"))
    for (const Json& t : j.at("tables"))
      p.tables.push_back({t.at("lo").get<double>(), t.at("hi").get<double>(),
                          t.at("samples").get<std::vector<double>>(),
                          t.value("clamp", true)});
  p.outputs = j.value("outputs", 1);
  p.validate();
  return p;
}

inline Json to_json(const TrafficReport& r) {
  Json j;
  j["dram_read_words_a"] = r.dram_read_words_a;
  j["dram_read_words_b"] = r.dram_read_words_b;
  j["dram_write_words"] = r.dram_write_words;
  j["scratchpad_peak_words_a"] = r.scratchpad_peak_words_a;
  j["scratchpad_peak_words_b"] = r.scratchpad_peak_words_b;
  j["passes"] = r.passes;
  j["macs"] = r.macs;
  return j;
}

}  // namespace merit
