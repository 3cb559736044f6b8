#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "merit/tensor.hpp"

namespace merit {

enum class Op {
  ADD,   // a + ((b + c) >> s)
  SUB,   // a + ((b - c) >> s)
  L1,    // a + (|b - c| >> s)
  MAC,   // a + ((b * c) >> s)
  MAX,   // max(a, b)
  MIN,   // min(a, b)
  SEL,   // a ? b : c
  BAND,  // a & b
  BOR,   // a | b
  BXOR,  // a ^ b
  BNOT,  // ~a
  IDX,   // current k component aux
  LUT,   // table[aux] lookup of a, linear interpolation
  MOVC,  // constants[aux]
  DIV,   // a / b, REAL32 mode only
};

struct Operand {
  enum class Kind { Reg, PortA, PortB, Zero } kind = Kind::Zero;
  int reg = 0;

  static Operand r(int id) { return {Kind::Reg, id}; }
  static Operand a() { return {Kind::PortA, 0}; }
  static Operand b() { return {Kind::PortB, 0}; }
  static Operand zero() { return {Kind::Zero, 0}; }
};

struct Dst {
  bool out = false;  // emit to the output stream instead of a register
  int reg = 0;

  static Dst r(int id) { return {false, id}; }
  static Dst emit() { return {true, 0}; }
};

struct AluInstr {
  Op op;
  Dst dst;
  Operand a, b, c;
  int shift = 0;
  int aux = 0;
};

/// Lookup table with uniformly spaced samples over [lo, hi] and linear
/// interpolation. Non-clamping tables raise LUT_RANGE outside the domain.
struct LookupTable {
  double lo = 0, hi = 1;
  std::vector<double> samples;
  bool clamp = true;

  double lookup(double x) const {
    if (x < lo || x > hi) {
      if (!clamp) throw Error(ErrorCode::LutRange, "lookup outside table range");
      x = std::clamp(x, lo, hi);
    }
    if (samples.size() == 1) return samples[0];
    double t = (x - lo) / (hi - lo) * static_cast<double>(samples.size() - 1);
    auto i = static_cast<size_t>(t);
    if (i >= samples.size() - 1) return samples.back();
    double f = t - static_cast<double>(i);
    return samples[i] * (1.0 - f) + samples[i + 1] * f;
  }
};

/// A ranged inner-product program: 2D+1 phase segments executed over a
/// flattened D-level accumulation loop nest.
///
/// Segment order: Pre_1 .. Pre_D, Body, Post_D .. Post_1, so segment
/// index D is the Body and index 2D is Post_1.
struct StrategyProgram {
  int depth = 1;
  std::vector<std::vector<AluInstr>> segments;
  std::vector<double> constants;
  std::vector<LookupTable> tables;
  int outputs = 1;

  int body() const { return depth; }
  int pre(int level) const { return level - 1; }        // level 1..D
  int post(int level) const { return 2 * depth + 1 - level; }

  void validate() const {
    if (segments.size() != static_cast<size_t>(2 * depth + 1))
      throw Error(ErrorCode::BadParams, "program needs 2*depth+1 segments");
    for (const auto& seg : segments)
      for (const AluInstr& in : seg) {
        if (!in.dst.out && (in.dst.reg < 0 || in.dst.reg >= 16))
          throw Error(ErrorCode::BadParams, "register id must be < 16");
        if (in.shift < 0 || in.shift > 15)
          throw Error(ErrorCode::BadParams, "shift must be 0..15");
      }
  }
};

/// Segment range executed at accumulation index k: the largest run of
/// trailing zero components selects the first Pre level, the largest run
/// of trailing maxed components selects the last Post level.
inline std::pair<int, int> phase_range(const Shape& a_shape, const Index& k) {
  int d = static_cast<int>(a_shape.size());
  if (k.size() != a_shape.size())
    throw Error(ErrorCode::OutOfRange, "phase index rank mismatch");
  for (int i = 0; i < d; ++i)
    if (k[i] < 0 || k[i] >= a_shape[i])
      throw Error(ErrorCode::OutOfRange, "phase index out of range");
  int zeros = 0;
  while (zeros < d && k[d - 1 - zeros] == 0) ++zeros;
  int maxed = 0;
  while (maxed < d && k[d - 1 - maxed] == a_shape[d - 1 - maxed] - 1) ++maxed;
  int first = zeros > 0 ? d - zeros : d;      // Pre_{D-m+1} has index D-m
  int last = maxed > 0 ? d + maxed : d;       // Post_{D-M+1} has index D+M
  return {first, last};
}

// Scalar evaluation modes. Real32 runs on float with >>s meaning *2^-s;
// Fix16 runs on saturated 16-bit values with 32-bit intermediates.
struct Real32Mode {
  using value = float;
  using wide = double;
  static value shift(double v, int s) {
    return static_cast<value>(std::ldexp(v, -s));
  }
  static value store(double v) { return static_cast<value>(v); }
  static int64_t bits(value v) { return static_cast<int64_t>(std::llround(v)); }
  static value from_bits(int64_t v) { return static_cast<value>(v); }
  static value from_table(double v) { return static_cast<value>(v); }
  static double to_table(value v) { return v; }
  static constexpr bool allows_div = true;
};

struct Fix16Mode {
  using value = int32_t;
  using wide = int64_t;
  static value shift(int64_t v, int s) {
    return static_cast<value>(v >> s);  // arithmetic, rounds toward -inf
  }
  static value store(int64_t v) { return sat16(v); }
  static int64_t bits(value v) { return v; }
  static value from_bits(int64_t v) { return sat16(v); }
  static value from_table(double v) {
    return sat16(static_cast<int64_t>(std::llround(v)));
  }
  static double to_table(value v) { return static_cast<double>(v); }
  static constexpr bool allows_div = false;
};

template <class Mode>
typename Mode::value alu_op(Op op, typename Mode::value a,
                            typename Mode::value b, typename Mode::value c,
                            int s) {
  using V = typename Mode::value;
  using W = typename Mode::wide;
  switch (op) {
    case Op::ADD:
      return Mode::store(a + Mode::shift(static_cast<W>(b) + c, s));
    case Op::SUB:
      return Mode::store(a + Mode::shift(static_cast<W>(b) - c, s));
    case Op::L1:
      return Mode::store(a + Mode::shift(std::abs(static_cast<W>(b) - c), s));
    case Op::MAC:
      return Mode::store(a + Mode::shift(static_cast<W>(b) * c, s));
    case Op::MAX:
      return Mode::store(std::max(a, b));
    case Op::MIN:
      return Mode::store(std::min(a, b));
    case Op::SEL:
      return a != V(0) ? b : c;
    case Op::BAND:
      return Mode::from_bits(Mode::bits(a) & Mode::bits(b));
    case Op::BOR:
      return Mode::from_bits(Mode::bits(a) | Mode::bits(b));
    case Op::BXOR:
      return Mode::from_bits(Mode::bits(a) ^ Mode::bits(b));
    case Op::BNOT:
      return Mode::from_bits(~Mode::bits(a));
    case Op::DIV:
      if constexpr (Mode::allows_div) {
        if (b == V(0)) throw Error(ErrorCode::DivByZero, "DIV by zero");
        return Mode::store(static_cast<double>(a) / static_cast<double>(b));
      } else {
        throw Error(ErrorCode::BadParams,
                    "DIV is REAL32-only; use a reciprocal LUT in FIX16 mode");
      }
    default:
      throw Error(ErrorCode::BadParams, "op needs execution context");
  }
}

inline float alu_op_real(Op op, float a, float b, float c, int s) {
  return alu_op<Real32Mode>(op, a, b, c, s);
}
inline int32_t alu_op_fix(Op op, int32_t a, int32_t b, int32_t c, int s) {
  return alu_op<Fix16Mode>(op, a, b, c, s);
}

/// Per-row execution state: a private register file plus emitted outputs.
template <class Mode>
class RipState {
 public:
  using value = typename Mode::value;

  explicit RipState(const StrategyProgram& prog) : prog_(&prog) {
    regs_.fill(value(0));
  }

  /// Execute segments [first, last] at concatenated index k (needed by
  /// IDX) with the two input ports.
  void exec(int first, int last, const Index& k, value port_a, value port_b) {
    for (int seg = first; seg <= last; ++seg)
      for (const AluInstr& in : prog_->segments[seg])
        exec_instr(in, k, port_a, port_b);
  }

  const std::vector<value>& outputs() const { return out_; }

 private:
  value read(const Operand& o, value pa, value pb) const {
    switch (o.kind) {
      case Operand::Kind::Reg: return regs_[o.reg];
      case Operand::Kind::PortA: return pa;
      case Operand::Kind::PortB: return pb;
      case Operand::Kind::Zero: return value(0);
    }
    return value(0);
  }

  void exec_instr(const AluInstr& in, const Index& k, value pa, value pb) {
    value a = read(in.a, pa, pb);
    value b = read(in.b, pa, pb);
    value c = read(in.c, pa, pb);
    value r;
    switch (in.op) {
      case Op::IDX:
        r = Mode::from_bits(k.at(in.aux));
        break;
      case Op::LUT:
        r = Mode::from_table(prog_->tables.at(in.aux).lookup(Mode::to_table(a)));
        break;
      case Op::MOVC:
        r = Mode::from_table(prog_->constants.at(in.aux));
        break;
      default:
        r = alu_op<Mode>(in.op, a, b, c, in.shift);
    }
    if (in.dst.out)
      out_.push_back(r);
    else
      regs_[in.dst.reg] = r;
  }

  const StrategyProgram* prog_;
  std::array<value, 16> regs_;
  std::vector<value> out_;
};

/// Standalone ranged inner-product over one accumulation range: iterates
/// k over a_shape in row-major order, feeding ports from the callbacks.
template <class Mode>
std::vector<typename Mode::value> rip_execute(
    const StrategyProgram& prog, const Shape& a_shape,
    const std::function<typename Mode::value(const Index&)>& feed_a,
    const std::function<typename Mode::value(const Index&)>& feed_b) {
  if (prog.depth != static_cast<int>(a_shape.size()))
    throw Error(ErrorCode::BadParams, "program depth must match |a_shape|");
  prog.validate();
  RipState<Mode> st(prog);
  Index k(a_shape.size(), 0);
  do {
    auto [first, last] = phase_range(a_shape, k);
    st.exec(first, last, k, feed_a(k), feed_b(k));
  } while (next_index(k, a_shape));
  return st.outputs();
}

inline std::vector<float> rip_execute_real(
    const StrategyProgram& prog, const Shape& a_shape,
    const std::function<float(const Index&)>& fa,
    const std::function<float(const Index&)>& fb) {
  return rip_execute<Real32Mode>(prog, a_shape, fa, fb);
}

}  // namespace merit
