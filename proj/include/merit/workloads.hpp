#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "merit/engine.hpp"

namespace merit {

using Params = std::map<std::string, double>;

namespace detail {

inline double param(const Params& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

inline int64_t iparam(const Params& p, const std::string& key, int64_t def) {
  double v = param(p, key, static_cast<double>(def));
  auto i = static_cast<int64_t>(v);
  if (static_cast<double>(i) != v)
    throw Error(ErrorCode::BadParams, key + " must be an integer");
  return i;
}

inline int64_t iparam_pos(const Params& p, const std::string& key,
                          int64_t def) {
  int64_t v = iparam(p, key, def);
  if (v < 1) throw Error(ErrorCode::BadParams, key + " must be positive");
  return v;
}

inline bool fix_mode(const Params& p) {
  return iparam(p, "fix", 0) != 0;
}

inline Tensor make_src(const Shape& shape, bool fix, int frac) {
  return fix ? Tensor::fix(shape, frac) : Tensor::real(shape);
}

// Reduce-with-MAC program: clear r0 at Pre_1, r0 += (a*b)>>shift in the
// body, emit r0 at Post_1.
inline StrategyProgram mac_program(int depth, int shift) {
  StrategyProgram prog;
  prog.depth = depth;
  prog.segments.assign(2 * depth + 1, {});
  prog.segments[prog.pre(1)].push_back(
      {Op::ADD, Dst::r(0), Operand::zero(), Operand::zero(), Operand::zero(),
       0, 0});
  prog.segments[prog.body()].push_back(
      {Op::MAC, Dst::r(0), Operand::r(0), Operand::a(), Operand::b(), shift,
       0});
  prog.segments[prog.post(1)].push_back(
      {Op::ADD, Dst::emit(), Operand::r(0), Operand::zero(), Operand::zero(),
       0, 0});
  return prog;
}

// Same skeleton with the L1 distance as the product function.
inline StrategyProgram sad_program(int depth) {
  StrategyProgram prog = mac_program(depth, 0);
  prog.segments[prog.body()][0].op = Op::L1;
  return prog;
}

}  // namespace detail

/// Deterministic 64-bit mix (splitmix64); used so that generated inputs
/// are identical across platforms and standard libraries.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
};

inline void fill_random(Tensor& t, uint64_t seed, double lo = -1.0,
                        double hi = 1.0) {
  SplitMix64 rng(seed);
  if (t.dtype == Dtype::Real32) {
    for (auto& v : t.fdata) v = static_cast<float>(rng.uniform(lo, hi));
  } else {
    for (auto& v : t.qdata)
      v = static_cast<int16_t>(rng.range(-256, 256));
  }
}

// Templates whose two views read the same source tensor (port B is a
// broadcast of port A's image); harnesses must mirror src_a into src_b.
inline bool template_shares_input(const std::string& name) {
  return name == "bilateral";
}

inline std::vector<std::string> template_names() {
  return {"gemm",        "conv2d",   "dilated",           "alexnet_conv1",
          "correlation", "bilateral", "motion_estimation", "maxpool",
          "relu_fused_conv"};
}

namespace detail {

// gemm(m,n,k): C[i,j] = sum_t A[i,t] * B[t,j]; p=(m,n), a=(k).
inline Workload build_gemm(const Params& prm) {
  int64_t m = iparam_pos(prm, "m", 8);
  int64_t n = iparam_pos(prm, "n", 8);
  int64_t k = iparam_pos(prm, "k", 8);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));

  Workload w;
  w.view_a = {{m, k}, {m, n}, {k}, {{0, 0, 1, 0}, {2, 1, 1, 0}}};
  w.view_b = {{k, n}, {m, n}, {k}, {{2, 0, 1, 0}, {1, 1, 1, 0}}};
  w.src_a = make_src({m, k}, fix, frac);
  w.src_b = make_src({k, n}, fix, frac);
  w.program = mac_program(1, fix ? frac : 0);
  return w;
}

struct ConvGeom {
  int64_t cin, cout, h, wd, k, stride, dilation, pad, ho, wo;
};

inline ConvGeom conv_geom(const Params& prm, int64_t def_dilation,
                          bool def_pad_same) {
  ConvGeom g;
  g.cin = iparam_pos(prm, "cin", 1);
  g.cout = iparam_pos(prm, "cout", 1);
  g.h = iparam_pos(prm, "h", 32);
  g.wd = iparam_pos(prm, "w", 32);
  g.k = iparam_pos(prm, "k", 3);
  g.stride = iparam_pos(prm, "stride", 1);
  g.dilation = iparam_pos(prm, "dilation", def_dilation);
  g.pad = iparam(prm, "pad",
                 def_pad_same ? ((g.k - 1) * g.dilation) / 2 : 0);
  int64_t span = (g.k - 1) * g.dilation + 1;
  g.ho = (g.h + 2 * g.pad - span) / g.stride + 1;
  g.wo = (g.wd + 2 * g.pad - span) / g.stride + 1;
  if (g.ho < 1 || g.wo < 1)
    throw Error(ErrorCode::BadParams, "kernel larger than padded image");
  return g;
}

// conv2d: the single-channel case lowers to 2D views (p=(ho,wo),
// a=(k,k)); with channels p=(cout,ho,wo), a=(cin,k,k).
inline Workload build_conv2d(const ConvGeom& g, bool fix, int frac,
                             bool fuse_relu) {
  Workload w;
  if (g.cin == 1 && g.cout == 1) {
    w.view_a = {{g.h, g.wd},
                {g.ho, g.wo},
                {g.k, g.k},
                {{0, 0, g.stride, 0},
                 {2, 0, g.dilation, -g.pad},
                 {1, 1, g.stride, 0},
                 {3, 1, g.dilation, -g.pad}}};
    w.view_b = {{g.k, g.k}, {g.ho, g.wo}, {g.k, g.k},
                {{2, 0, 1, 0}, {3, 1, 1, 0}}};
    w.src_a = make_src({g.h, g.wd}, fix, frac);
    w.src_b = make_src({g.k, g.k}, fix, frac);
    w.program = mac_program(2, fix ? frac : 0);
  } else {
    w.view_a = {{g.cin, g.h, g.wd},
                {g.cout, g.ho, g.wo},
                {g.cin, g.k, g.k},
                {{3, 0, 1, 0},
                 {1, 1, g.stride, 0},
                 {4, 1, g.dilation, -g.pad},
                 {2, 2, g.stride, 0},
                 {5, 2, g.dilation, -g.pad}}};
    w.view_b = {{g.cout, g.cin, g.k, g.k},
                {g.cout, g.ho, g.wo},
                {g.cin, g.k, g.k},
                {{0, 0, 1, 0}, {3, 1, 1, 0}, {4, 2, 1, 0}, {5, 3, 1, 0}}};
    w.src_a = make_src({g.cin, g.h, g.wd}, fix, frac);
    w.src_b = make_src({g.cout, g.cin, g.k, g.k}, fix, frac);
    w.program = mac_program(3, fix ? frac : 0);
  }
  if (fuse_relu) {
    auto& post1 = w.program.segments[w.program.post(1)];
    post1.clear();
    post1.push_back({Op::MAX, Dst::emit(), Operand::r(0), Operand::zero(),
                     Operand::zero(), 0, 0});
  }
  return w;
}

// First conv layer of the classic 8-layer image classifier, one group:
// viewA maps (p1,p2,p3,a1,a2,a3) to I[a1, 4*p2+a2-5, 4*p3+a3-5].
inline Workload build_alexnet_conv1(const Params& prm) {
  int64_t h = iparam_pos(prm, "h", 227);
  int64_t wd = iparam_pos(prm, "w", 227);
  Workload w;
  w.view_a = {{3, h, wd},
              {48, 55, 55},
              {3, 11, 11},
              {{3, 0, 1, 0},
               {1, 1, 4, 0},
               {4, 1, 1, -5},
               {2, 2, 4, 0},
               {5, 2, 1, -5}}};
  w.view_b = {{48, 3, 11, 11},
              {48, 55, 55},
              {3, 11, 11},
              {{0, 0, 1, 0}, {3, 1, 1, 0}, {4, 2, 1, 0}, {5, 3, 1, 0}}};
  w.src_a = Tensor::real({3, h, wd});
  w.src_b = Tensor::real({48, 3, 11, 11});
  w.program = mac_program(3, 0);
  return w;
}

// Correlation layer: out[p1,p2,p3,p4] = sum_a1 I1[a1,p1,p2] *
// I2[a1,p1+p3,p2+p4]; (p3,p4) is the displacement, D=1.
inline Workload build_correlation(const Params& prm) {
  int64_t c = iparam_pos(prm, "c", 3);
  int64_t h = iparam_pos(prm, "h", 8);
  int64_t wd = iparam_pos(prm, "w", 8);
  int64_t d = iparam_pos(prm, "d", 3);
  Workload w;
  w.view_a = {{c, h, wd},
              {h, wd, d, d},
              {c},
              {{4, 0, 1, 0}, {0, 1, 1, 0}, {1, 2, 1, 0}}};
  w.view_b = {{c, h, wd},
              {h, wd, d, d},
              {c},
              {{4, 0, 1, 0}, {0, 1, 1, 0}, {2, 1, 1, 0},
               {1, 2, 1, 0}, {3, 2, 1, 0}}};
  w.src_a = Tensor::real({c, h, wd});
  w.src_b = Tensor::real({c, h, wd});
  w.program = mac_program(1, 0);
  return w;
}

// Block motion estimation: SAD of each blk*blk block of the current
// frame against the reference frame displaced by (p3,p4) - win/2.
inline Workload build_motion_estimation(const Params& prm) {
  int64_t h = iparam_pos(prm, "h", 16);
  int64_t wd = iparam_pos(prm, "w", 16);
  int64_t blk = iparam_pos(prm, "blk", 4);
  int64_t win = iparam_pos(prm, "win", 3);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  if (h % blk || wd % blk)
    throw Error(ErrorCode::BadParams, "frame extents must be block multiples");
  int64_t by = h / blk, bx = wd / blk;
  Workload w;
  w.view_a = {{h, wd},
              {by, bx, win, win},
              {blk, blk},
              {{0, 0, blk, 0}, {4, 0, 1, 0}, {1, 1, blk, 0}, {5, 1, 1, 0}}};
  w.view_b = {{h, wd},
              {by, bx, win, win},
              {blk, blk},
              {{0, 0, blk, 0}, {2, 0, 1, -win / 2}, {4, 0, 1, 0},
               {1, 1, blk, 0}, {3, 1, 1, -win / 2}, {5, 1, 1, 0}}};
  w.src_a = make_src({h, wd}, fix, frac);
  w.src_b = make_src({h, wd}, fix, frac);
  w.program = sad_program(2);
  return w;
}

// Bilateral filter. Port A scans the window (clamped at borders), port B
// broadcasts the center pixel; spatial Gaussian weights are precomputed
// tables indexed by the window coordinates, the range weight is a
// 256-entry table over the centered intensity difference.
inline Workload build_bilateral(const Params& prm) {
  if (fix_mode(prm))
    throw Error(ErrorCode::BadParams, "bilateral is REAL32-only (uses DIV)");
  int64_t h = iparam_pos(prm, "h", 16);
  int64_t wd = iparam_pos(prm, "w", 16);
  int64_t k = iparam_pos(prm, "k", 5);
  double sigma_r = param(prm, "sigma_r", 0.5);
  double sigma_s = param(prm, "sigma_s", static_cast<double>(k) / 3.0);
  double range = param(prm, "range", 2.0);  // intensity span, LUT domain
  if (sigma_r <= 0 || sigma_s <= 0 || range <= 0)
    throw Error(ErrorCode::BadParams, "sigmas and range must be positive");

  Workload w;
  w.view_a = {{h, wd},
              {h, wd},
              {k, k},
              {{0, 0, 1, 0}, {2, 0, 1, -k / 2}, {1, 1, 1, 0},
               {3, 1, 1, -k / 2}},
              Boundary::Clamp};
  w.view_b = {{h, wd}, {h, wd}, {k, k}, {{0, 0, 1, 0}, {1, 1, 1, 0}}};
  w.src_a = Tensor::real({h, wd});
  w.src_b = Tensor::real({h, wd});

  LookupTable range_lut{-range, range, {}, true};
  range_lut.samples.resize(256);
  for (int i = 0; i < 256; ++i) {
    double d = -range + 2.0 * range * i / 255.0;
    range_lut.samples[i] = std::exp(-d * d / (2.0 * sigma_r * sigma_r));
  }
  LookupTable space_lut{0.0, static_cast<double>(k - 1), {}, true};
  space_lut.samples.resize(static_cast<size_t>(k));
  for (int64_t i = 0; i < k; ++i) {
    double d = static_cast<double>(i - k / 2);
    space_lut.samples[static_cast<size_t>(i)] =
        std::exp(-d * d / (2.0 * sigma_s * sigma_s));
  }

  StrategyProgram prog;
  prog.depth = 2;
  prog.segments.assign(5, {});
  prog.tables = {range_lut, space_lut};
  auto z = Operand::zero();
  // r0 = wsum, r1 = wxsum
  prog.segments[prog.pre(1)] = {
      {Op::ADD, Dst::r(0), z, z, z, 0, 0},
      {Op::ADD, Dst::r(1), z, z, z, 0, 0},
  };
  prog.segments[prog.body()] = {
      {Op::SUB, Dst::r(2), z, Operand::b(), Operand::a(), 0, 0},  // d
      {Op::LUT, Dst::r(3), Operand::r(2), z, z, 0, 0},            // w_range
      {Op::IDX, Dst::r(4), z, z, z, 0, 2},                        // a1
      {Op::LUT, Dst::r(4), Operand::r(4), z, z, 0, 1},            // w_row
      {Op::IDX, Dst::r(5), z, z, z, 0, 3},                        // a2
      {Op::LUT, Dst::r(5), Operand::r(5), z, z, 0, 1},            // w_col
      {Op::MAC, Dst::r(6), z, Operand::r(3), Operand::r(4), 0, 0},
      {Op::MAC, Dst::r(6), z, Operand::r(6), Operand::r(5), 0, 0},
      {Op::ADD, Dst::r(0), Operand::r(0), Operand::r(6), z, 0, 0},
      {Op::MAC, Dst::r(1), Operand::r(1), Operand::r(6), Operand::a(), 0, 0},
  };
  prog.segments[prog.post(1)] = {
      {Op::DIV, Dst::emit(), Operand::r(1), Operand::r(0), z, 0, 0},
  };
  w.program = prog;
  return w;
}

// Max pooling; windows stay inside the image (REJECT boundary proves
// it). Port B broadcasts a dummy scalar.
inline Workload build_maxpool(const Params& prm) {
  int64_t h = iparam_pos(prm, "h", 8);
  int64_t wd = iparam_pos(prm, "w", 8);
  int64_t k = iparam_pos(prm, "k", 2);
  int64_t stride = iparam_pos(prm, "stride", k);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  if (h < k || wd < k)
    throw Error(ErrorCode::BadParams, "window larger than image");
  int64_t ho = (h - k) / stride + 1;
  int64_t wo = (wd - k) / stride + 1;

  Workload w;
  w.view_a = {{h, wd},
              {ho, wo},
              {k, k},
              {{0, 0, stride, 0}, {2, 0, 1, 0}, {1, 1, stride, 0},
               {3, 1, 1, 0}},
              Boundary::Reject};
  w.view_b = {{1}, {ho, wo}, {k, k}, {}};
  w.src_a = make_src({h, wd}, fix, frac);
  w.src_b = make_src({1}, fix, frac);

  StrategyProgram prog;
  prog.depth = 2;
  prog.segments.assign(5, {});
  prog.constants = {fix ? -32768.0 : -3.0e38};
  auto z = Operand::zero();
  prog.segments[prog.pre(1)] = {{Op::MOVC, Dst::r(0), z, z, z, 0, 0}};
  prog.segments[prog.body()] = {
      {Op::MAX, Dst::r(0), Operand::r(0), Operand::a(), z, 0, 0}};
  prog.segments[prog.post(1)] = {{Op::ADD, Dst::emit(), Operand::r(0), z, z, 0, 0}};
  w.program = prog;
  return w;
}

}  // namespace detail

inline Workload build_template(const std::string& name, const Params& prm) {
  using namespace detail;
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  if (name == "gemm") return build_gemm(prm);
  if (name == "conv2d") return build_conv2d(conv_geom(prm, 1, true), fix, frac, false);
  if (name == "dilated") return build_conv2d(conv_geom(prm, 2, false), fix, frac, false);
  if (name == "relu_fused_conv")
    return build_conv2d(conv_geom(prm, 1, true), fix, frac, true);
  if (name == "alexnet_conv1") return build_alexnet_conv1(prm);
  if (name == "correlation") return build_correlation(prm);
  if (name == "motion_estimation") return build_motion_estimation(prm);
  if (name == "bilateral") return build_bilateral(prm);
  if (name == "maxpool") return build_maxpool(prm);
  throw Error(ErrorCode::UnknownTemplate, "unknown template " + name);
}

// ---------------------------------------------------------------------------
// Brute-force oracles. Written with plain nested loops and explicit index
// arithmetic only; no view or program machinery.

namespace detail {

inline double oval(const Tensor& t, int64_t flat) {
  return t.dtype == Dtype::Real32 ? t.fdata[flat]
                                  : static_cast<double>(t.qdata[flat]);
}

// Matches the fixed-point writeback chain: 32-bit product, arithmetic
// shift, saturation after every accumulation step.
struct FixAcc {
  int32_t acc = 0;
  void mac(int64_t a, int64_t b, int s) {
    acc = sat16(static_cast<int64_t>(acc) +
                static_cast<int32_t>((a * b) >> s));
  }
  void l1(int64_t a, int64_t b) {
    acc = sat16(static_cast<int64_t>(acc) +
                static_cast<int32_t>(std::abs(a - b)));
  }
};

inline Tensor oracle_gemm(const Params& prm, const Tensor& A,
                          const Tensor& B) {
  int64_t m = iparam_pos(prm, "m", 8);
  int64_t n = iparam_pos(prm, "n", 8);
  int64_t k = iparam_pos(prm, "k", 8);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  Tensor out = fix ? Tensor::fix({m, n}, frac) : Tensor::real({m, n});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      if (fix) {
        FixAcc acc;
        for (int64_t t = 0; t < k; ++t)
          acc.mac(A.qdata[i * k + t], B.qdata[t * n + j], frac);
        out.qdata[i * n + j] = sat16(acc.acc);
      } else {
        double s = 0;
        for (int64_t t = 0; t < k; ++t)
          s += static_cast<double>(A.fdata[i * k + t]) * B.fdata[t * n + j];
        out.fdata[i * n + j] = static_cast<float>(s);
      }
    }
  return out;
}

inline Tensor oracle_conv2d(const ConvGeom& g, bool fix, int frac,
                            bool relu, const Tensor& I, const Tensor& K) {
  bool flat2d = g.cin == 1 && g.cout == 1;
  Shape os = flat2d ? Shape{g.ho, g.wo} : Shape{g.cout, g.ho, g.wo};
  Tensor out = fix ? Tensor::fix(os, frac) : Tensor::real(os);
  int64_t flat = 0;
  for (int64_t co = 0; co < g.cout; ++co)
    for (int64_t y = 0; y < g.ho; ++y)
      for (int64_t x = 0; x < g.wo; ++x, ++flat) {
        double s = 0;
        FixAcc acc;
        for (int64_t ci = 0; ci < g.cin; ++ci)
          for (int64_t dy = 0; dy < g.k; ++dy)
            for (int64_t dx = 0; dx < g.k; ++dx) {
              int64_t sy = y * g.stride + dy * g.dilation - g.pad;
              int64_t sx = x * g.stride + dx * g.dilation - g.pad;
              double iv = 0;
              int64_t iq = 0;
              if (sy >= 0 && sy < g.h && sx >= 0 && sx < g.wd) {
                int64_t si = (ci * g.h + sy) * g.wd + sx;
                if (fix)
                  iq = I.qdata[si];
                else
                  iv = I.fdata[si];
              }
              int64_t ki = ((co * g.cin + ci) * g.k + dy) * g.k + dx;
              if (fix)
                acc.mac(iq, K.qdata[ki], frac);
              else
                s += iv * static_cast<double>(K.fdata[ki]);
            }
        if (fix) {
          int32_t v = acc.acc;
          if (relu) v = std::max(v, 0);
          out.qdata[flat] = sat16(v);
        } else {
          if (relu) s = std::max(s, 0.0);
          out.fdata[flat] = static_cast<float>(s);
        }
      }
  return out;
}

inline Tensor oracle_alexnet_conv1(const Params& prm, const Tensor& I,
                                   const Tensor& K) {
  int64_t h = iparam_pos(prm, "h", 227);
  int64_t wd = iparam_pos(prm, "w", 227);
  Tensor out = Tensor::real({48, 55, 55});
  int64_t flat = 0;
  for (int64_t co = 0; co < 48; ++co)
    for (int64_t y = 0; y < 55; ++y)
      for (int64_t x = 0; x < 55; ++x, ++flat) {
        double s = 0;
        for (int64_t ci = 0; ci < 3; ++ci)
          for (int64_t dy = 0; dy < 11; ++dy)
            for (int64_t dx = 0; dx < 11; ++dx) {
              int64_t sy = 4 * y + dy - 5;
              int64_t sx = 4 * x + dx - 5;
              if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
              s += static_cast<double>(I.fdata[(ci * h + sy) * wd + sx]) *
                   K.fdata[((co * 3 + ci) * 11 + dy) * 11 + dx];
            }
        out.fdata[flat] = static_cast<float>(s);
      }
  return out;
}

inline Tensor oracle_correlation(const Params& prm, const Tensor& I1,
                                 const Tensor& I2) {
  int64_t c = iparam_pos(prm, "c", 3);
  int64_t h = iparam_pos(prm, "h", 8);
  int64_t wd = iparam_pos(prm, "w", 8);
  int64_t d = iparam_pos(prm, "d", 3);
  Tensor out = Tensor::real({h, wd, d, d});
  int64_t flat = 0;
  for (int64_t p1 = 0; p1 < h; ++p1)
    for (int64_t p2 = 0; p2 < wd; ++p2)
      for (int64_t p3 = 0; p3 < d; ++p3)
        for (int64_t p4 = 0; p4 < d; ++p4, ++flat) {
          double s = 0;
          int64_t y = p1 + p3, x = p2 + p4;
          if (y < h && x < wd)
            for (int64_t a = 0; a < c; ++a)
              s += static_cast<double>(I1.fdata[(a * h + p1) * wd + p2]) *
                   I2.fdata[(a * h + y) * wd + x];
          out.fdata[flat] = static_cast<float>(s);
        }
  return out;
}

inline Tensor oracle_motion_estimation(const Params& prm, const Tensor& cur,
                                       const Tensor& ref) {
  int64_t h = iparam_pos(prm, "h", 16);
  int64_t wd = iparam_pos(prm, "w", 16);
  int64_t blk = iparam_pos(prm, "blk", 4);
  int64_t win = iparam_pos(prm, "win", 3);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  int64_t by = h / blk, bx = wd / blk;
  Shape os{by, bx, win, win};
  Tensor out = fix ? Tensor::fix(os, frac) : Tensor::real(os);
  int64_t flat = 0;
  for (int64_t y = 0; y < by; ++y)
    for (int64_t x = 0; x < bx; ++x)
      for (int64_t dy = 0; dy < win; ++dy)
        for (int64_t dx = 0; dx < win; ++dx, ++flat) {
          double s = 0;
          FixAcc acc;
          for (int64_t i = 0; i < blk; ++i)
            for (int64_t j = 0; j < blk; ++j) {
              int64_t cy = y * blk + i, cx = x * blk + j;
              int64_t ry = cy + dy - win / 2, rx = cx + dx - win / 2;
              bool in = ry >= 0 && ry < h && rx >= 0 && rx < wd;
              if (fix) {
                int64_t rv = in ? ref.qdata[ry * wd + rx] : 0;
                acc.l1(cur.qdata[cy * wd + cx], rv);
              } else {
                double rv = in ? ref.fdata[ry * wd + rx] : 0.0;
                s += std::abs(static_cast<double>(cur.fdata[cy * wd + cx]) - rv);
              }
            }
          if (fix)
            out.qdata[flat] = sat16(acc.acc);
          else
            out.fdata[flat] = static_cast<float>(s);
        }
  return out;
}

// Independent linear interpolation; must match LookupTable::lookup.
inline double interp_table(const std::vector<double>& s, double lo, double hi,
                           double x) {
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  if (s.size() == 1) return s[0];
  double t = (x - lo) / (hi - lo) * static_cast<double>(s.size() - 1);
  auto i = static_cast<size_t>(t);
  if (i >= s.size() - 1) return s.back();
  double f = t - static_cast<double>(i);
  return s[i] * (1.0 - f) + s[i + 1] * f;
}

inline Tensor oracle_bilateral(const Params& prm, const Tensor& I,
                               const Tensor&) {
  int64_t h = iparam_pos(prm, "h", 16);
  int64_t wd = iparam_pos(prm, "w", 16);
  int64_t k = iparam_pos(prm, "k", 5);
  double sigma_r = param(prm, "sigma_r", 0.5);
  double sigma_s = param(prm, "sigma_s", static_cast<double>(k) / 3.0);
  double range = param(prm, "range", 2.0);

  std::vector<double> rlut(256), slut(static_cast<size_t>(k));
  for (int i = 0; i < 256; ++i) {
    double d = -range + 2.0 * range * i / 255.0;
    rlut[i] = std::exp(-d * d / (2.0 * sigma_r * sigma_r));
  }
  for (int64_t i = 0; i < k; ++i) {
    double d = static_cast<double>(i - k / 2);
    slut[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * sigma_s * sigma_s));
  }

  Tensor out = Tensor::real({h, wd});
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < wd; ++x) {
      double center = I.fdata[y * wd + x];
      double wsum = 0, wxsum = 0;
      for (int64_t dy = 0; dy < k; ++dy)
        for (int64_t dx = 0; dx < k; ++dx) {
          int64_t sy = std::clamp<int64_t>(y + dy - k / 2, 0, h - 1);
          int64_t sx = std::clamp<int64_t>(x + dx - k / 2, 0, wd - 1);
          double v = I.fdata[sy * wd + sx];
          double w = interp_table(rlut, -range, range, center - v) *
                     interp_table(slut, 0, static_cast<double>(k - 1),
                                  static_cast<double>(dy)) *
                     interp_table(slut, 0, static_cast<double>(k - 1),
                                  static_cast<double>(dx));
          wsum += w;
          wxsum += w * v;
        }
      out.fdata[y * wd + x] = static_cast<float>(wxsum / wsum);
    }
  return out;
}

inline Tensor oracle_maxpool(const Params& prm, const Tensor& I,
                             const Tensor&) {
  int64_t h = iparam_pos(prm, "h", 8);
  int64_t wd = iparam_pos(prm, "w", 8);
  int64_t k = iparam_pos(prm, "k", 2);
  int64_t stride = iparam_pos(prm, "stride", k);
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  int64_t ho = (h - k) / stride + 1;
  int64_t wo = (wd - k) / stride + 1;
  Tensor out = fix ? Tensor::fix({ho, wo}, frac) : Tensor::real({ho, wo});
  for (int64_t y = 0; y < ho; ++y)
    for (int64_t x = 0; x < wo; ++x) {
      double best = -3.0e38;
      int32_t bestq = -32768;
      for (int64_t dy = 0; dy < k; ++dy)
        for (int64_t dx = 0; dx < k; ++dx) {
          int64_t si = (y * stride + dy) * wd + (x * stride + dx);
          if (fix)
            bestq = std::max<int32_t>(bestq, I.qdata[si]);
          else
            best = std::max<double>(best, I.fdata[si]);
        }
      if (fix)
        out.qdata[y * wo + x] = sat16(bestq);
      else
        out.fdata[y * wo + x] = static_cast<float>(best);
    }
  return out;
}

}  // namespace detail

inline Tensor oracle(const std::string& name, const Params& prm,
                     const Tensor& a, const Tensor& b) {
  using namespace detail;
  bool fix = fix_mode(prm);
  int frac = static_cast<int>(iparam(prm, "frac", 8));
  if (name == "gemm") return oracle_gemm(prm, a, b);
  if (name == "conv2d")
    return oracle_conv2d(conv_geom(prm, 1, true), fix, frac, false, a, b);
  if (name == "dilated")
    return oracle_conv2d(conv_geom(prm, 2, false), fix, frac, false, a, b);
  if (name == "relu_fused_conv")
    return oracle_conv2d(conv_geom(prm, 1, true), fix, frac, true, a, b);
  if (name == "alexnet_conv1") return oracle_alexnet_conv1(prm, a, b);
  if (name == "correlation") return oracle_correlation(prm, a, b);
  if (name == "motion_estimation") return oracle_motion_estimation(prm, a, b);
  if (name == "bilateral") return oracle_bilateral(prm, a, b);
  if (name == "maxpool") return oracle_maxpool(prm, a, b);
  throw Error(ErrorCode::UnknownTemplate, "unknown template " + name);
}

}  // namespace merit
