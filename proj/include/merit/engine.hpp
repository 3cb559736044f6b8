#pragma once

#include <cstdint>
#include <type_traits>
#include <utility>
#include <vector>

#include "merit/rip.hpp"
#include "merit/tensor.hpp"
#include "merit/view.hpp"

namespace merit {

/// A full tensor-transform workload: two gather views sharing (p, a)
/// index spaces, their source tensors, and the reduction program.
struct Workload {
  ViewSpec view_a, view_b;
  Tensor src_a, src_b;
  StrategyProgram program;

  const Shape& p_shape() const { return view_a.p_shape; }
  const Shape& a_shape() const { return view_a.a_shape; }

  Shape output_shape() const {
    Shape s = view_a.p_shape;
    if (program.outputs > 1) s.push_back(program.outputs);
    return s;
  }

  void validate() const {
    if (view_a.p_shape != view_b.p_shape || view_a.a_shape != view_b.a_shape)
      throw Error(ErrorCode::BadParams, "views must share p and a shapes");
    if (program.depth != static_cast<int>(view_a.a_shape.size()))
      throw Error(ErrorCode::BadParams, "program depth must match |a|");
    if (src_a.shape != view_a.source_shape || src_b.shape != view_b.source_shape)
      throw Error(ErrorCode::BadParams, "source shape mismatch");
    program.validate();
  }
};

/// Output-stationary tiling: p-tiles outer, a-tiles inner. Only the
/// outermost a dimension may be split so that each output row still sees
/// its accumulation range in global row-major order (the phase segments
/// and the floating-point summation order are then identical to the
/// untiled run).
struct TilingPlan {
  Shape t_p;
  Shape t_a;

  void validate(const Shape& p_shape, const Shape& a_shape) const {
    if (t_p.size() != p_shape.size() || t_a.size() != a_shape.size())
      throw Error(ErrorCode::BadParams, "tile rank mismatch");
    for (size_t i = 0; i < t_p.size(); ++i)
      if (t_p[i] < 1 || t_p[i] > p_shape[i])
        throw Error(ErrorCode::BadParams, "p tile extent out of range");
    for (size_t i = 0; i < t_a.size(); ++i)
      if (t_a[i] < 1 || t_a[i] > a_shape[i])
        throw Error(ErrorCode::BadParams, "a tile extent out of range");
    for (size_t i = 1; i < t_a.size(); ++i)
      if (t_a[i] != a_shape[i])
        throw Error(ErrorCode::BadParams,
                    "only the outermost a dimension may be tiled");
  }

  Shape full_tile() const {
    Shape s = t_p;
    s.insert(s.end(), t_a.begin(), t_a.end());
    return s;
  }
};

struct TrafficReport {
  uint64_t dram_read_words_a = 0;
  uint64_t dram_read_words_b = 0;
  uint64_t dram_write_words = 0;
  uint64_t scratchpad_peak_words_a = 0;
  uint64_t scratchpad_peak_words_b = 0;
  uint64_t passes = 0;
  uint64_t macs = 0;
};

struct EngineConfig {
  // Word capacities of the two read-pipeline scratchpads (16 KB and 8 KB
  // of 16-bit words). Used only for the overflow diagnostic.
  int64_t scratch_words_a = 8192;
  int64_t scratch_words_b = 4096;
};

namespace detail {

// Tensor storage type fed to the ports of each execution mode.
template <class Mode>
struct ModeValue;
template <>
struct ModeValue<Real32Mode> {
  using type = float;
};
template <>
struct ModeValue<Fix16Mode> {
  using type = int16_t;
};

inline Index concat(const Index& p, const Index& a) {
  Index k = p;
  k.insert(k.end(), a.begin(), a.end());
  return k;
}

template <class Mode>
void store_output(Tensor& out, int64_t flat,
                  const std::vector<typename Mode::value>& vals) {
  for (size_t i = 0; i < vals.size(); ++i) {
    if constexpr (std::is_same_v<Mode, Real32Mode>)
      out.fdata[flat * vals.size() + i] = vals[i];
    else
      out.qdata[flat * vals.size() + i] = sat16(vals[i]);
  }
}

template <class Mode>
Tensor run_full_typed(const Workload& w) {
  Tensor out = w.src_a.dtype == Dtype::Real32
                   ? Tensor::real(w.output_shape())
                   : Tensor::fix(w.output_shape(), w.src_a.frac_bits);
  Index p(w.p_shape().size(), 0);
  int64_t row = 0;
  do {
    RipState<Mode> st(w.program);
    Index a(w.a_shape().size(), 0);
    do {
      auto [first, last] = phase_range(w.a_shape(), a);
      Index k = concat(p, a);
      auto va = view_gather<typename ModeValue<Mode>::type>(w.view_a, w.src_a, k);
      auto vb = view_gather<typename ModeValue<Mode>::type>(w.view_b, w.src_b, k);
      st.exec(first, last, k, va, vb);
    } while (next_index(a, w.a_shape()));
    if (static_cast<int>(st.outputs().size()) != w.program.outputs)
      throw Error(ErrorCode::BadParams, "program emitted wrong output count");
    store_output<Mode>(out, row, st.outputs());
    ++row;
  } while (next_index(p, w.p_shape()));
  return out;
}

// Simulated scratchpad holding one footprint box, loaded as a unit.
template <typename T>
struct Scratchpad {
  FootprintBox box;
  std::vector<T> data;

  void load(const ViewSpec& spec, const Tensor& src, const Index& k0,
            const Shape& tile, int64_t capacity) {
    box = footprint_box(spec, k0, tile);
    if (box.words() > capacity)
      throw Error(ErrorCode::ScratchpadOverflow, "tile exceeds scratchpad");
    data.assign(static_cast<size_t>(box.words()), T(0));
    Index off(box.extents.size(), 0);
    int64_t flat = 0;
    do {
      Index x(off.size());
      for (size_t i = 0; i < off.size(); ++i) x[i] = box.origin[i] + off[i];
      if (spec.in_range(x)) {
        data[flat] = detail::tensor_value<T>(src, flat_offset(spec.source_shape, x));
      } else if (spec.boundary == Boundary::Clamp) {
        Index xc = x;
        for (size_t i = 0; i < xc.size(); ++i)
          xc[i] = std::clamp<int64_t>(xc[i], 0, spec.source_shape[i] - 1);
        data[flat] = detail::tensor_value<T>(src, flat_offset(spec.source_shape, xc));
      } else if (spec.boundary == Boundary::Reject) {
        throw Error(ErrorCode::OutOfRange, "tile footprint outside source");
      }
      ++flat;
    } while (next_index(off, box.extents));
  }

  T fetch(const ViewSpec& spec, const Index& k) const {
    Index x = spec.source_index(k);
    int64_t flat = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      int64_t rel = x[i] - box.origin[i];
      if (rel < 0 || rel >= box.extents[i])
        throw Error(ErrorCode::OutOfFootprint, "gather outside footprint box");
      flat = flat * box.extents[i] + rel;
    }
    return data[flat];
  }
};

template <class Mode>
std::pair<Tensor, TrafficReport> run_tiled_typed(const Workload& w,
                                                 const TilingPlan& plan,
                                                 const EngineConfig& cfg) {
  using T = typename ModeValue<Mode>::type;
  plan.validate(w.p_shape(), w.a_shape());
  Tensor out = w.src_a.dtype == Dtype::Real32
                   ? Tensor::real(w.output_shape())
                   : Tensor::fix(w.output_shape(), w.src_a.frac_bits);
  TrafficReport rep;

  const Shape& ps = w.p_shape();
  const Shape& as = w.a_shape();
  Shape p_tiles(ps.size()), a_tiles(as.size());
  for (size_t i = 0; i < ps.size(); ++i)
    p_tiles[i] = (ps[i] + plan.t_p[i] - 1) / plan.t_p[i];
  for (size_t i = 0; i < as.size(); ++i)
    a_tiles[i] = (as[i] + plan.t_a[i] - 1) / plan.t_a[i];

  Index pt(ps.size(), 0);
  do {
    Index p0(ps.size());
    Shape tp_cur(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
      p0[i] = pt[i] * plan.t_p[i];
      tp_cur[i] = std::min(plan.t_p[i], ps[i] - p0[i]);
    }
    // Per-p register state lives for the whole p-tile; a-tiles accumulate
    // into it so Pre/Post phases fire only at global loop boundaries.
    std::vector<RipState<Mode>> states(static_cast<size_t>(volume(tp_cur)),
                                       RipState<Mode>(w.program));
    Index at(as.size(), 0);
    do {
      Index a0(as.size());
      Shape ta_cur(as.size());
      for (size_t i = 0; i < as.size(); ++i) {
        a0[i] = at[i] * plan.t_a[i];
        ta_cur[i] = std::min(plan.t_a[i], as[i] - a0[i]);
      }
      Shape tile_cur = tp_cur;
      tile_cur.insert(tile_cur.end(), ta_cur.begin(), ta_cur.end());
      Index k0 = concat(p0, a0);

      Scratchpad<T> spad_a, spad_b;
      spad_a.load(w.view_a, w.src_a, k0, tile_cur, cfg.scratch_words_a);
      spad_b.load(w.view_b, w.src_b, k0, tile_cur, cfg.scratch_words_b);
      rep.dram_read_words_a += spad_a.box.words();
      rep.dram_read_words_b += spad_b.box.words();
      rep.scratchpad_peak_words_a =
          std::max<uint64_t>(rep.scratchpad_peak_words_a, spad_a.box.words());
      rep.scratchpad_peak_words_b =
          std::max<uint64_t>(rep.scratchpad_peak_words_b, spad_b.box.words());
      ++rep.passes;

      Index pl(ps.size(), 0);
      int64_t prow = 0;
      do {
        Index p(ps.size());
        for (size_t i = 0; i < ps.size(); ++i) p[i] = p0[i] + pl[i];
        Index al(as.size(), 0);
        do {
          Index a(as.size());
          for (size_t i = 0; i < as.size(); ++i) a[i] = a0[i] + al[i];
          auto [first, last] = phase_range(as, a);
          Index k = concat(p, a);
          states[prow].exec(first, last, k, spad_a.fetch(w.view_a, k),
                            spad_b.fetch(w.view_b, k));
          ++rep.macs;
        } while (next_index(al, ta_cur));
        ++prow;
      } while (next_index(pl, tp_cur));
    } while (next_index(at, a_tiles));

    // Commit outputs for this p-tile (output stationary: written once).
    Index pl(ps.size(), 0);
    int64_t prow = 0;
    do {
      Index p(ps.size());
      for (size_t i = 0; i < ps.size(); ++i) p[i] = p0[i] + pl[i];
      const auto& vals = states[prow].outputs();
      if (static_cast<int>(vals.size()) != w.program.outputs)
        throw Error(ErrorCode::BadParams, "program emitted wrong output count");
      store_output<Mode>(out, flat_offset(ps, p), vals);
      rep.dram_write_words += vals.size();
      ++prow;
    } while (next_index(pl, tp_cur));
  } while (next_index(pt, p_tiles));

  return {out, rep};
}

}  // namespace detail

inline Tensor run_full(const Workload& w) {
  w.validate();
  return w.src_a.dtype == Dtype::Real32
             ? detail::run_full_typed<Real32Mode>(w)
             : detail::run_full_typed<Fix16Mode>(w);
}

inline std::pair<Tensor, TrafficReport> run_tiled(
    const Workload& w, const TilingPlan& plan, const EngineConfig& cfg = {}) {
  w.validate();
  return w.src_a.dtype == Dtype::Real32
             ? detail::run_tiled_typed<Real32Mode>(w, plan, cfg)
             : detail::run_tiled_typed<Fix16Mode>(w, plan, cfg);
}

/// Word count per input of the eagerly unrolled matrix U(A).
inline int64_t traffic_naive_unrolled(const Workload& w) {
  return volume(w.p_shape()) * volume(w.a_shape());
}

inline double reuse_rate(double macs, double in_words, double out_words) {
  if (in_words + out_words <= 0)
    throw Error(ErrorCode::DivByZero, "reuse rate needs a nonzero word count");
  return macs / (in_words + out_words);
}

}  // namespace merit
