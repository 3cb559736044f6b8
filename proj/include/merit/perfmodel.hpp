#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "merit/engine.hpp"

namespace merit {

struct MachineParams {
  int64_t alus_per_tau = 32;
  int64_t taus = 1;
  double dram_words_per_cycle = 1.0;
  int64_t pipeline_depth = 4;  // fill cost of one pass, hidden by long passes

  int64_t alus() const { return alus_per_tau * taus; }
};

struct PassLatency {
  int64_t load_cycles = 0;
  int64_t compute_cycles = 0;
  int64_t overlapped_cycles = 0;  // steady state: max(load, compute)
};

/// Analytic latency of one tile pass: compute is ceil(tile_p / alus)
/// SIMD rows times the accumulation length, load is the footprint word
/// count over DRAM bandwidth, and prefetch overlaps them in steady state.
inline PassLatency pass_latency(const Workload& w, const TilingPlan& plan,
                                const MachineParams& mp) {
  PassLatency pl;
  Shape tile = plan.full_tile();
  int64_t tp = volume(plan.t_p);
  int64_t ta = volume(plan.t_a);
  pl.compute_cycles = (tp + mp.alus() - 1) / mp.alus() * ta;
  int64_t words =
      footprint(w.view_a, tile).words + footprint(w.view_b, tile).words;
  pl.load_cycles = static_cast<int64_t>(
      std::ceil(static_cast<double>(words) / mp.dram_words_per_cycle));
  pl.overlapped_cycles = std::max(pl.load_cycles, pl.compute_cycles);
  return pl;
}

struct PipelineStats {
  int64_t total_cycles = 0;
  int64_t compute_cycles = 0;  // sum over passes
  int64_t load_cycles = 0;     // sum over passes
  int64_t bubbles = 0;         // warm-up plus unhidden fill/stall cycles
  uint64_t macs = 0;
  double utilization = 0.0;
};

/// Whole-run model: one serialized warm-up load, then per pass the next
/// load prefetches under the current compute; short passes also pay the
/// unhidden part of the pipeline fill.
inline PipelineStats evaluate_pipeline(const Workload& w,
                                       const TilingPlan& plan,
                                       const MachineParams& mp) {
  plan.validate(w.p_shape(), w.a_shape());
  const Shape& ps = w.p_shape();
  const Shape& as = w.a_shape();

  std::vector<PassLatency> passes;
  Shape p_tiles(ps.size()), a_tiles(as.size());
  for (size_t i = 0; i < ps.size(); ++i)
    p_tiles[i] = (ps[i] + plan.t_p[i] - 1) / plan.t_p[i];
  for (size_t i = 0; i < as.size(); ++i)
    a_tiles[i] = (as[i] + plan.t_a[i] - 1) / plan.t_a[i];
  Index pt(ps.size(), 0);
  do {
    Shape tp_cur(ps.size());
    for (size_t i = 0; i < ps.size(); ++i)
      tp_cur[i] = std::min(plan.t_p[i], ps[i] - pt[i] * plan.t_p[i]);
    Index at(as.size(), 0);
    do {
      Shape ta_cur(as.size());
      for (size_t i = 0; i < as.size(); ++i)
        ta_cur[i] = std::min(plan.t_a[i], as[i] - at[i] * plan.t_a[i]);
      TilingPlan cur{tp_cur, ta_cur};
      passes.push_back(pass_latency(w, cur, mp));
    } while (next_index(at, a_tiles));
  } while (next_index(pt, p_tiles));

  PipelineStats st;
  st.macs = static_cast<uint64_t>(volume(ps)) * volume(as);
  st.total_cycles = passes.front().load_cycles;  // warm-up, not overlapped
  st.bubbles = passes.front().load_cycles;
  for (size_t i = 0; i < passes.size(); ++i) {
    st.compute_cycles += passes[i].compute_cycles;
    st.load_cycles += passes[i].load_cycles;
    int64_t next_load = i + 1 < passes.size() ? passes[i + 1].load_cycles : 0;
    int64_t fill = std::max<int64_t>(
        0, mp.pipeline_depth - passes[i].compute_cycles);
    int64_t span = std::max(passes[i].compute_cycles, next_load) + fill;
    st.total_cycles += span;
    st.bubbles += span - passes[i].compute_cycles;
  }
  st.utilization = static_cast<double>(st.macs) /
                   (static_cast<double>(mp.alus()) *
                    static_cast<double>(st.total_cycles));
  return st;
}

inline double utilization(const Workload& w, const TilingPlan& plan,
                          const MachineParams& mp) {
  return evaluate_pipeline(w, plan, mp).utilization;
}

/// Fold: trade parallel width for loop depth. Splits the leading p axis
/// by F (its high part becomes a new outermost accumulation level) and
/// wraps the program in an empty outer phase pair, so the Post phases of
/// the original program still fire once per fold step. Numerically a
/// pure re-scheduling: run_full(fold(w, F)) is a reshape of run_full(w).
inline Workload fold(const Workload& w, int64_t factor) {
  if (factor < 1 || w.p_shape().empty() || w.p_shape()[0] % factor != 0)
    throw Error(ErrorCode::Indivisible, "leading p extent not divisible by fold");
  if (factor == 1) return w;
  Workload f = w;
  int np = static_cast<int>(w.p_shape().size());
  int64_t sub = w.p_shape()[0] / factor;

  auto fold_view = [&](ViewSpec& v) {
    v.p_shape[0] = sub;
    v.a_shape.insert(v.a_shape.begin(), factor);
    std::vector<ViewTerm> terms;
    for (ViewTerm t : v.terms) {
      if (t.component >= np) {
        t.component += 1;  // a components shift past the fold level
        terms.push_back(t);
      } else if (t.component == 0) {
        // p0 = fold * sub + p0'; the fold contribution moves to the new
        // accumulation component (index np), the low part stays on p0.
        terms.push_back(t);
        terms.push_back({np, t.axis, t.stride * sub, 0});
      } else {
        terms.push_back(t);
      }
    }
    v.terms = std::move(terms);
  };
  fold_view(f.view_a);
  fold_view(f.view_b);

  StrategyProgram& prog = f.program;
  prog.segments.insert(prog.segments.begin(),
                       std::vector<AluInstr>{});  // empty new Pre_1
  prog.segments.push_back({});                    // empty new Post_1
  prog.depth += 1;
  for (auto& seg : prog.segments)
    for (AluInstr& in : seg)
      if (in.op == Op::IDX && in.aux >= np) in.aux += 1;
  prog.outputs = w.program.outputs * static_cast<int>(factor);
  return f;
}

}  // namespace merit
