#pragma once

#include <optional>
#include <string>
#include <vector>

#include "merit/tensor.hpp"

namespace merit {

enum class Boundary { ZeroPad, Clamp, Reject };

/// One affine term of a gather view: component j of the concatenated
/// (p, a) index contributes k_j*stride + offset to source axis `axis`.
struct ViewTerm {
  int component = 0;
  int axis = 0;
  int64_t stride = 1;
  int64_t offset = 0;
};

/// A declarative gather view from a source tensor onto a virtual tensor
/// indexed by parallel indices p and accumulation indices a.
struct ViewSpec {
  Shape source_shape;
  Shape p_shape;
  Shape a_shape;
  std::vector<ViewTerm> terms;
  Boundary boundary = Boundary::ZeroPad;

  int k_rank() const {
    return static_cast<int>(p_shape.size() + a_shape.size());
  }

  /// Raw source coordinates for concatenated index k (before boundary
  /// handling). Unmapped axes resolve to 0.
  Index source_index(const Index& k) const {
    Index x(source_shape.size(), 0);
    for (const ViewTerm& t : terms)
      x[t.axis] += k[t.component] * t.stride + t.offset;
    return x;
  }

  bool in_range(const Index& x) const {
    for (size_t i = 0; i < x.size(); ++i)
      if (x[i] < 0 || x[i] >= source_shape[i]) return false;
    return true;
  }
};

namespace detail {

template <typename T>
T tensor_value(const Tensor& t, int64_t flat);
template <>
inline float tensor_value<float>(const Tensor& t, int64_t flat) {
  return t.fdata[flat];
}
template <>
inline int16_t tensor_value<int16_t>(const Tensor& t, int64_t flat) {
  return t.qdata[flat];
}

}  // namespace detail

/// Gather one element for concatenated index k. ZERO_PAD fills 0 outside
/// the source, CLAMP clamps each coordinate, REJECT throws.
template <typename T>
T view_gather(const ViewSpec& spec, const Tensor& src, const Index& k) {
  Index x = spec.source_index(k);
  if (!spec.in_range(x)) {
    switch (spec.boundary) {
      case Boundary::ZeroPad:
        return T(0);
      case Boundary::Clamp:
        for (size_t i = 0; i < x.size(); ++i)
          x[i] = std::clamp<int64_t>(x[i], 0, spec.source_shape[i] - 1);
        break;
      case Boundary::Reject:
        throw Error(ErrorCode::OutOfRange, "gather outside source tensor");
    }
  }
  return detail::tensor_value<T>(src, flat_offset(spec.source_shape, x));
}

inline float view_gather_real(const ViewSpec& s, const Tensor& t,
                              const Index& k) {
  return view_gather<float>(s, t, k);
}

/// Eager materialization of the view as a (prod p, prod a) matrix.
/// Pure data movement: every element is a source copy or a boundary fill.
inline Tensor view_materialize(const ViewSpec& spec, const Tensor& src) {
  int64_t rows = volume(spec.p_shape);
  int64_t cols = volume(spec.a_shape);
  Tensor out = src.dtype == Dtype::Real32
                   ? Tensor::real({rows, cols})
                   : Tensor::fix({rows, cols}, src.frac_bits);
  Index k(spec.k_rank(), 0);
  int64_t flat = 0;
  Shape full = spec.p_shape;
  full.insert(full.end(), spec.a_shape.begin(), spec.a_shape.end());
  do {
    if (src.dtype == Dtype::Real32)
      out.fdata[flat] = view_gather<float>(spec, src, k);
    else
      out.qdata[flat] = view_gather<int16_t>(spec, src, k);
    ++flat;
  } while (next_index(k, full));
  return out;
}

struct Footprint {
  Shape per_axis;
  int64_t words = 0;
};

/// Minimal per-axis extents of the source box touched by a tile of the
/// given (t_p, t_a) extents: 1 + sum_j (t_j - 1) * s_j over terms on the
/// axis. Defined for non-negative strides only.
inline Footprint footprint(const ViewSpec& spec, const Shape& tile) {
  if (tile.size() != static_cast<size_t>(spec.k_rank()))
    throw Error(ErrorCode::BadParams, "tile rank mismatch");
  Footprint fp;
  fp.per_axis.assign(spec.source_shape.size(), 1);
  for (const ViewTerm& t : spec.terms) {
    if (t.stride < 0)
      throw Error(ErrorCode::NegativeStride,
                  "footprint undefined for negative strides");
    fp.per_axis[t.axis] += (tile[t.component] - 1) * t.stride;
  }
  fp.words = volume(fp.per_axis);
  return fp;
}

struct FootprintBox {
  Index origin;   // source coordinates of the box corner, may be negative
  Shape extents;  // per-axis extents per the footprint formula
  int64_t words() const { return volume(extents); }
};

/// Footprint box anchored at tile origin k0 with the given tile extents.
inline FootprintBox footprint_box(const ViewSpec& spec, const Index& k0,
                                  const Shape& tile) {
  FootprintBox box;
  box.origin = spec.source_index(k0);
  box.extents = footprint(spec, tile).per_axis;
  return box;
}

struct Diagnostic {
  std::string kind;  // AXIS_OUT_OF_RANGE, COMPONENT_OUT_OF_RANGE, INFO_BROADCAST
  std::string detail;
};

inline std::vector<Diagnostic> validate_spec(const ViewSpec& spec) {
  std::vector<Diagnostic> out;
  int kr = spec.k_rank();
  std::vector<bool> used(kr, false);
  for (const ViewTerm& t : spec.terms) {
    if (t.axis < 0 || t.axis >= static_cast<int>(spec.source_shape.size()))
      out.push_back({"AXIS_OUT_OF_RANGE",
                     "term axis " + std::to_string(t.axis)});
    if (t.component < 0 || t.component >= kr)
      out.push_back({"COMPONENT_OUT_OF_RANGE",
                     "term component " + std::to_string(t.component)});
    else
      used[t.component] = true;
  }
  for (int j = 0; j < kr; ++j)
    if (!used[j])
      out.push_back({"INFO_BROADCAST",
                     "component " + std::to_string(j) + " has no term"});
  return out;
}

}  // namespace merit
