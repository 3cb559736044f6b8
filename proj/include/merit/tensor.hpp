#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace merit {

enum class ErrorCode {
  OutOfRange,
  BadMagic,
  TruncatedPayload,
  UnknownDtype,
  NegativeStride,
  LutRange,
  DivByZero,
  ScratchpadOverflow,
  OutOfFootprint,
  Indivisible,
  UnknownTemplate,
  BadParams,
  Usage,
};

struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

using Shape = std::vector<int64_t>;
using Index = std::vector<int64_t>;

inline int64_t volume(const Shape& s) {
  int64_t v = 1;
  for (int64_t e : s) v *= e;
  return v;
}

/// Row-major flat offset; throws OutOfRange on any bad component.
inline int64_t flat_offset(const Shape& shape, const Index& idx) {
  if (idx.size() != shape.size())
    throw Error(ErrorCode::OutOfRange, "index rank mismatch");
  int64_t off = 0;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= shape[i])
      throw Error(ErrorCode::OutOfRange, "index component out of range");
    off = off * shape[i] + idx[i];
  }
  return off;
}

/// Row-major increment. Returns false after the last index wraps to zero.
inline bool next_index(Index& k, const Shape& shape) {
  for (size_t i = shape.size(); i-- > 0;) {
    if (++k[i] < shape[i]) return true;
    k[i] = 0;
  }
  return false;
}

enum class Dtype : uint8_t { Real32 = 0, Fix16 = 1 };

inline int16_t sat16(int64_t v) {
  return static_cast<int16_t>(std::clamp<int64_t>(v, -32768, 32767));
}

/// Dense row-major tensor; REAL32 or 16-bit fixed point with explicit
/// fractional bits. Immutable by convention once filled.
class Tensor {
 public:
  Dtype dtype = Dtype::Real32;
  int frac_bits = 0;
  Shape shape;
  std::vector<float> fdata;    // REAL32 payload
  std::vector<int16_t> qdata;  // FIX16 raw payload

  Tensor() = default;

  static Tensor real(Shape shape) {
    Tensor t;
    t.dtype = Dtype::Real32;
    t.shape = std::move(shape);
    t.check_shape();
    t.fdata.assign(static_cast<size_t>(volume(t.shape)), 0.0f);
    return t;
  }

  static Tensor fix(Shape shape, int frac_bits = 8) {
    if (frac_bits < 0 || frac_bits > 15)
      throw Error(ErrorCode::BadParams, "frac_bits must be 0..15");
    Tensor t;
    t.dtype = Dtype::Fix16;
    t.frac_bits = frac_bits;
    t.shape = std::move(shape);
    t.check_shape();
    t.qdata.assign(static_cast<size_t>(volume(t.shape)), 0);
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int64_t size() const { return volume(shape); }

  float fat(const Index& idx) const { return fdata[flat_offset(shape, idx)]; }
  int16_t qat(const Index& idx) const { return qdata[flat_offset(shape, idx)]; }

  float& fat(const Index& idx) { return fdata[flat_offset(shape, idx)]; }
  int16_t& qat(const Index& idx) { return qdata[flat_offset(shape, idx)]; }

  bool same_bits(const Tensor& o) const {
    return dtype == o.dtype && frac_bits == o.frac_bits && shape == o.shape &&
           qdata == o.qdata &&
           fdata.size() == o.fdata.size() &&
           std::memcmp(fdata.data(), o.fdata.data(),
                       fdata.size() * sizeof(float)) == 0;
  }

  void write(std::ostream& os) const {
    os.write("MRT1", 4);
    put_u8(os, static_cast<uint8_t>(dtype));
    put_u8(os, static_cast<uint8_t>(frac_bits));
    put_u16(os, static_cast<uint16_t>(shape.size()));
    for (int64_t e : shape) put_u32(os, static_cast<uint32_t>(e));
    if (dtype == Dtype::Real32) {
      for (float v : fdata) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(os, bits);
      }
    } else {
      for (int16_t v : qdata) put_u16(os, static_cast<uint16_t>(v));
    }
  }

  static Tensor read(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "MRT1", 4) != 0)
      throw Error(ErrorCode::BadMagic, "bad magic, expected MRT1");
    uint8_t dt = get_u8(is);
    uint8_t fb = get_u8(is);
    if (dt > 1) throw Error(ErrorCode::UnknownDtype, "unknown dtype code");
    uint16_t rank = get_u16(is);
    Shape shape(rank);
    for (auto& e : shape) e = get_u32(is);
    if (rank < 1) throw Error(ErrorCode::TruncatedPayload, "rank must be >= 1");
    Tensor t = dt == 0 ? real(shape) : fix(shape, fb);
    int64_t n = t.size();
    if (dt == 0) {
      for (int64_t i = 0; i < n; ++i) {
        uint32_t bits = get_u32(is);
        std::memcpy(&t.fdata[i], &bits, 4);
      }
    } else {
      for (int64_t i = 0; i < n; ++i)
        t.qdata[i] = static_cast<int16_t>(get_u16(is));
    }
    return t;
  }

 private:
  void check_shape() const {
    if (shape.empty()) throw Error(ErrorCode::BadParams, "rank must be >= 1");
    for (int64_t e : shape)
      if (e < 1) throw Error(ErrorCode::BadParams, "extents must be >= 1");
  }

  static void put_u8(std::ostream& os, uint8_t v) {
    os.put(static_cast<char>(v));
  }
  static void put_u16(std::ostream& os, uint16_t v) {
    put_u8(os, v & 0xff);
    put_u8(os, v >> 8);
  }
  static void put_u32(std::ostream& os, uint32_t v) {
    put_u16(os, v & 0xffff);
    put_u16(os, static_cast<uint16_t>(v >> 16));
  }
  static uint8_t get_u8(std::istream& is) {
    int c = is.get();
    if (c == EOF) throw Error(ErrorCode::TruncatedPayload, "unexpected EOF");
    return static_cast<uint8_t>(c);
  }
  static uint16_t get_u16(std::istream& is) {
    uint16_t lo = get_u8(is);
    return static_cast<uint16_t>(lo | (get_u8(is) << 8));
  }
  static uint32_t get_u32(std::istream& is) {
    uint32_t lo = get_u16(is);
    return lo | (static_cast<uint32_t>(get_u16(is)) << 16);
  }
};

}  // namespace merit
