#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "merit/tensor.hpp"
#include "merit/view.hpp"

namespace merit {

inline int bit_length(int64_t v) {
  int n = 0;
  while (v > 0) {
    ++n;
    v >>= 1;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Ternary {0, 1, x} algebra

enum class Tern : uint8_t { T0 = 0, T1 = 1, TX = 2 };

inline Tern tern_and(Tern a, Tern b) {
  if (a == Tern::T0 || b == Tern::T0) return Tern::T0;
  if (a == Tern::T1 && b == Tern::T1) return Tern::T1;
  return Tern::TX;
}

inline Tern tern_xor(Tern a, Tern b) {
  if (a == Tern::TX || b == Tern::TX) return Tern::TX;
  return a == b ? Tern::T0 : Tern::T1;
}

inline Tern tern_not(Tern a) {
  if (a == Tern::TX) return Tern::TX;
  return a == Tern::T0 ? Tern::T1 : Tern::T0;
}

inline char tern_char(Tern t) {
  return t == Tern::T0 ? '0' : t == Tern::T1 ? '1' : 'x';
}

/// Rows are address bits, columns are ALU-index bits.
struct TernaryMatrix {
  int rows = 0, cols = 0;
  std::vector<Tern> e;

  TernaryMatrix() = default;
  TernaryMatrix(int r, int c) : rows(r), cols(c), e(r * c, Tern::T0) {}

  Tern& at(int r, int c) { return e[r * cols + c]; }
  Tern at(int r, int c) const { return e[r * cols + c]; }

  bool operator==(const TernaryMatrix& o) const {
    return rows == o.rows && cols == o.cols && e == o.e;
  }

  bool is_identity() const {
    if (rows != cols) return false;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (at(r, c) != (r == c ? Tern::T1 : Tern::T0)) return false;
    return true;
  }

  bool row_pure(int r) const {
    for (int c = 0; c < cols; ++c)
      if (at(r, c) == Tern::TX) return false;
    return true;
  }

  std::vector<std::string> row_strings() const {
    std::vector<std::string> out(rows);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) out[r].push_back(tern_char(at(r, c)));
    return out;
  }

  static TernaryMatrix parse(const std::vector<std::string>& rows_in) {
    TernaryMatrix m(static_cast<int>(rows_in.size()),
                    rows_in.empty() ? 0 : static_cast<int>(rows_in[0].size()));
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c)
        m.at(r, c) = rows_in[r][c] == '0'   ? Tern::T0
                     : rows_in[r][c] == '1' ? Tern::T1
                                            : Tern::TX;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Affine-in-bits address patterns (A_n = A_0 + sum c_i * b_{n,i})

struct AddressPattern {
  int64_t base = 0;
  std::vector<int64_t> coeffs;

  int alu_bits() const { return static_cast<int>(coeffs.size()); }

  int64_t address(int64_t n) const {
    int64_t a = base;
    for (int i = 0; i < alu_bits(); ++i)
      if (n >> i & 1) a += coeffs[i];
    return a;
  }
};

/// Fit the per-ALU address list to the affine-in-bits form. Returns
/// nullopt (IRREGULAR) on any superposition mismatch or negative coeff.
inline std::optional<AddressPattern> fit_affine_pattern(
    const std::vector<int64_t>& addrs) {
  if (addrs.empty() || (addrs.size() & (addrs.size() - 1)) != 0)
    throw Error(ErrorCode::BadParams, "address count must be a power of two");
  AddressPattern p;
  p.base = addrs[0];
  for (size_t bit = 1; bit < addrs.size(); bit <<= 1)
    p.coeffs.push_back(addrs[bit] - p.base);
  for (int64_t c : p.coeffs)
    if (c < 0) return std::nullopt;
  for (size_t n = 0; n < addrs.size(); ++n)
    if (p.address(static_cast<int64_t>(n)) != addrs[n]) return std::nullopt;
  return p;
}

/// Hash-property matrix of the coefficients over m address bits, computed
/// by exhaustive simulation: entry (r, j) is 1 if flipping ALU bit j flips
/// address bit r for every base and every n, 0 if it never does, x else.
inline TernaryMatrix property_matrix(const std::vector<int64_t>& coeffs,
                                     int m) {
  int b = static_cast<int>(coeffs.size());
  TernaryMatrix h(m, b);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < b; ++j) {
      bool seen_flip = false, seen_hold = false;
      for (int64_t base = 0; base < (int64_t{1} << m); ++base) {
        AddressPattern p{base, coeffs};
        for (int64_t n = 0; n < (int64_t{1} << b); ++n) {
          int64_t a0 = p.address(n);
          int64_t a1 = p.address(n ^ (int64_t{1} << j));
          ((a0 >> r & 1) != (a1 >> r & 1) ? seen_flip : seen_hold) = true;
        }
      }
      h.at(r, j) = seen_flip && seen_hold ? Tern::TX
                   : seen_flip            ? Tern::T1
                                          : Tern::T0;
    }
  return h;
}

inline int default_address_bits(const std::vector<int64_t>& coeffs) {
  int64_t sum = 0;
  for (int64_t c : coeffs) sum += c;
  return std::max(1, bit_length(sum));
}

// ---------------------------------------------------------------------------
// Reduction to identity (Gaussian elimination without row swapping)

struct ReduceResult {
  bool success = false;
  std::string reason;        // set on failure
  std::vector<int> trace;    // pivot rows in order
  TernaryMatrix fixpoint;
};

inline ReduceResult reduce_to_identity(TernaryMatrix h) {
  ReduceResult res;
  if (h.rows != h.cols) {
    res.reason = "matrix not square";
    return res;
  }
  std::vector<bool> used(h.rows, false);
  for (;;) {
    int pivot = -1;
    for (int r = 0; r < h.rows; ++r)
      if (!used[r] && h.row_pure(r)) {
        pivot = r;
        break;
      }
    if (pivot < 0) break;
    used[pivot] = true;
    res.trace.push_back(pivot);
    std::vector<Tern> mask(h.cols);
    for (int c = 0; c < h.cols; ++c) mask[c] = tern_not(h.at(pivot, c));
    for (int r = 0; r < h.rows; ++r) {
      if (r == pivot) continue;
      for (int c = 0; c < h.cols; ++c)
        h.at(r, c) = tern_and(h.at(r, c), mask[c]);
    }
  }
  res.fixpoint = h;
  res.success = h.is_identity();
  if (!res.success)
    res.reason = res.trace.empty() ? "no pure row" : "fixpoint is not identity";
  return res;
}

// ---------------------------------------------------------------------------
// (X, R) hash search

/// GF(2) bit hash: X trims m address bits to bank bits (diagonal ones,
/// at most one extra one per row at a higher column); R rotates the rows
/// upward t times (upper rows wrap to the bottom).
struct HashConfig {
  std::vector<std::vector<uint8_t>> x;  // bank_bits rows of m columns
  int rotate = 0;

  int bank_bits() const { return static_cast<int>(x.size()); }
  int addr_bits() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }

  static HashConfig identity(int bank_bits, int addr_bits) {
    HashConfig h;
    h.x.assign(bank_bits, std::vector<uint8_t>(addr_bits, 0));
    for (int r = 0; r < bank_bits; ++r) h.x[r][r] = 1;
    return h;
  }

  /// rotate_rows^t(X * H) over the ternary algebra.
  TernaryMatrix apply(const TernaryMatrix& h) const {
    int nb = bank_bits();
    TernaryMatrix xh(nb, h.cols);
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < h.cols; ++c) {
        Tern acc = Tern::T0;
        for (int k = 0; k < h.rows; ++k)
          if (x[r][k]) acc = tern_xor(acc, h.at(k, c));
        xh.at(r, c) = acc;
      }
    TernaryMatrix out(nb, h.cols);
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < h.cols; ++c)
        out.at(r, c) = xh.at((r + rotate) % nb, c);
    return out;
  }

  /// Bank index of an address: GF(2) matrix-vector product plus rotation.
  int64_t bank_of(int64_t addr) const {
    int nb = bank_bits();
    int64_t bits = 0;
    for (int r = 0; r < nb; ++r) {
      int v = 0;
      for (int k = 0; k < addr_bits(); ++k)
        v ^= static_cast<int>(addr >> k & 1) & x[r][k];
      bits |= static_cast<int64_t>(v) << r;
    }
    int64_t rot = 0;
    for (int r = 0; r < nb; ++r)
      rot |= (bits >> ((r + rotate) % nb) & 1) << r;
    return rot;
  }
};

/// First (X, R) in deterministic order whose hashed property matrix
/// reduces to the identity: X row choices ascend (no off-diagonal first,
/// then ascending column), rotation count innermost.
inline std::optional<HashConfig> search_hash(const TernaryMatrix& h,
                                             int bank_bits) {
  if (h.rows < bank_bits)
    throw Error(ErrorCode::BadParams, "need at least bank_bits address rows");
  int m = h.rows;
  // choice[r]: -1 means no off-diagonal one, else the extra column (> r).
  std::vector<int> choice(bank_bits, -1);
  for (;;) {
    HashConfig cfg = HashConfig::identity(bank_bits, m);
    for (int r = 0; r < bank_bits; ++r)
      if (choice[r] >= 0) cfg.x[r][choice[r]] = 1;
    for (int t = 0; t < bank_bits; ++t) {
      cfg.rotate = t;
      if (reduce_to_identity(cfg.apply(h)).success) return cfg;
    }
    // Advance the mixed-radix choice vector, last row fastest.
    int r = bank_bits - 1;
    for (; r >= 0; --r) {
      int next = choice[r] < 0 ? r + 1 : choice[r] + 1;
      if (next < m) {
        choice[r] = next;
        break;
      }
      choice[r] = -1;
    }
    if (r < 0) return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Ground-truth conflict enumeration

struct ConflictReport {
  std::vector<std::pair<int, int>> pairs;  // ALU pairs hitting one bank
  bool conflict_free() const { return pairs.empty(); }
};

/// For every base address, compute each ALU's bank (optionally through
/// the hash) and report all pairs that collide for at least one base.
inline ConflictReport detect_conflicts(const std::vector<int64_t>& coeffs,
                                       int banks,
                                       const std::optional<HashConfig>& hash =
                                           std::nullopt) {
  if (banks <= 0 || (banks & (banks - 1)) != 0)
    throw Error(ErrorCode::BadParams, "bank count must be a power of two");
  int nb = bit_length(banks - 1);
  int m = std::max(default_address_bits(coeffs), nb);
  HashConfig cfg = hash ? *hash : HashConfig::identity(nb, m);
  if (cfg.addr_bits() < m) {
    // widen with zero columns so high address bits are ignored
    for (auto& row : cfg.x) row.resize(m, 0);
  }
  int b = static_cast<int>(coeffs.size());
  int64_t alus = int64_t{1} << b;
  std::vector<std::vector<bool>> seen(alus, std::vector<bool>(alus, false));
  ConflictReport rep;
  for (int64_t base = 0; base < (int64_t{1} << m); ++base) {
    AddressPattern p{base, coeffs};
    std::vector<int64_t> bank(alus);
    for (int64_t n = 0; n < alus; ++n)
      bank[n] = cfg.bank_of(p.address(n) & ((int64_t{1} << m) - 1));
    for (int64_t n = 0; n < alus; ++n)
      for (int64_t n2 = n + 1; n2 < alus; ++n2)
        if (bank[n] == bank[n2] && !seen[n][n2]) {
          seen[n][n2] = true;
          rep.pairs.emplace_back(static_cast<int>(n), static_cast<int>(n2));
        }
  }
  std::sort(rep.pairs.begin(), rep.pairs.end());
  return rep;
}

// ---------------------------------------------------------------------------
// Column addresses of a tiled view (scratchpad image of the footprint box)

/// ALU-to-thread assignment: per ALU, an offset into the p tile.
struct AluGroup {
  std::vector<Index> p_offsets;
};

/// Scratchpad addresses each ALU reads at every accumulation step, for a
/// tile anchored at the origin and laid out row-major over its footprint
/// box. Result is one address list (|group| entries) per a-step.
inline std::vector<std::vector<int64_t>> column_addresses(
    const ViewSpec& spec, const Shape& t_p, const Shape& t_a,
    const AluGroup& group) {
  Shape tile = t_p;
  tile.insert(tile.end(), t_a.begin(), t_a.end());
  Index k0(spec.k_rank(), 0);
  FootprintBox box = footprint_box(spec, k0, tile);
  std::vector<std::vector<int64_t>> steps;
  Index a(t_a.size(), 0);
  do {
    std::vector<int64_t>& addrs = steps.emplace_back();
    for (const Index& poff : group.p_offsets) {
      Index k = poff;
      k.insert(k.end(), a.begin(), a.end());
      Index x = spec.source_index(k);
      int64_t flat = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        int64_t rel = x[i] - box.origin[i];
        if (rel < 0 || rel >= box.extents[i])
          throw Error(ErrorCode::OutOfFootprint, "address outside footprint");
        flat = flat * box.extents[i] + rel;
      }
      addrs.push_back(flat);
    }
  } while (next_index(a, t_a));
  return steps;
}

// ---------------------------------------------------------------------------
// Layout candidates: padding, XOR-hash, and re-tiling

struct LayoutCandidate {
  enum class Kind { Padded, XorHash, Retiled } kind;
  std::vector<int64_t> coeffs;        // affine pattern of the first a-step
  int pad_words_per_row = 0;          // waste
  bool conflict_free = false;
  std::optional<HashConfig> hash;
  std::string describe() const {
    switch (kind) {
      case Kind::Padded: return "padded";
      case Kind::XorHash: return "xor-hash";
      case Kind::Retiled: return "retiled";
    }
    return {};
  }
};

/// Candidate conflict-free placements for a 2D (rows x cols) thread tile
/// whose footprint box is box_h x box_w, served by `banks` SRAM banks.
///
/// Emits (a) the minimal row padding that is conflict-free unhashed,
/// (b) the minimal padding for which an (X, R) hash exists, and (c) every
/// re-tiled ALU grouping whose unpadded pattern reduces to the identity.
inline std::vector<LayoutCandidate> generate_layouts(int64_t tile_rows,
                                                     int64_t tile_cols,
                                                     int64_t box_w,
                                                     int banks) {
  if (banks <= 0 || (banks & (banks - 1)) != 0)
    throw Error(ErrorCode::BadParams, "bank count must be a power of two");
  int b = bit_length(banks - 1);
  std::vector<LayoutCandidate> out;

  // Naive grouping: low ALU bits walk tile columns, remaining bits rows.
  auto naive_coeffs = [&](int64_t row_stride) {
    std::vector<int64_t> c;
    int64_t step = 1;
    int bits_left = b;
    while (step < tile_cols && bits_left > 0) {
      c.push_back(step);
      step <<= 1;
      --bits_left;
    }
    int64_t rstep = row_stride;
    while (bits_left-- > 0) {
      c.push_back(rstep);
      rstep <<= 1;
    }
    return c;
  };

  bool found_padded = false, found_hashed = false;
  for (int pad = 0; pad < banks && !(found_padded && found_hashed); ++pad) {
    auto c = naive_coeffs(box_w + pad);
    if (!found_padded && detect_conflicts(c, banks).conflict_free()) {
      out.push_back({LayoutCandidate::Kind::Padded, c, pad, true, std::nullopt});
      found_padded = true;
    }
    if (!found_hashed) {
      auto h = property_matrix(c, default_address_bits(c));
      if (auto hash = search_hash(h, b)) {
        if (detect_conflicts(c, banks, hash).conflict_free()) {
          out.push_back({LayoutCandidate::Kind::XorHash, c, pad, true, hash});
          found_hashed = true;
        }
      }
    }
  }

  // Re-tiling: assign each ALU bit a distinct power-of-two displacement
  // (column step or row step) inside the tile; keep groupings whose
  // unpadded pattern passes the reduction test.
  std::vector<int64_t> displacements;
  for (int64_t s = 1; s < tile_cols; s <<= 1) displacements.push_back(s);
  for (int64_t s = 1; s < tile_rows; s <<= 1) displacements.push_back(s * box_w);
  std::vector<int> pick(b);
  std::function<void(int, int)> rec = [&](int bit, int from) {
    if (bit == b) {
      std::vector<int64_t> c(b);
      for (int i = 0; i < b; ++i) c[i] = displacements[pick[i]];
      std::sort(c.begin(), c.end());
      auto h = property_matrix(c, b);
      if (reduce_to_identity(h).success &&
          detect_conflicts(c, banks).conflict_free())
        out.push_back({LayoutCandidate::Kind::Retiled, c, 0, true, std::nullopt});
      return;
    }
    for (int i = from; i < static_cast<int>(displacements.size()); ++i) {
      pick[bit] = i;
      rec(bit + 1, i + 1);
    }
  };
  if (static_cast<int>(displacements.size()) >= b) rec(0, 0);
  return out;
}

}  // namespace merit
