#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "merit/layout.hpp"
#include "merit/tensor.hpp"
#include "merit/view.hpp"

namespace merit {

/// Switch settings of a log2(N)-stage butterfly. Stage s pairs lines
/// whose indices differ in bit s (LSB first); each pair is either
/// THROUGH or CROSS.
struct ButterflyConfig {
  int ports = 0;
  std::vector<std::vector<bool>> cross;  // [stage][pair]: true = CROSS
};

/// Configure the network so that the word entering on line n leaves on
/// line perm[n]. A configured network is a fixed wiring, so the same
/// settings read in reverse deliver bank perm[n]'s word to ALU n.
/// Returns nullopt (UNROUTABLE) when two words need the same wire.
inline std::optional<ButterflyConfig> butterfly_route(
    int n_ports, const std::vector<int64_t>& perm) {
  if (n_ports <= 0 || (n_ports & (n_ports - 1)) != 0)
    throw Error(ErrorCode::BadParams, "port count must be a power of two");
  if (static_cast<int>(perm.size()) != n_ports)
    throw Error(ErrorCode::BadParams, "permutation size mismatch");
  std::vector<bool> hit(n_ports, false);
  for (int64_t d : perm) {
    if (d < 0 || d >= n_ports || hit[d])
      throw Error(ErrorCode::BadParams, "not a permutation");
    hit[d] = true;
  }
  int stages = bit_length(n_ports - 1);
  ButterflyConfig cfg;
  cfg.ports = n_ports;
  cfg.cross.assign(stages, std::vector<bool>(n_ports / 2, false));
  std::vector<int64_t> dest(perm);  // dest[line] = destination of the word there
  for (int s = 0; s < stages; ++s) {
    std::vector<int64_t> next(n_ports, -1);
    for (int line = 0; line < n_ports; ++line) {
      if (line >> s & 1) continue;  // handle each pair from its low line
      int lo = line, hi = line | (1 << s);
      // Pair index: line index with bit s removed.
      int pair = (lo & ((1 << s) - 1)) | ((lo >> (s + 1)) << s);
      bool lo_wants_hi = (dest[lo] >> s & 1) != 0;
      bool hi_wants_hi = (dest[hi] >> s & 1) != 0;
      if (lo_wants_hi == hi_wants_hi) return std::nullopt;  // same wire
      cfg.cross[s][pair] = lo_wants_hi;
      next[lo_wants_hi ? hi : lo] = dest[lo];
      next[lo_wants_hi ? lo : hi] = dest[hi];
    }
    dest = std::move(next);
  }
  return cfg;
}

/// Bank index of an address under the (X, R) bit-linear hash.
inline int64_t apply_bit_hash(int64_t addr, const HashConfig& cfg) {
  if (addr < 0) throw Error(ErrorCode::BadParams, "address must be >= 0");
  return cfg.bank_of(addr);
}

enum class FetchVerdict { Ok, Stall, DataMismatch };

struct FetchStep {
  FetchVerdict verdict;
  std::vector<int64_t> banks;  // per-ALU bank index
};

/// End-to-end check of one tiled fetch: per accumulation step, locate
/// each ALU's word in its bank, route the resulting bank-to-ALU
/// permutation through the butterfly, and compare the delivered values
/// against a direct gather.
inline std::vector<FetchStep> simulate_fetch(const ViewSpec& spec,
                                             const Tensor& src,
                                             const Shape& t_p, const Shape& t_a,
                                             const AluGroup& group, int banks,
                                             const std::optional<HashConfig>&
                                                 hash = std::nullopt) {
  int nb = bit_length(banks - 1);
  auto steps = column_addresses(spec, t_p, t_a, group);

  // Scratchpad image of the footprint box.
  Shape tile = t_p;
  tile.insert(tile.end(), t_a.begin(), t_a.end());
  FootprintBox box = footprint_box(spec, Index(spec.k_rank(), 0), tile);
  std::vector<float> spad(static_cast<size_t>(box.words()), 0.0f);
  {
    Index off(box.extents.size(), 0);
    int64_t flat = 0;
    do {
      Index x(off.size());
      for (size_t i = 0; i < off.size(); ++i) x[i] = box.origin[i] + off[i];
      if (spec.in_range(x))
        spad[flat] = src.fdata[flat_offset(spec.source_shape, x)];
      ++flat;
    } while (next_index(off, box.extents));
  }

  int m = std::max(nb, bit_length(static_cast<int64_t>(spad.size())));
  HashConfig cfg = hash ? *hash : HashConfig::identity(nb, m);
  if (cfg.addr_bits() < m)
    for (auto& row : cfg.x) row.resize(m, 0);

  std::vector<FetchStep> verdicts;
  size_t step_idx = 0;
  Index a(t_a.size(), 0);
  do {
    const auto& addrs = steps[step_idx++];
    FetchStep fs;
    fs.banks.reserve(addrs.size());
    std::vector<bool> used(banks, false);
    bool stall = false;
    for (int64_t addr : addrs) {
      int64_t bank = cfg.bank_of(addr);
      fs.banks.push_back(bank);
      if (used[bank]) stall = true;
      used[bank] = true;
    }
    if (stall) {
      fs.verdict = FetchVerdict::Stall;
      verdicts.push_back(std::move(fs));
      continue;
    }
    auto route = butterfly_route(banks, fs.banks);
    if (!route) {
      fs.verdict = FetchVerdict::Stall;
      verdicts.push_back(std::move(fs));
      continue;
    }
    // Each ALU's delivered word must equal the direct gather.
    fs.verdict = FetchVerdict::Ok;
    for (size_t alu = 0; alu < addrs.size(); ++alu) {
      Index k = group.p_offsets[alu];
      k.insert(k.end(), a.begin(), a.end());
      float want = view_gather<float>(spec, src, k);
      float got = spad[addrs[alu]];
      if (want != got) fs.verdict = FetchVerdict::DataMismatch;
    }
    verdicts.push_back(std::move(fs));
  } while (next_index(a, t_a));
  return verdicts;
}

}  // namespace merit
