// Analyze a scratchpad access pattern for bank conflicts: build the
// bit-behavior matrix of the per-ALU address displacements, try to reduce
// it to the identity, and fall back to an XOR hash when that fails.

#include <iostream>

#include "merit/interconnect.hpp"
#include "merit/layout.hpp"

static void analyze(const std::vector<int64_t>& coeffs) {
  using namespace merit;
  std::cout << "displacements (";
  for (size_t i = 0; i < coeffs.size(); ++i)
    std::cout << coeffs[i] << (i + 1 < coeffs.size() ? "," : "");
  std::cout << "): ";

  int bank_bits = static_cast<int>(coeffs.size());
  ReduceResult red = reduce_to_identity(property_matrix(coeffs, bank_bits));
  if (red.success) {
    std::cout << "conflict-free as-is\n";
    return;
  }
  auto h = property_matrix(coeffs, default_address_bits(coeffs));
  if (auto hash = search_hash(h, bank_bits)) {
    std::cout << "conflict-free with XOR hash (rotate " << hash->rotate
              << ")\n";
    return;
  }
  auto rep = detect_conflicts(coeffs, 1 << bank_bits);
  std::cout << rep.pairs.size() << " conflicting ALU pair(s)\n";
}

int main() {
  analyze({1, 6, 12});  // strided grouping: banks already distinct
  analyze({1, 2, 8});   // padded rows: needs one XOR of address bits
  analyze({1, 2, 6});   // naive row-major grouping: unavoidable conflicts
  return 0;
}
