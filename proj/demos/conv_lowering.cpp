// Lower a small convolution to a gather view, run it both untiled and
// tiled, and print the memory-traffic difference against eager unrolling.

#include <iostream>

#include "merit/engine.hpp"
#include "merit/workloads.hpp"

int main() {
  using namespace merit;

  Params prm{{"h", 68}, {"w", 68}, {"k", 5}, {"pad", 0}};
  Workload w = build_template("conv2d", prm);
  fill_random(w.src_a, 1);
  fill_random(w.src_b, 2);

  Tensor full = run_full(w);

  TilingPlan plan{{16, 8}, {5, 5}};
  EngineConfig cfg{1 << 20, 1 << 20};
  auto [tiled, traffic] = run_tiled(w, plan, cfg);

  std::cout << "outputs identical: " << (full.same_bits(tiled) ? "yes" : "no")
            << "\n";
  std::cout << "passes:            " << traffic.passes << "\n";
  std::cout << "words per pass:    "
            << traffic.dram_read_words_a / traffic.passes << "\n";
  std::cout << "unrolled words:    "
            << traffic_naive_unrolled(w) / (full.fdata.size() / (16 * 8))
            << " per tile\n";
  std::cout << "reuse rate:        "
            << reuse_rate(static_cast<double>(traffic.macs),
                          static_cast<double>(traffic.dram_read_words_a +
                                              traffic.dram_read_words_b),
                          static_cast<double>(traffic.dram_write_words))
            << "\n";
  return 0;
}
