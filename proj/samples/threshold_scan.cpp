// Compares the Peierls bounds with Monte Carlo origin reach on a few
// concentrations, then bisects the crossing threshold on a small window.
//
//   sample_threshold_scan [L] [trials]

#include <cstdio>
#include <cstdlib>

#include "peierls/monte_carlo.hpp"
#include "peierls/peierls_bounds.hpp"

int main(int argc, char** argv) {
  using namespace peierls;
  const int L = argc > 1 ? std::atoi(argv[1]) : 32;
  const auto trials = static_cast<std::uint64_t>(argc > 2 ? std::atoll(argv[2]) : 5000);

  const TruncatedPolynomial q(catalog_for_truncation(9), 9);
  std::printf("%6s %12s %12s %12s %12s\n", "c", "Q_9", "tail", "q_lower", "reach");
  for (double c : {0.82, 0.85, 0.9, 0.95}) {
    const auto rep = truncated_q(c, q);
    const auto mc = estimate_origin_reach(L, c, trials, 1);
    std::printf("%6.2f %12.6f %12.6f %12.6f %8.6f+-%.4f\n", c, rep.q_truncated, *rep.tail, rep.q_lower, mc.value,
                mc.std_error);
  }
  const auto th = estimate_threshold(L, trials, 0.005, 7);
  std::printf("crossing threshold at L=%d: %.4f  (bracket [%.4f, %.4f])\n", L, th.value, th.lo, th.hi);
}
