// Prints the outer-boundary contours of length <= 7 with their class keys
// and the clusters they bound, then the exact counts S_k.

#include <cstdio>

#include "peierls/contour_enumeration.hpp"

int main() {
  using namespace peierls;
  const auto ex = exact_contour_counts(7);
  for (const auto& [key, rec] : ex.catalog.contours) {
    if (rec.length() > 7) continue;
    std::printf("length %zu  class (l=%d, i=%d)  cycle:", rec.length(), rec.key.l, rec.key.i);
    for (const Site s : rec.cycle) std::printf(" (%d,%d)", s.x, s.y);
    std::printf("\n  clusters:");
    for (const auto& [shape, count] : rec.events) std::printf(" %llux|W|=%u,|Wbar|=%u", (unsigned long long)count, shape.first, shape.second);
    std::printf("\n");
  }
  for (const auto& [k, n] : ex.exact)
    if (k >= 4) std::printf("S_%d = %s (walk bound %s)\n", k, n.str().c_str(), walk_bound(k).str().c_str());
}
