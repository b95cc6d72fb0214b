#pragma once

// Finite-window Monte Carlo: origin reach, left-right crossing and the
// crossing threshold. Trial t always uses the field derive_seed(seed, t), and
// every estimate is an integer tally over trials, so the result does not
// depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#include "peierls/cluster_geometry.hpp"
#include "peierls/errors.hpp"
#include "peierls/lattice.hpp"
#include "peierls/parallel.hpp"

namespace peierls {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::int32_t L = 0;
  double c = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

inline McEstimate make_estimate(std::uint64_t hits, std::uint64_t trials, std::int32_t L, double c,
                                std::uint64_t seed) {
  McEstimate e;
  e.trials = trials;
  e.value = static_cast<double>(hits) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
  e.L = L;
  e.c = c;
  e.seed = seed;
  return e;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  bool same(std::size_t a, std::size_t b) { return find(a) == find(b); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

namespace detail {

inline void check_trial_args(std::int32_t L, double c, std::uint64_t trials) {
  if (L < 1) throw InvalidArgument("window radius L must be >= 1");
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
}

// Trials are cut into fixed blocks; the block layout only affects scheduling.
inline constexpr std::uint64_t kTrialBlock = 256;

template <class Indicator>
std::uint64_t tally(std::uint64_t trials, unsigned threads, Indicator&& make_indicator) {
  const std::size_t blocks = static_cast<std::size_t>((trials + kTrialBlock - 1) / kTrialBlock);
  const auto counts = parallel_tasks<std::uint64_t>(threads, blocks, [&](std::size_t b) {
    auto indicator = make_indicator();
    std::uint64_t hits = 0;
    const std::uint64_t end = std::min(trials, (b + 1) * kTrialBlock);
    for (std::uint64_t t = b * kTrialBlock; t < end; ++t) hits += indicator(t) ? 1 : 0;
    return hits;
  });
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

}  // namespace detail

/// Does the occupied cluster of the origin touch the border of the window?
/// Same answer as cluster_at(...) returning EscapesWindow, but field values are
/// generated lazily and the search stops at the first border site. The
/// scratch object is reusable across trials.
class OriginReach {
 public:
  explicit OriginReach(Window window) : window_(window), stamp_(window.site_count(), 0) {}

  bool operator()(std::uint64_t field_seed, double c) {
    if (!(field_value(field_seed, kOrigin) < c)) return false;
    if (++generation_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      generation_ = 1;
    }
    stack_.clear();
    stack_.push_back(kOrigin);
    stamp_[window_.index(kOrigin)] = generation_;
    while (!stack_.empty()) {
      const Site cur = stack_.back();
      stack_.pop_back();
      if (window_.on_border(cur)) return true;
      for (const Site n : phi_neighbors(cur)) {
        auto& mark = stamp_[window_.index(n)];
        if (mark == generation_) continue;
        mark = generation_;
        if (field_value(field_seed, n) < c) stack_.push_back(n);
      }
    }
    return false;
  }

 private:
  Window window_;
  std::vector<std::uint32_t> stamp_;
  std::vector<Site> stack_;
  std::uint32_t generation_ = 0;
};

inline bool reaches_border(const CoupledField& field, double c) {
  return std::holds_alternative<EscapesWindow>(cluster_at(field, c, kOrigin));
}

inline McEstimate estimate_origin_reach(std::int32_t L, double c, std::uint64_t trials,
                                        std::uint64_t seed, unsigned threads = default_threads()) {
  detail::check_trial_args(L, c, trials);
  const Window window(L);
  const auto hits = detail::tally(trials, threads, [&] {
    return [reach = OriginReach(window), c, seed](std::uint64_t t) mutable {
      return reach(derive_seed(seed, t), c);
    };
  });
  return make_estimate(hits, trials, L, c, seed);
}

/// Left-right crossing by occupied sites (4-neighbour connectivity, free
/// boundary) using union-find over the whole window.
inline bool crossing_indicator(const CoupledField& field, double c) {
  const Window& win = field.window();
  const std::int32_t L = win.radius();
  const std::size_t n = win.site_count();
  const std::size_t left = n, right = n + 1;
  UnionFind uf(n + 2);
  const auto& u = field.values();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u[i] < c)) continue;
    const Site s = win.site(i);
    if (s.x == -L) uf.unite(i, left);
    if (s.x == L) uf.unite(i, right);
    if (s.x < L && u[i + 1] < c) uf.unite(i, i + 1);
    if (s.y < L) {
      const std::size_t up = i + static_cast<std::size_t>(win.side());
      if (u[up] < c) uf.unite(i, up);
    }
  }
  return uf.same(left, right);
}

/// The smallest c at which the field crosses: the minimum over left-right
/// paths of the largest value on the path. crossing_indicator(field, c) is
/// exactly (crossing_threshold(field) < c).
inline double crossing_threshold(const CoupledField& field) {
  const Window& win = field.window();
  const std::int32_t L = win.radius();
  const auto& u = field.values();
  std::vector<double> best(win.site_count(), 2.0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::int32_t y = -L; y <= L; ++y) {
    const std::size_t i = win.index({-L, y});
    best[i] = u[i];
    heap.emplace(u[i], i);
  }
  while (!heap.empty()) {
    const auto [v, i] = heap.top();
    heap.pop();
    if (v > best[i]) continue;
    const Site s = win.site(i);
    if (s.x == L) return v;
    for (const Site n : phi_neighbors(s)) {
      if (!win.contains(n)) continue;
      const std::size_t j = win.index(n);
      const double w = std::max(v, u[j]);
      if (w < best[j]) {
        best[j] = w;
        heap.emplace(w, j);
      }
    }
  }
  return 1.0;  // unreachable: every window has a straight path
}

inline McEstimate estimate_crossing(std::int32_t L, double c, std::uint64_t trials,
                                    std::uint64_t seed, unsigned threads = default_threads()) {
  detail::check_trial_args(L, c, trials);
  const Window window(L);
  const auto hits = detail::tally(trials, threads, [&] {
    return [window, c, seed](std::uint64_t t) {
      return crossing_indicator(CoupledField(window, derive_seed(seed, t)), c);
    };
  });
  return make_estimate(hits, trials, L, c, seed);
}

struct BisectionStep {
  double lo = 0.0;
  double hi = 0.0;
  McEstimate crossing;  // evaluated at the midpoint (lo + hi) / 2
};

struct ThresholdEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  double tol = 0.0;
  std::uint64_t trials = 0;
  std::int32_t L = 0;
  std::uint64_t seed = 0;
  std::vector<BisectionStep> trace;
};

/// Per-trial crossing thresholds for the fields derive_seed(seed, t).
inline std::vector<double> crossing_thresholds(std::int32_t L, std::uint64_t trials,
                                               std::uint64_t seed,
                                               unsigned threads = default_threads()) {
  detail::check_trial_args(L, 0.5, trials);
  const Window window(L);
  return parallel_tasks<double>(threads, static_cast<std::size_t>(trials), [&](std::size_t t) {
    return crossing_threshold(CoupledField(window, derive_seed(seed, t)));
  });
}

/// Bisection for crossing probability 1/2. Every midpoint is evaluated on the
/// same coupled fields, through their crossing thresholds, so the crossing
/// fraction is monotone in c and the brackets are nested.
inline ThresholdEstimate estimate_threshold(std::int32_t L, std::uint64_t trials, double tol,
                                            std::uint64_t seed,
                                            unsigned threads = default_threads()) {
  if (!(tol >= 1e-3)) throw InvalidArgument("bisection tolerance must be >= 1e-3");
  const auto m = crossing_thresholds(L, trials, seed, threads);

  ThresholdEstimate out;
  out.tol = tol;
  out.trials = trials;
  out.L = L;
  out.seed = seed;
  double lo = 0.0, hi = 1.0;
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(m.begin(), m.end(), [mid](double v) { return v < mid; }));
    const McEstimate est = make_estimate(hits, trials, L, mid, seed);
    out.trace.push_back({lo, hi, est});
    if (est.value < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.value = 0.5 * (lo + hi);
  return out;
}

}  // namespace peierls
