#pragma once

// Exact contour counting.
//
// Two independent routes produce the set of outer-boundary contours around
// the origin:
//   * the cluster route enumerates every phi-connected set W containing the
//     origin up to a size cap and records gamma(W);
//   * the circuit route enumerates closed self-avoiding phibar-walks around
//     the origin and keeps those that are the outer boundary of some cluster.
// The cluster route is authoritative for S_k; the circuit route certifies
// that the size cap was large enough.
//
// Everything here is integer arithmetic.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "peierls/cluster_geometry.hpp"
#include "peierls/errors.hpp"
#include "peierls/lattice.hpp"
#include "peierls/parallel.hpp"

namespace peierls {

using BigInt = boost::multiprecision::cpp_int;

/// Position of a contour in the (l, i) class decomposition.
///
/// z is the ray site {j e1 : j >= 1} nearest to the origin at which the
/// counter-clockwise contour leaves the ray into the first-step set
/// {+e1, +e1+e2, +e2, -e1+e2}; l is its distance from the origin and i in
/// 1..4 indexes the step taken. A contour can touch the ray at a nearer site
/// from below and turn back down (successor z + e1 - e2); such touching
/// sites are skipped, otherwise the first step would not be confined to the
/// four-element set. Every enclosing contour crosses the ray upwards at
/// least once, so z always exists.
struct ClassKey {
  int l = 0;
  int i = 0;
  friend constexpr auto operator<=>(const ClassKey&, const ClassKey&) = default;
};

inline constexpr std::array<Site, 4> kFirstSteps{{kE1, kE1 + kE2, kE2, kE2 - kE1}};

/// 1..4 if `step` is in the first-step set, 0 otherwise.
inline constexpr int first_step_index(Site step) {
  for (std::size_t i = 0; i < kFirstSteps.size(); ++i) {
    if (kFirstSteps[i] == step) return static_cast<int>(i) + 1;
  }
  return 0;
}

inline constexpr bool on_positive_ray(Site s) { return s.y == 0 && s.x >= 1; }

inline ClassKey class_decomposition(std::span<const Site> cycle) {
  const std::size_t n = cycle.size();
  bool meets_ray = false;
  ClassKey best{};
  for (std::size_t j = 0; j < n; ++j) {
    const Site s = cycle[j];
    if (!on_positive_ray(s)) continue;
    meets_ray = true;
    const int i = first_step_index(cycle[(j + 1) % n] - s);
    if (i != 0 && (best.l == 0 || s.x < best.l)) best = {s.x, i};
  }
  if (!meets_ray) throw NoRayIntersection();
  if (best.l == 0) throw Error("contour meets the ray but never leaves it counter-clockwise");
  return best;
}

/// Distance to the nearest ray site on the contour, crossing or not.
inline int nearest_ray_distance(std::span<const Site> cycle) {
  int best = 0;
  for (const Site s : cycle) {
    if (on_positive_ray(s) && (best == 0 || s.x < best)) best = s.x;
  }
  if (best == 0) throw NoRayIntersection();
  return best;
}

inline ClassKey class_decomposition(const Contour& gamma) { return class_decomposition(gamma.cycle); }

/// 4 * 5^(k-2) * (k-1).
inline BigInt walk_bound(int k) {
  if (k < 2) throw InvalidArgument("walk bound is defined for k >= 2");
  BigInt five_power = boost::multiprecision::pow(BigInt(5), static_cast<unsigned>(k - 2));
  return 4 * five_power * (k - 1);
}

// ---------------------------------------------------------------------------
// Cluster route

/// Redelmeier-style enumeration of the connected sets containing the origin.
/// Each set is reported exactly once, as an unsorted span. The search tree is
/// cut at `split_size`: nodes of that size are dealt round-robin to `workers`
/// partitions, so the union over partitions is the full enumeration.
class OriginClusterEnumerator {
 public:
  OriginClusterEnumerator(std::size_t max_size, unsigned worker = 0, unsigned workers = 1,
                          std::size_t split_size = 4)
      : max_size_(max_size), worker_(worker), workers_(workers), split_size_(split_size) {
    if (max_size_ < 1) throw InvalidArgument("max cluster size must be >= 1");
    radius_ = static_cast<std::int32_t>(max_size_) + 1;
    side_ = 2 * radius_ + 1;
    marks_.assign(static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_), 0);
  }

  template <class Visitor>
  std::uint64_t run(Visitor&& visit) {
    visited_ = 0;
    split_counter_ = 0;
    cluster_.clear();
    mark(kOrigin) = 1;
    recurse(std::vector<Site>{kOrigin}, visit);
    mark(kOrigin) = 0;
    return visited_;
  }

 private:
  std::uint8_t& mark(Site s) {
    return marks_[static_cast<std::size_t>(s.y + radius_) * static_cast<std::size_t>(side_) +
                  static_cast<std::size_t>(s.x + radius_)];
  }

  template <class Visitor>
  void recurse(std::vector<Site> untried, Visitor& visit) {
    std::vector<Site> fresh;
    while (!untried.empty()) {
      const Site v = untried.back();
      untried.pop_back();
      cluster_.push_back(v);
      const std::size_t size = cluster_.size();
      bool owned = true;
      if (size < split_size_) {
        owned = worker_ == 0;
      } else if (size == split_size_) {
        owned = (split_counter_++ % workers_) == worker_;
      }
      if (owned) {
        ++visited_;
        visit(std::span<const Site>(cluster_));
      }
      if (size < max_size_ && (owned || size < split_size_)) {
        fresh.clear();
        for (const Site n : phi_neighbors(v)) {
          auto& m = mark(n);
          if (!m) {
            m = 1;
            fresh.push_back(n);
          }
        }
        std::vector<Site> next = untried;
        next.insert(next.end(), fresh.begin(), fresh.end());
        recurse(std::move(next), visit);
        for (const Site n : fresh) mark(n) = 0;
      }
      cluster_.pop_back();
    }
  }

  std::size_t max_size_;
  unsigned worker_;
  unsigned workers_;
  std::size_t split_size_;
  std::int32_t radius_ = 0;
  std::int32_t side_ = 0;
  std::vector<std::uint8_t> marks_;
  std::vector<Site> cluster_;
  std::uint64_t visited_ = 0;
  std::uint64_t split_counter_ = 0;
};

/// Number of connected sets of each size containing the origin, for sizes up
/// to the cap. Clusters at distinct positions are distinct events, so this is
/// n times the number of fixed polyominoes of size n.
inline std::vector<std::uint64_t> origin_cluster_counts(std::size_t max_size, unsigned threads = 1) {
  auto parts = parallel_partitions<std::vector<std::uint64_t>>(threads, [&](unsigned w, unsigned n) {
    std::vector<std::uint64_t> counts(max_size + 1, 0);
    OriginClusterEnumerator(max_size, w, n).run([&](std::span<const Site> c) { ++counts[c.size()]; });
    return counts;
  });
  std::vector<std::uint64_t> total(max_size + 1, 0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.size(); ++i) total[i] += p[i];
  return total;
}

/// Calls `visit(std::span<const Site>)` for every cluster containing the origin
/// with at most `max_cluster_size` sites, single-threaded.
template <class Visitor>
std::uint64_t enumerate_origin_clusters(std::size_t max_cluster_size, Visitor&& visit,
                                        std::uint64_t safety_limit = 2'000'000'000ULL) {
  std::uint64_t seen = 0;
  OriginClusterEnumerator(max_cluster_size).run([&](std::span<const Site> c) {
    if (++seen > safety_limit) throw CapExceeded("cluster enumeration exceeded the safety limit");
    visit(c);
  });
  return seen;
}

using ContourKey = std::vector<Site>;  // sorted site set

struct ContourKeyHash {
  std::size_t operator()(const ContourKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Site s : k) {
      h ^= SiteHash{}(s);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Exponents (|W|, |Wbar|) of a cluster event.
using EventShape = std::pair<std::uint32_t, std::uint32_t>;

struct ContourRecord {
  std::vector<Site> cycle;  // counter-clockwise witness
  ClassKey key;
  std::size_t interior_size = 0;
  std::size_t min_cluster_size = 0;
  std::size_t max_cluster_size = 0;
  std::map<EventShape, std::uint64_t> events;  // clusters with this outer boundary

  std::size_t length() const { return cycle.size(); }
};

/// Outer boundaries of length <= max_length over all clusters W containing the
/// origin with |W| <= cluster_cap.
struct ContourCatalog {
  std::size_t cluster_cap = 0;
  std::size_t max_length = 0;
  std::size_t certified_length = 0;  // every contour of length <= this is present
  std::uint64_t clusters_visited = 0;
  std::map<ContourKey, ContourRecord> contours;

  /// True when every cluster of every recorded contour of length < r fits
  /// under the cap (its interior is no larger than the cap).
  bool events_complete_below(std::size_t r) const {
    for (const auto& [key, rec] : contours) {
      if (rec.length() < r && rec.interior_size > cluster_cap) return false;
    }
    return true;
  }
};

struct CatalogOptions {
  unsigned threads = 1;
  std::uint64_t safety_limit = 2'000'000'000ULL;
};

inline ContourCatalog build_contour_catalog(std::size_t cluster_cap, std::size_t max_length,
                                            const CatalogOptions& opts = {}) {
  using Partial = std::pair<std::uint64_t, std::unordered_map<ContourKey, ContourRecord, ContourKeyHash>>;
  auto parts = parallel_partitions<Partial>(opts.threads, [&](unsigned w, unsigned n) {
    Partial out;
    BoundaryTracer tracer;
    ContourKey key;
    OriginClusterEnumerator(cluster_cap, w, n).run([&](std::span<const Site> cluster) {
      if (++out.first > opts.safety_limit) {
        throw CapExceeded("cluster enumeration exceeded the safety limit");
      }
      // The outer boundary reaches one column past each side of W and one
      // row past its top and bottom, so it needs at least 2 * max(w, h) + 2
      // steps around a w-by-h bounding box.
      std::int32_t xmin = cluster[0].x, xmax = xmin, ymin = cluster[0].y, ymax = ymin;
      for (const Site s : cluster) {
        xmin = std::min(xmin, s.x);
        xmax = std::max(xmax, s.x);
        ymin = std::min(ymin, s.y);
        ymax = std::max(ymax, s.y);
      }
      const auto extent = static_cast<std::size_t>(std::max(xmax - xmin, ymax - ymin)) + 1;
      if (2 * extent + 2 > max_length) return;

      const auto& r = tracer.compute(cluster);
      if (r.cycle.size() > max_length) return;
      key.assign(r.cycle.begin(), r.cycle.end());
      std::sort(key.begin(), key.end());
      auto [it, inserted] = out.second.try_emplace(key);
      ContourRecord& rec = it->second;
      if (inserted) {
        rec.cycle = r.cycle;
        rec.key = class_decomposition(rec.cycle);
        rec.min_cluster_size = cluster.size();
      }
      rec.min_cluster_size = std::min(rec.min_cluster_size, cluster.size());
      rec.max_cluster_size = std::max(rec.max_cluster_size, cluster.size());
      ++rec.events[{static_cast<std::uint32_t>(cluster.size()),
                    static_cast<std::uint32_t>(r.boundary_size)}];
    });
    return out;
  });

  ContourCatalog cat;
  cat.cluster_cap = cluster_cap;
  cat.max_length = max_length;
  for (auto& [visited, partial] : parts) {
    cat.clusters_visited += visited;
    for (auto& [key, rec] : partial) {
      auto [it, inserted] = cat.contours.try_emplace(key, rec);
      if (inserted) continue;
      ContourRecord& dst = it->second;
      // Witness cycles agree: the trace is a function of the contour set.
      dst.min_cluster_size = std::min(dst.min_cluster_size, rec.min_cluster_size);
      dst.max_cluster_size = std::max(dst.max_cluster_size, rec.max_cluster_size);
      for (const auto& [shape, count] : rec.events) dst.events[shape] += count;
    }
  }
  for (auto& [key, rec] : cat.contours) rec.interior_size = enclosed_sites(key).size();
  return cat;
}

// ---------------------------------------------------------------------------
// Circuit route

/// Continuations admitted after each step of a circuit.
///   five:  forward, +-45 and +-90 degrees; the three backward-pointing
///          directions are excluded.
///   seven: everything except the reversal. With self-avoidance this is the
///          unrestricted self-avoiding circuit.
enum class ContinuationRule { five, seven };

inline const char* to_string(ContinuationRule r) { return r == ContinuationRule::five ? "five" : "seven"; }

inline constexpr bool admissible_turn(ContinuationRule rule, int prev_dir, int next_dir) {
  const int diff = ((next_dir - prev_dir) % 8 + 8) % 8;
  if (rule == ContinuationRule::seven) return diff != 4;
  return diff != 3 && diff != 4 && diff != 5;
}

/// Depth-first enumeration of closed self-avoiding phibar-walks of length
/// 4..k_max in one class (l, i): the walk starts at z = (l, 0), takes its
/// first step to z + kFirstSteps[i-1], avoids the origin, never leaves a
/// nearer ray site (j, 0), 1 <= j < l, by a first-set step, obeys `rule` at
/// every vertex (including the closing step and the turn back into the first
/// step) and winds around the origin. Each walk therefore has class (l, i).
///
/// `on_circuit(std::span<const Site> cycle)` is called once per walk.
class CircuitEnumerator {
 public:
  CircuitEnumerator(int k_max, ContinuationRule rule) : k_max_(k_max), rule_(rule) {
    if (k_max < 4) throw InvalidArgument("k_max must be >= 4");
    radius_ = k_max + 1;
    side_ = 2 * radius_ + 1;
    marks_.assign(static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_), 0);
  }

  /// Largest l for which a circuit of length <= k_max can wind around the
  /// origin: the walk must reach x <= -1 and come back to x = l.
  static int max_ray_distance(int k_max) { return k_max / 2 - 1; }

  template <class OnCircuit>
  std::uint64_t run(ClassKey cls, OnCircuit&& on_circuit) {
    if (cls.i < 1 || cls.i > 4 || cls.l < 1) throw InvalidArgument("invalid class key");
    l_ = cls.l;
    start_ = {cls.l, 0};
    first_dir_ = direction_index(kFirstSteps[static_cast<std::size_t>(cls.i - 1)]);
    nodes_ = 0;
    mark(kOrigin) = 1;
    mark(start_) = 1;
    path_.assign(1, start_);
    const Site first = start_ + kDirections[static_cast<std::size_t>(first_dir_)];
    if (feasible(first, 1, first.y == 0 && first.x < 0)) {
      mark(first) = 1;
      path_.push_back(first);
      extend(first_dir_, first.y == 0 && first.x < 0, on_circuit);
      path_.pop_back();
      mark(first) = 0;
    }
    mark(kOrigin) = 0;
    mark(start_) = 0;
    return nodes_;
  }

 private:
  std::uint8_t& mark(Site s) {
    return marks_[static_cast<std::size_t>(s.y + radius_) * static_cast<std::size_t>(side_) +
                  static_cast<std::size_t>(s.x + radius_)];
  }

  // `steps` steps have been taken to reach `cur`.
  bool feasible(Site cur, int steps, bool crossed_negative_axis) const {
    if (chebyshev(cur, kOrigin) >= radius_) return false;
    if (crossed_negative_axis) return steps + chebyshev(cur, start_) <= k_max_;
    // Still has to visit some (t, 0) with t <= -1; (-1, 0) is the cheapest.
    const std::int64_t to_axis = std::max<std::int64_t>(std::int64_t{cur.x} + 1, cur.y < 0 ? -cur.y : cur.y);
    return steps + to_axis + (l_ + 1) <= k_max_;
  }

  template <class OnCircuit>
  void extend(int prev_dir, bool crossed, OnCircuit& on_circuit) {
    ++nodes_;
    const Site cur = path_.back();
    const int steps = static_cast<int>(path_.size()) - 1;
    // A nearer ray site may be touched but not left by a first-set step.
    const bool nearer_ray = cur.y == 0 && cur.x >= 1 && cur.x < l_;
    // Close the walk if the start is one step away.
    if (steps + 1 >= 4 && crossed && phibar_adjacent(cur, start_)) {
      const int close_dir = direction_index(start_ - cur);
      if (admissible_turn(rule_, prev_dir, close_dir) && admissible_turn(rule_, close_dir, first_dir_) &&
          !(nearer_ray && close_dir <= 3) && winding_number(path_, kOrigin) != 0) {
        on_circuit(std::span<const Site>(path_));
      }
    }
    if (steps + 1 >= k_max_) return;
    for (int d = 0; d < 8; ++d) {
      if (!admissible_turn(rule_, prev_dir, d)) continue;
      if (nearer_ray && d <= 3) continue;
      const Site next = cur + kDirections[static_cast<std::size_t>(d)];
      if (chebyshev(next, kOrigin) >= radius_) continue;
      auto& m = mark(next);
      if (m) continue;
      const bool now_crossed = crossed || (next.y == 0 && next.x < 0);
      if (!feasible(next, steps + 1, now_crossed)) continue;
      m = 1;
      path_.push_back(next);
      extend(d, now_crossed, on_circuit);
      path_.pop_back();
      m = 0;
    }
  }

  int k_max_;
  ContinuationRule rule_;
  std::int32_t radius_ = 0;
  std::int32_t side_ = 0;
  std::vector<std::uint8_t> marks_;
  std::vector<Site> path_;
  Site start_{};
  int l_ = 0;
  int first_dir_ = 0;
  std::uint64_t nodes_ = 0;
};

/// All (l, i) classes that can hold a circuit of length <= k_max.
inline std::vector<ClassKey> circuit_classes(int k_max) {
  std::vector<ClassKey> out;
  for (int l = 1; l <= CircuitEnumerator::max_ray_distance(k_max); ++l)
    for (int i = 1; i <= 4; ++i) out.push_back({l, i});
  return out;
}

struct CircuitCounts {
  int k_max = 0;
  ContinuationRule rule = ContinuationRule::five;
  std::map<int, std::uint64_t> walks;  // closed walks by length
  std::map<int, std::uint64_t> sets;   // distinct site sets by length
};

/// Exact packed form of a sorted site set of at most 20 sites with
/// coordinates in [-32, 31]; used to deduplicate circuits across classes.
using PackedSiteSet = std::array<std::uint64_t, 4>;

inline PackedSiteSet pack_site_set(std::span<const Site> sorted) {
  PackedSiteSet out{};
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    const auto code = static_cast<std::uint64_t>(((sorted[j].x + 32) & 63) << 6 | ((sorted[j].y + 32) & 63));
    out[j / 5] |= code << (12 * (j % 5));
  }
  return out;
}

/// Counts self-avoiding enclosing circuits under `rule`. Work is split over
/// the (l, i) classes. One site set can carry several circuits with
/// different class sites, so distinct sets are merged across all classes.
inline CircuitCounts self_avoiding_circuit_count(int k_max, ContinuationRule rule = ContinuationRule::five,
                                                 unsigned threads = 1) {
  if (k_max < 4) throw InvalidArgument("k_max must be >= 4");
  if (k_max > 20) throw CapExceeded("circuit enumeration is limited to k_max <= 20");
  const auto classes = circuit_classes(k_max);

  struct Partial {
    std::map<int, std::uint64_t> walks;
    std::map<int, std::vector<PackedSiteSet>> sets;
  };
  auto parts = parallel_tasks<Partial>(threads, classes.size(), [&](std::size_t task) {
    Partial out;
    ContourKey key;
    CircuitEnumerator e(k_max, rule);
    e.run(classes[task], [&](std::span<const Site> cycle) {
      const int k = static_cast<int>(cycle.size());
      ++out.walks[k];
      key.assign(cycle.begin(), cycle.end());
      std::sort(key.begin(), key.end());
      out.sets[k].push_back(pack_site_set(key));
    });
    for (auto& [k, v] : out.sets) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
  });

  CircuitCounts res;
  res.k_max = k_max;
  res.rule = rule;
  for (int k = 4; k <= k_max; ++k) {
    res.walks[k] = 0;
    std::vector<PackedSiteSet> merged;
    for (auto& p : parts) {
      if (const auto it = p.walks.find(k); it != p.walks.end()) res.walks[k] += it->second;
      if (auto it = p.sets.find(k); it != p.sets.end()) {
        merged.insert(merged.end(), it->second.begin(), it->second.end());
        std::vector<PackedSiteSet>().swap(it->second);
      }
    }
    std::sort(merged.begin(), merged.end());
    res.sets[k] = static_cast<std::uint64_t>(std::unique(merged.begin(), merged.end()) - merged.begin());
  }
  return res;
}

/// Outer-boundary contours of length <= k_max found by the circuit route:
/// every realised outer boundary is a self-avoiding enclosing circuit, and a
/// circuit is kept iff some cluster has it as its outer boundary.
inline std::set<ContourKey> realizable_contours(int k_max, unsigned threads = 1) {
  const auto classes = circuit_classes(k_max);
  auto parts = parallel_tasks<std::set<ContourKey>>(threads, classes.size(), [&](std::size_t task) {
    std::set<ContourKey> found;
    std::set<ContourKey> rejected;
    ContourKey key;
    CircuitEnumerator e(k_max, ContinuationRule::seven);
    e.run(classes[task], [&](std::span<const Site> cycle) {
      key.assign(cycle.begin(), cycle.end());
      std::sort(key.begin(), key.end());
      if (found.count(key) || rejected.count(key)) return;
      if (maximal_cluster_with_boundary(key)) {
        found.insert(key);
      } else if (rejected.size() < 4'000'000) {
        rejected.insert(key);
      }
    });
    return found;
  });
  std::set<ContourKey> all;
  for (auto& p : parts) all.insert(p.begin(), p.end());
  return all;
}

// ---------------------------------------------------------------------------
// Count table

struct CountTable {
  int k_max = 0;
  ContinuationRule rule = ContinuationRule::five;
  std::size_t cluster_cap = 0;
  bool certified = false;
  std::map<int, BigInt> exact;        // S_k
  std::map<int, BigInt> sa_walk;      // closed walks under the continuation rule
  std::map<int, BigInt> sa_sets;      // same, deduplicated by site set
  std::map<int, BigInt> walk_bound;   // 4 * 5^(k-2) * (k-1)
  std::map<std::tuple<int, int, int>, BigInt> classes;  // (k, l, i) -> |C_l^(i)| at length k
};

struct ExactOptions {
  std::size_t cluster_cap = 0;      // 0: smallest cap that certifies
  std::size_t max_auto_cap = 16;
  bool certify = true;
  unsigned threads = 1;
  std::uint64_t safety_limit = 2'000'000'000ULL;
};

struct ExactCounts {
  ContourCatalog catalog;
  std::map<int, BigInt> exact;
  std::map<std::tuple<int, int, int>, BigInt> classes;
  bool certified = false;
};

inline ExactCounts tabulate(ContourCatalog catalog, int k_max) {
  ExactCounts out;
  for (int k = 1; k <= k_max; ++k) out.exact[k] = 0;
  for (const auto& [key, rec] : catalog.contours) {
    const int k = static_cast<int>(rec.length());
    if (k > k_max) continue;
    out.exact[k] += 1;
    out.classes[{k, rec.key.l, rec.key.i}] += 1;
  }
  out.catalog = std::move(catalog);
  return out;
}

/// True iff the catalog holds exactly the realisable contours up to k_max.
inline bool catalog_matches(const ContourCatalog& cat, const std::set<ContourKey>& realizable, int k_max) {
  std::size_t n = 0;
  for (const auto& [key, rec] : cat.contours) {
    if (static_cast<int>(rec.length()) > k_max) continue;
    ++n;
    if (!realizable.count(key)) return false;
  }
  return n == realizable.size();
}

/// S_k for 1 <= k <= k_max from the cluster route, certified against the
/// circuit route. With cluster_cap == 0 the cap is raised from k_max - 4
/// until the two routes agree; an explicit cap that does not certify throws
/// IncompletenessError.
inline ExactCounts exact_contour_counts(int k_max, const ExactOptions& opts = {}) {
  if (k_max < 4) throw InvalidArgument("k_max must be >= 4");
  const CatalogOptions copts{opts.threads, opts.safety_limit};
  const auto length = static_cast<std::size_t>(k_max);

  std::set<ContourKey> realizable;
  if (opts.certify) realizable = realizable_contours(k_max, opts.threads);

  if (opts.cluster_cap != 0) {
    auto result = tabulate(build_contour_catalog(opts.cluster_cap, length, copts), k_max);
    if (opts.certify) {
      result.certified = catalog_matches(result.catalog, realizable, k_max);
      if (result.certified) result.catalog.certified_length = length;
      if (!result.certified) {
        throw IncompletenessError("cluster cap " + std::to_string(opts.cluster_cap) +
                                  " misses outer boundaries of length <= " + std::to_string(k_max));
      }
    }
    return result;
  }
  if (!opts.certify) throw InvalidArgument("an automatic cluster cap requires certification");
  for (std::size_t cap = static_cast<std::size_t>(std::max(1, k_max - 4)); cap <= opts.max_auto_cap; ++cap) {
    auto result = tabulate(build_contour_catalog(cap, length, copts), k_max);
    if (catalog_matches(result.catalog, realizable, k_max)) {
      result.certified = true;
      result.catalog.certified_length = length;
      return result;
    }
  }
  throw IncompletenessError("no cluster cap up to " + std::to_string(opts.max_auto_cap) +
                            " certifies S_k for k <= " + std::to_string(k_max));
}

/// Exact counts up to k_exact, circuit counts under `rule` up to k_sa and the
/// analytic walk bound over the union of both ranges.
inline CountTable count_table(int k_exact, int k_sa, ContinuationRule rule, const ExactOptions& opts = {}) {
  CountTable t;
  t.k_max = std::max(k_exact, k_sa);
  t.rule = rule;
  const auto ex = exact_contour_counts(k_exact, opts);
  t.cluster_cap = ex.catalog.cluster_cap;
  t.certified = ex.certified;
  for (const auto& [k, v] : ex.exact)
    if (k >= 4) t.exact[k] = v;
  t.classes = ex.classes;
  const auto sa = self_avoiding_circuit_count(k_sa, rule, opts.threads);
  for (const auto& [k, v] : sa.walks) t.sa_walk[k] = v;
  for (const auto& [k, v] : sa.sets) t.sa_sets[k] = v;
  for (int k = 4; k <= t.k_max; ++k) t.walk_bound[k] = walk_bound(k);
  return t;
}

}  // namespace peierls
