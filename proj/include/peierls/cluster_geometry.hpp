#pragma once

// Clusters, their site boundaries and outer-boundary contours.
//
// For a finite phi-connected set W the site boundary Wbar is the set of
// sites outside W that are phi-adjacent to W. The outer boundary gamma(W) is
// the part of Wbar that can reach infinity along a phi-path meeting W u Wbar
// only at its first site; equivalently, the Wbar sites phi-adjacent to the
// unbounded phi-component of the complement of W u Wbar.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "peierls/errors.hpp"
#include "peierls/lattice.hpp"

namespace peierls {

/// Integer winding number of the closed polygon through `cycle` around `p`.
/// `p` must not be a vertex. Exact in 64-bit arithmetic.
inline int winding_number(std::span<const Site> cycle, Site p) {
  const std::size_t n = cycle.size();
  int wn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Site a = cycle[i];
    const Site b = cycle[(i + 1) % n];
    const std::int64_t cross = (std::int64_t{b.x} - a.x) * (std::int64_t{p.y} - a.y) -
                               (std::int64_t{p.x} - a.x) * (std::int64_t{b.y} - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && cross > 0) ++wn;
    } else if (b.y <= p.y && cross < 0) {
      --wn;
    }
  }
  return wn;
}

struct Cluster {
  std::vector<Site> sites;     // W, sorted
  std::vector<Site> boundary;  // Wbar, sorted
  Site origin{};

  std::size_t size() const { return sites.size(); }
};

struct EmptySite {
  Site site{};
};

struct EscapesWindow {
  Site site{};
};

using ClusterResult = std::variant<Cluster, EmptySite, EscapesWindow>;

/// A closed phibar-connected contour. `sites` is the canonical sorted set,
/// `cycle` the counter-clockwise site order (a witness, not part of identity).
struct Contour {
  std::vector<Site> sites;
  std::vector<Site> cycle;

  std::size_t length() const { return sites.size(); }
  friend bool operator==(const Contour& a, const Contour& b) { return a.sites == b.sites; }
};

/// Sorted set of sites phi-adjacent to `w` but not in it. `w` must be sorted.
inline std::vector<Site> site_boundary(std::span<const Site> w) {
  std::vector<Site> out;
  out.reserve(4 * w.size());
  for (const Site s : w) {
    for (const Site n : phi_neighbors(s)) {
      if (!std::binary_search(w.begin(), w.end(), n)) out.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Reusable scratch space for boundary computations on small clusters.
///
/// compute() rasterises W into a local grid padded by 3 cells, labels Wbar,
/// flood-fills the exterior from the grid border and traces the boundary
/// between the exterior and the filled region with the region on the left.
/// The trace visits the outer boundary sites counter-clockwise; the sequence
/// of distinct left-hand cells is the contour cycle.
class BoundaryTracer {
 public:
  enum : std::uint8_t { kFree = 0, kCluster = 1, kBoundary = 2, kExterior = 3, kVisited = 4 };

  struct Result {
    std::size_t boundary_size = 0;  // |Wbar|
    std::vector<Site> cycle;        // gamma(W), counter-clockwise
    std::size_t outer_count = 0;    // |gamma(W)| counted on the grid
  };

  /// `w` need not be sorted. Throws if the traced cycle is not a simple
  /// enumeration of the outer boundary.
  const Result& compute(std::span<const Site> w) {
    if (w.empty()) throw EmptyCluster();
    std::int32_t xmin = w[0].x, xmax = w[0].x, ymin = w[0].y, ymax = w[0].y;
    for (const Site s : w) {
      xmin = std::min(xmin, s.x);
      xmax = std::max(xmax, s.x);
      ymin = std::min(ymin, s.y);
      ymax = std::max(ymax, s.y);
    }
    // Wbar lies within one cell of the box; the extra two cells give the
    // exterior a connected ring around everything.
    x0_ = xmin - kPad;
    y0_ = ymin - kPad;
    width_ = (xmax - xmin) + 2 * kPad + 1;
    height_ = (ymax - ymin) + 2 * kPad + 1;
    grid_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), kFree);

    for (const Site s : w) at(s) = kCluster;
    result_.boundary_size = 0;
    for (const Site s : w) {
      for (const Site n : phi_neighbors(s)) {
        auto& cell = at(n);
        if (cell == kFree) {
          cell = kBoundary;
          ++result_.boundary_size;
        }
      }
    }

    flood_exterior();

    result_.outer_count = 0;
    Site start{0, 0};
    bool have_start = false;
    for (std::int32_t y = 0; y < height_; ++y) {
      for (std::int32_t x = 0; x < width_; ++x) {
        const Site s{x0_ + x, y0_ + y};
        if (at(s) != kBoundary) continue;
        if (touches_exterior(s)) ++result_.outer_count;
        if (!have_start && at(s + kDirections[6]) == kExterior) {
          start = s;
          have_start = true;
        }
      }
    }
    trace(start);

    bool simple = result_.cycle.size() == result_.outer_count;
    for (const Site s : result_.cycle) {
      auto& cell = at(s);
      if (cell != kBoundary) simple = false;
      cell = kVisited;
    }
    for (const Site s : result_.cycle) at(s) = kBoundary;
    if (!simple) throw Error("outer boundary trace is not a simple cycle");
    return result_;
  }

  const Result& result() const { return result_; }

 private:
  static constexpr std::int32_t kPad = 3;

  std::uint8_t& at(Site s) {
    return grid_[static_cast<std::size_t>(s.y - y0_) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(s.x - x0_)];
  }

  bool filled(Site s) { return at(s) != kExterior; }

  bool touches_exterior(Site s) {
    for (const Site n : phi_neighbors(s)) {
      if (at(n) == kExterior) return true;
    }
    return false;
  }

  void flood_exterior() {
    stack_.clear();
    const Site corner{x0_, y0_};
    at(corner) = kExterior;
    stack_.push_back(corner);
    while (!stack_.empty()) {
      const Site s = stack_.back();
      stack_.pop_back();
      for (const Site n : phi_neighbors(s)) {
        if (n.x < x0_ || n.y < y0_ || n.x >= x0_ + width_ || n.y >= y0_ + height_) continue;
        auto& cell = at(n);
        if (cell == kFree) {
          cell = kExterior;
          stack_.push_back(n);
        }
      }
    }
  }

  // Walk the edges separating filled cells (left) from exterior cells (right).
  // `start` is the lowest-then-leftmost filled cell, so the edge below it is
  // a boundary edge traversed eastwards.
  void trace(Site start) {
    result_.cycle.clear();
    Site left = start;
    int dir = 0;  // E
    do {
      if (result_.cycle.empty() || result_.cycle.back() != left) result_.cycle.push_back(left);
      const Site ahead = kDirections[static_cast<std::size_t>(dir)];
      const Site right = kDirections[static_cast<std::size_t>((dir + 6) % 8)];
      const Site front_left = left + ahead;
      const Site front_right = left + right + ahead;
      if (filled(front_right)) {
        left = front_right;
        dir = (dir + 6) % 8;
      } else if (filled(front_left)) {
        left = front_left;
      } else {
        dir = (dir + 2) % 8;
      }
      if (result_.cycle.size() > grid_.size()) throw Error("boundary trace did not close");
    } while (!(left == start && dir == 0));
    if (result_.cycle.size() > 1 && result_.cycle.back() == result_.cycle.front()) {
      result_.cycle.pop_back();
    }
  }

  std::int32_t x0_ = 0, y0_ = 0, width_ = 0, height_ = 0;
  std::vector<std::uint8_t> grid_;
  std::vector<Site> stack_;
  Result result_;
};

enum class Traversal { breadth_first, depth_first };

/// The cluster of occupied sites (u < c) containing `s`. Returns EmptySite if
/// `s` is vacant and EscapesWindow if the cluster reaches the window border.
inline ClusterResult cluster_at(const CoupledField& field, double c, Site s,
                                Traversal order = Traversal::breadth_first) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
  const Window& win = field.window();
  if (!win.contains(s)) throw SiteOutsideWindow(s.x, s.y);
  if (!field.occupied(s, c)) return EmptySite{s};

  std::vector<std::uint8_t> seen(win.site_count(), 0);
  std::vector<Site> frontier{s};
  std::vector<Site> members;
  seen[win.index(s)] = 1;
  std::size_t head = 0;
  bool escapes = false;
  while (head < frontier.size()) {
    Site cur;
    if (order == Traversal::breadth_first) {
      cur = frontier[head++];
    } else {
      cur = frontier.back();
      frontier.pop_back();
    }
    members.push_back(cur);
    if (win.on_border(cur)) escapes = true;
    for (const Site n : phi_neighbors(cur)) {
      if (!win.contains(n)) continue;
      auto& mark = seen[win.index(n)];
      if (mark || !field.occupied(n, c)) continue;
      mark = 1;
      frontier.push_back(n);
    }
  }
  if (escapes) return EscapesWindow{s};
  std::sort(members.begin(), members.end());
  Cluster out;
  out.boundary = site_boundary(members);
  out.sites = std::move(members);
  out.origin = s;
  return out;
}

/// Builds a Cluster from an explicit site set (tests, enumeration).
inline Cluster make_cluster(std::vector<Site> sites, Site origin = kOrigin) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  Cluster out;
  out.boundary = site_boundary(sites);
  out.sites = std::move(sites);
  out.origin = origin;
  return out;
}

inline Contour outer_boundary(const Cluster& w) {
  if (w.sites.empty()) throw EmptyCluster();
  BoundaryTracer tracer;
  const auto& r = tracer.compute(w.sites);
  Contour out;
  out.cycle = r.cycle;
  out.sites = r.cycle;
  std::sort(out.sites.begin(), out.sites.end());
  return out;
}

/// Sites strictly enclosed by a site set: those not on `gamma` and not in the
/// unbounded phi-component of its complement. Sorted.
inline std::vector<Site> enclosed_sites(std::span<const Site> gamma) {
  if (gamma.empty()) return {};
  std::int32_t xmin = gamma[0].x, xmax = gamma[0].x, ymin = gamma[0].y, ymax = gamma[0].y;
  for (const Site s : gamma) {
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
    ymin = std::min(ymin, s.y);
    ymax = std::max(ymax, s.y);
  }
  const std::int32_t x0 = xmin - 1, y0 = ymin - 1;
  const std::int32_t w = xmax - xmin + 3, h = ymax - ymin + 3;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  auto at = [&](Site s) -> std::uint8_t& {
    return grid[static_cast<std::size_t>(s.y - y0) * static_cast<std::size_t>(w) +
                static_cast<std::size_t>(s.x - x0)];
  };
  for (const Site s : gamma) at(s) = 1;
  std::vector<Site> stack{{x0, y0}};
  at({x0, y0}) = 2;
  while (!stack.empty()) {
    const Site s = stack.back();
    stack.pop_back();
    for (const Site n : phi_neighbors(s)) {
      if (n.x < x0 || n.y < y0 || n.x >= x0 + w || n.y >= y0 + h) continue;
      if (at(n) == 0) {
        at(n) = 2;
        stack.push_back(n);
      }
    }
  }
  std::vector<Site> out;
  for (std::int32_t x = x0; x < x0 + w; ++x) {
    for (std::int32_t y = y0; y < y0 + h; ++y) {
      if (at({x, y}) == 0) out.push_back({x, y});
    }
  }
  return out;
}

/// The largest cluster containing `origin` whose outer boundary is `gamma`,
/// if any cluster has that outer boundary.
///
/// If gamma = gamma(W) for some W containing the origin then the phi-component
/// of the origin inside the enclosed region, W*, contains W and satisfies
/// Wbar* = gamma; conversely that condition together with every gamma site
/// touching the exterior makes gamma(W*) = gamma. So the test is exact.
inline std::optional<Cluster> maximal_cluster_with_boundary(std::span<const Site> gamma,
                                                            Site origin = kOrigin) {
  std::vector<Site> sorted(gamma.begin(), gamma.end());
  std::sort(sorted.begin(), sorted.end());
  const auto inside = enclosed_sites(sorted);
  if (!std::binary_search(inside.begin(), inside.end(), origin)) return std::nullopt;

  std::vector<Site> component{origin};
  std::vector<std::uint8_t> taken(inside.size(), 0);
  auto slot = [&](Site s) -> std::ptrdiff_t {
    const auto it = std::lower_bound(inside.begin(), inside.end(), s);
    return (it != inside.end() && *it == s) ? it - inside.begin() : -1;
  };
  taken[static_cast<std::size_t>(slot(origin))] = 1;
  for (std::size_t head = 0; head < component.size(); ++head) {
    for (const Site n : phi_neighbors(component[head])) {
      const auto k = slot(n);
      if (k >= 0 && !taken[static_cast<std::size_t>(k)]) {
        taken[static_cast<std::size_t>(k)] = 1;
        component.push_back(n);
      }
    }
  }
  Cluster w = make_cluster(std::move(component), origin);
  if (w.boundary != sorted) return std::nullopt;

  // Every gamma site must also see the exterior, i.e. have a phi-neighbour
  // that is neither on gamma nor enclosed.
  for (const Site s : sorted) {
    bool sees_outside = false;
    for (const Site n : phi_neighbors(s)) {
      if (!std::binary_search(sorted.begin(), sorted.end(), n) &&
          !std::binary_search(inside.begin(), inside.end(), n)) {
        sees_outside = true;
      }
    }
    if (!sees_outside) return std::nullopt;
  }
  return w;
}

struct EventExponents {
  std::size_t occupied = 0;  // |W|
  std::size_t vacant = 0;    // |Wbar|
};

inline EventExponents event_exponents(const Cluster& w) { return {w.sites.size(), w.boundary.size()}; }

/// P{A(x, W)} = c^|W| (1 - c)^|Wbar|.
inline double cluster_event_probability(const Cluster& w, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
  const auto e = event_exponents(w);
  return std::pow(c, static_cast<double>(e.occupied)) * std::pow(1.0 - c, static_cast<double>(e.vacant));
}

}  // namespace peierls
