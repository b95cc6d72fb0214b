#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "peierls/cluster_geometry.hpp"
#include "peierls/contour_enumeration.hpp"

using namespace peierls;

namespace {

using SiteSet = std::set<Site>;

// Plain set-based oracle for gamma(W): flood the complement of W u Wbar from
// outside a generous box, keep the Wbar sites that touch the flood.
SiteSet outer_boundary_oracle(const SiteSet& w) {
  SiteSet wbar;
  for (const Site s : w)
    for (const Site n : phi_neighbors(s))
      if (!w.count(n)) wbar.insert(n);
  int lo = 0, hi = 0;
  for (const Site s : wbar) {
    lo = std::min({lo, s.x, s.y});
    hi = std::max({hi, s.x, s.y});
  }
  lo -= 2;
  hi += 2;
  SiteSet outside{{lo, lo}};
  std::vector<Site> stack{{lo, lo}};
  while (!stack.empty()) {
    const Site s = stack.back();
    stack.pop_back();
    for (const Site n : phi_neighbors(s)) {
      if (n.x < lo || n.y < lo || n.x > hi || n.y > hi) continue;
      if (w.count(n) || wbar.count(n) || outside.count(n)) continue;
      outside.insert(n);
      stack.push_back(n);
    }
  }
  SiteSet gamma;
  for (const Site s : wbar)
    for (const Site n : phi_neighbors(s))
      if (outside.count(n)) gamma.insert(s);
  return gamma;
}

SiteSet as_set(const std::vector<Site>& v) { return {v.begin(), v.end()}; }

// Field whose origin is occupied and all four neighbours vacant at c = 1/2.
std::uint64_t isolated_origin_seed() {
  for (std::uint64_t seed = 0;; ++seed) {
    if (!(field_value(seed, kOrigin) < 0.5)) continue;
    bool isolated = true;
    for (const Site n : phi_neighbors(kOrigin)) isolated = isolated && !(field_value(seed, n) < 0.5);
    if (isolated) return seed;
  }
}

}  // namespace

TEST(Winding, DiamondAroundOrigin) {
  const std::vector<Site> ccw{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::vector<Site> cw(ccw.rbegin(), ccw.rend());
  EXPECT_EQ(winding_number(ccw, kOrigin), 1);
  EXPECT_EQ(winding_number(cw, kOrigin), -1);
  EXPECT_EQ(winding_number(ccw, {5, 5}), 0);
  EXPECT_EQ(winding_number(ccw, {2, 0}), 0);
}

TEST(ClusterAt, IsolatedOrigin) {
  const CoupledField f(Window(4), isolated_origin_seed());
  const auto r = cluster_at(f, 0.5, kOrigin);
  ASSERT_TRUE(std::holds_alternative<Cluster>(r));
  const auto& w = std::get<Cluster>(r);
  EXPECT_EQ(w.sites, std::vector<Site>{kOrigin});
  const auto n = phi_neighbors(kOrigin);
  EXPECT_EQ(as_set(w.boundary), SiteSet(n.begin(), n.end()));
}

TEST(ClusterAt, FullAndEmptyWindows) {
  const CoupledField f(Window(5), 3);
  EXPECT_TRUE(std::holds_alternative<EscapesWindow>(cluster_at(f, 1.0, kOrigin)));
  EXPECT_TRUE(std::holds_alternative<EmptySite>(cluster_at(f, 0.0, kOrigin)));
  EXPECT_THROW(cluster_at(f, 0.5, {6, 0}), SiteOutsideWindow);
  EXPECT_THROW(cluster_at(f, 1.5, kOrigin), InvalidArgument);
}

TEST(ClusterAt, MatchesLabelingOracleAndTraversalOrder) {
  const Window win(6);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const CoupledField f(win, seed);
    for (double c : {0.45, 0.59, 0.7}) {
      const auto bfs = cluster_at(f, c, kOrigin, Traversal::breadth_first);
      const auto dfs = cluster_at(f, c, kOrigin, Traversal::depth_first);
      ASSERT_EQ(bfs.index(), dfs.index());

      // Oracle: grow the occupied component with a set.
      SiteSet comp;
      if (f.occupied(kOrigin, c)) {
        comp.insert(kOrigin);
        std::vector<Site> todo{kOrigin};
        while (!todo.empty()) {
          const Site s = todo.back();
          todo.pop_back();
          for (const Site n : phi_neighbors(s))
            if (win.contains(n) && f.occupied(n, c) && comp.insert(n).second) todo.push_back(n);
        }
      }
      const bool escapes = std::any_of(comp.begin(), comp.end(), [&](Site s) { return win.on_border(s); });
      if (comp.empty()) {
        EXPECT_TRUE(std::holds_alternative<EmptySite>(bfs));
      } else if (escapes) {
        EXPECT_TRUE(std::holds_alternative<EscapesWindow>(bfs));
      } else {
        ASSERT_TRUE(std::holds_alternative<Cluster>(bfs));
        EXPECT_EQ(as_set(std::get<Cluster>(bfs).sites), comp);
        EXPECT_EQ(std::get<Cluster>(bfs).sites, std::get<Cluster>(dfs).sites);
        EXPECT_EQ(std::get<Cluster>(bfs).boundary, std::get<Cluster>(dfs).boundary);
      }
    }
  }
}

TEST(Boundary, Domino) {
  const Cluster w = make_cluster({{0, 0}, {1, 0}});
  EXPECT_EQ(w.boundary.size(), 6u);
  const SiteSet want{{-1, 0}, {2, 0}, {0, 1}, {1, 1}, {0, -1}, {1, -1}};
  EXPECT_EQ(as_set(w.boundary), want);
  const Contour g = outer_boundary(w);
  EXPECT_EQ(as_set(g.sites), want);
  EXPECT_EQ(g.length(), 6u);
}

TEST(Boundary, SingleSiteIsDiamond) {
  const Contour g = outer_boundary(make_cluster({kOrigin}));
  ASSERT_EQ(g.length(), 4u);
  EXPECT_EQ(winding_number(g.cycle, kOrigin), 1);
}

TEST(Boundary, RingExcludesHole) {
  std::vector<Site> ring;
  for (int x = 0; x <= 2; ++x)
    for (int y = 0; y <= 2; ++y)
      if (!(x == 1 && y == 1)) ring.push_back({x, y});
  const Cluster w = make_cluster(ring);
  EXPECT_EQ(w.boundary.size(), 13u);
  const Contour g = outer_boundary(w);
  EXPECT_EQ(g.length(), 12u);
  EXPECT_FALSE(as_set(g.sites).count({1, 1}));
  EXPECT_TRUE(as_set(w.boundary).count({1, 1}));
  EXPECT_EQ(as_set(g.sites), outer_boundary_oracle(as_set(ring)));
}

TEST(Boundary, EmptyClusterThrows) { EXPECT_THROW(outer_boundary(Cluster{}), EmptyCluster); }

// Every cluster up to size 8: gamma(W) matches the oracle, is a closed
// counter-clockwise phibar cycle around the origin, and its maximal cluster
// contains W and has the same outer boundary.
TEST(Boundary, AllSmallClustersAgainstOracle) {
  std::uint64_t checked = 0;
  enumerate_origin_clusters(8, [&](std::span<const Site> sites) {
    const Cluster w = make_cluster({sites.begin(), sites.end()});
    ASSERT_GE(w.boundary.size(), 4u);
    const Contour g = outer_boundary(w);
    const SiteSet gamma = as_set(g.sites);
    ASSERT_EQ(gamma, outer_boundary_oracle(as_set(w.sites)));
    ASSERT_EQ(g.cycle.size(), g.sites.size());
    ASSERT_GE(g.length(), 4u);
    for (const Site s : gamma) ASSERT_TRUE(std::binary_search(w.boundary.begin(), w.boundary.end(), s));
    for (std::size_t i = 0; i < g.cycle.size(); ++i)
      ASSERT_TRUE(phibar_adjacent(g.cycle[i], g.cycle[(i + 1) % g.cycle.size()]));
    ASSERT_EQ(winding_number(g.cycle, kOrigin), 1);

    const auto star = maximal_cluster_with_boundary(g.sites);
    ASSERT_TRUE(star.has_value());
    for (const Site s : w.sites) ASSERT_TRUE(std::binary_search(star->sites.begin(), star->sites.end(), s));
    ASSERT_EQ(outer_boundary(*star).sites, g.sites);
    ++checked;
  });
  EXPECT_EQ(checked, 1u + 4 + 18 + 76 + 315 + 1296 + 5320 + 21800);
}

TEST(Boundary, MaximalClusterRejectsNonContours) {
  // Diamond around (5, 5) does not enclose the origin.
  const std::vector<Site> far{{6, 5}, {5, 6}, {4, 5}, {5, 4}};
  EXPECT_FALSE(maximal_cluster_with_boundary(far).has_value());
  // A square ring of phi-adjacent sites: the enclosed 3x3 block has a larger
  // boundary than the ring itself reaches.
  std::vector<Site> square;
  for (int t = -2; t <= 2; ++t) {
    square.push_back({t, -2});
    square.push_back({t, 2});
    if (t != -2 && t != 2) {
      square.push_back({-2, t});
      square.push_back({2, t});
    }
  }
  EXPECT_FALSE(maximal_cluster_with_boundary(square).has_value());
}

TEST(EventProbability, Basics) {
  const Cluster one = make_cluster({kOrigin});
  EXPECT_DOUBLE_EQ(cluster_event_probability(one, 0.5), 1.0 / 32.0);
  EXPECT_EQ(cluster_event_probability(one, 1.0), 0.0);
  const auto e = event_exponents(make_cluster({{0, 0}, {1, 0}}));
  EXPECT_EQ(e.occupied, 2u);
  EXPECT_EQ(e.vacant, 6u);
  EXPECT_THROW(cluster_event_probability(one, -0.1), InvalidArgument);
}

// Gamma(W) is contained in Wbar, so every event weight is dominated by
// c^|W| (1-c)^|gamma|.
TEST(EventProbability, DominatedByContourWeight) {
  enumerate_origin_clusters(6, [&](std::span<const Site> sites) {
    const Cluster w = make_cluster({sites.begin(), sites.end()});
    const Contour g = outer_boundary(w);
    for (double c : {0.1, 0.5, 0.9})
      ASSERT_LE(cluster_event_probability(w, c),
                std::pow(c, double(w.size())) * std::pow(1 - c, double(g.length())) * (1 + 1e-12));
  });
}

// Exhaustive 4x4 window with the origin at grid position (1, 1): the exact
// probability of each finite origin cluster, summed over all 2^16
// configurations, equals c^|W| (1-c)^|Wbar|, and together with the vacant and
// escaping events the total is 1.
TEST(EventProbability, ExhaustiveFourByFourWindow) {
  const double c = 0.2;
  const int side = 4;
  auto inside = [&](Site s) { return s.x >= -1 && s.x <= 2 && s.y >= -1 && s.y <= 2; };
  auto border = [&](Site s) { return s.x == -1 || s.x == 2 || s.y == -1 || s.y == 2; };
  auto bit = [&](Site s) { return (s.y + 1) * side + (s.x + 1); };

  std::map<std::vector<Site>, double> finite;
  double vacant = 0, escapes = 0;
  for (std::uint32_t cfg = 0; cfg < (1u << 16); ++cfg) {
    const int n = __builtin_popcount(cfg);
    const double p = std::pow(c, n) * std::pow(1 - c, 16 - n);
    auto occ = [&](Site s) { return inside(s) && ((cfg >> bit(s)) & 1u); };
    if (!occ(kOrigin)) {
      vacant += p;
      continue;
    }
    SiteSet comp{kOrigin};
    std::vector<Site> todo{kOrigin};
    while (!todo.empty()) {
      const Site s = todo.back();
      todo.pop_back();
      for (const Site m : phi_neighbors(s))
        if (occ(m) && comp.insert(m).second) todo.push_back(m);
    }
    if (std::any_of(comp.begin(), comp.end(), border)) {
      escapes += p;
    } else {
      finite[{comp.begin(), comp.end()}] += p;
    }
  }
  EXPECT_NEAR(vacant, 1 - c, 1e-12);

  double total = vacant + escapes;
  std::size_t matched = 0;
  enumerate_origin_clusters(4, [&](std::span<const Site> sites) {
    const Cluster w = make_cluster({sites.begin(), sites.end()});
    const bool interior = std::all_of(w.sites.begin(), w.sites.end(), [&](Site s) { return inside(s) && !border(s); });
    if (!interior) return;
    const auto it = finite.find(w.sites);
    ASSERT_NE(it, finite.end());
    EXPECT_NEAR(it->second, cluster_event_probability(w, c), 1e-12);
    total += cluster_event_probability(w, c);
    ++matched;
  });
  EXPECT_EQ(matched, finite.size());
  EXPECT_NEAR(total, 1.0, 1e-12);
}
