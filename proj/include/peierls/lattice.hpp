#pragma once

// Square-lattice geometry and the coupled random field.
//
// Sites live on Z^2 with unit spacing. Two adjacency relations are used
// throughout: phi (the four nearest neighbours) and phibar (phi plus the four
// diagonals, i.e. king moves). Directions are indexed counter-clockwise
// starting from east, and that order is used for every traversal in the
// library so that results never depend on hash or container order.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "peierls/errors.hpp"

namespace peierls {

struct Site {
  std::int32_t x{0};
  std::int32_t y{0};

  friend constexpr bool operator==(const Site&, const Site&) = default;
  // Lexicographic on (x, y); used for canonical contour keys.
  friend constexpr auto operator<=>(const Site&, const Site&) = default;

  constexpr Site operator+(const Site& o) const { return {x + o.x, y + o.y}; }
  constexpr Site operator-(const Site& o) const { return {x - o.x, y - o.y}; }
};

inline constexpr Site kOrigin{0, 0};
// Lattice basis in (x, y) coordinates: e1 points along the ray used for the
// contour class decomposition, e2 is perpendicular to it.
inline constexpr Site kE1{1, 0};
inline constexpr Site kE2{0, 1};

// E, NE, N, NW, W, SW, S, SE.
inline constexpr std::array<Site, 8> kDirections{{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

constexpr bool is_axis_direction(int d) { return (d & 1) == 0; }

constexpr int direction_index(Site step) {
  for (int d = 0; d < 8; ++d) {
    if (kDirections[static_cast<std::size_t>(d)] == step) return d;
  }
  return -1;
}

inline constexpr std::int64_t chebyshev(Site a, Site b) {
  const std::int64_t dx = a.x > b.x ? std::int64_t{a.x} - b.x : std::int64_t{b.x} - a.x;
  const std::int64_t dy = a.y > b.y ? std::int64_t{a.y} - b.y : std::int64_t{b.y} - a.y;
  return dx > dy ? dx : dy;
}

inline constexpr bool phi_adjacent(Site a, Site b) {
  const auto d = a - b;
  return (d.x == 0 && (d.y == 1 || d.y == -1)) || (d.y == 0 && (d.x == 1 || d.x == -1));
}

inline constexpr bool phibar_adjacent(Site a, Site b) { return a != b && chebyshev(a, b) == 1; }

/// The four phi-neighbours in the order E, N, W, S.
inline constexpr std::array<Site, 4> phi_neighbors(Site s) {
  return {{s + kDirections[0], s + kDirections[2], s + kDirections[4], s + kDirections[6]}};
}

/// The eight phibar-neighbours in the order E, NE, N, NW, W, SW, S, SE.
inline constexpr std::array<Site, 8> phibar_neighbors(Site s) {
  std::array<Site, 8> out{};
  for (std::size_t d = 0; d < 8; ++d) out[d] = s + kDirections[d];
  return out;
}

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    const auto packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 32) |
                        static_cast<std::uint32_t>(s.y);
    return std::hash<std::uint64_t>{}(packed * 0x9E3779B97F4A7C15ULL);
  }
};

/// Square window {(x, y) : max(|x|, |y|) <= radius} centred on the origin.
class Window {
 public:
  explicit Window(std::int32_t radius) : radius_(radius) {
    if (radius < 1) throw InvalidArgument("window radius must be >= 1");
  }

  std::int32_t radius() const { return radius_; }
  std::int32_t side() const { return 2 * radius_ + 1; }
  std::size_t site_count() const {
    return static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  }

  bool contains(Site s) const { return chebyshev(s, kOrigin) <= radius_; }
  bool on_border(Site s) const { return chebyshev(s, kOrigin) == radius_; }

  // Row-major index with (-L, -L) at 0.
  std::size_t index(Site s) const {
    return static_cast<std::size_t>(s.y + radius_) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(s.x + radius_);
  }
  Site site(std::size_t index) const {
    const auto w = static_cast<std::size_t>(side());
    return {static_cast<std::int32_t>(index % w) - radius_,
            static_cast<std::int32_t>(index / w) - radius_};
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::int32_t radius_;
};

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the output is a pure
// function of (key, counter), which is what makes field values independent of
// the window they are sampled in.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kM0 = 0xD2511F53u;
inline constexpr std::uint32_t kM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline constexpr Counter round(Counter c, Key k) {
  const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
  const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline constexpr Counter generate(Counter c, Key k) {
  for (int r = 0; r < 10; ++r) {
    c = round(c, k);
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

inline constexpr Key key_from(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace philox

/// Uniform double in [0, 1) with 53 random bits.
inline constexpr double to_unit_interval(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Seed of the independent field used by Monte Carlo trial `index`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  const auto out = philox::generate(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0xFFFFFFFFu,
       0x5EEDu},
      philox::key_from(seed));
  return std::uint64_t{out[0]} << 32 | out[1];
}

/// The value u(s) of the field with the given seed.
inline constexpr double field_value(std::uint64_t seed, Site s) {
  const auto out = philox::generate(
      {static_cast<std::uint32_t>(s.x), static_cast<std::uint32_t>(s.y), 0u, 0u},
      philox::key_from(seed));
  return to_unit_interval(out[0], out[1]);
}

/// Uniform field over a window, materialised row-major. Thresholding at c
/// (occupied iff u < c) gives the Bernoulli field of concentration c, and the
/// occupied sets are nested in c for a fixed field.
class CoupledField {
 public:
  CoupledField(Window window, std::uint64_t seed) : window_(window), seed_(seed) {
    values_.resize(window_.site_count());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = field_value(seed_, window_.site(i));
  }

  const Window& window() const { return window_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& values() const { return values_; }

  double value(Site s) const {
    if (!window_.contains(s)) throw SiteOutsideWindow(s.x, s.y);
    return values_[window_.index(s)];
  }
  bool occupied(Site s, double c) const { return value(s) < c; }

 private:
  Window window_;
  std::uint64_t seed_;
  std::vector<double> values_;
};

inline CoupledField sample_field(Window window, std::uint64_t seed) { return {window, seed}; }

}  // namespace peierls
