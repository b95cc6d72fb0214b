#pragma once

// Peierls series, tail bounds, threshold bounds and the truncated percolation
// polynomial.
//
// With zeta = 5(1 - c) and the walk bound 4 * 5^(k-2) * (k-1) on the number of
// contours of length k, the tail of the contour series from length r on is
//
//   T(r, c) = 4 (1-c)^2 sum_{k>=r} (k-1) zeta^(k-2)
//           = 4 (1-c)^2 zeta^(r-2) [(r-1)(1-zeta) + zeta] / (1-zeta)^2,
//
// finite iff zeta < 1, i.e. c > 4/5.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "peierls/contour_enumeration.hpp"
#include "peierls/errors.hpp"

namespace peierls {

using BigRational = boost::multiprecision::cpp_rational;

enum class CountSource { analytic, exact, self_avoiding };

inline const char* to_string(CountSource s) {
  switch (s) {
    case CountSource::analytic: return "analytic";
    case CountSource::exact: return "exact";
    case CountSource::self_avoiding: return "sa";
  }
  return "?";
}

/// Contour counts by length used in place of the walk bound for k <= k_max.
/// Lengths above k_max fall back to the walk bound.
struct SeriesCounts {
  CountSource source = CountSource::analytic;
  int k_max = 0;
  std::map<int, BigInt> counts;

  static SeriesCounts analytic() { return {}; }
  static SeriesCounts from_table(const CountTable& t, CountSource source) {
    SeriesCounts s;
    s.source = source;
    const auto& m = source == CountSource::exact ? t.exact : t.sa_walk;
    s.counts = m;
    s.k_max = m.empty() ? 0 : m.rbegin()->first;
    return s;
  }
};

inline double zeta_of(double c) { return 5.0 * (1.0 - c); }

/// c > 4/5. Compared directly: 5 * (1 - 0.8) rounds to just below 1.
inline bool series_converges(double c) { return c > 0.8 && zeta_of(c) < 1.0; }

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Closed-form tail of the walk-bound series from length r (r >= 2).
inline double analytic_tail(double c, int r) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
  if (r < 2) throw InvalidArgument("tail is defined for r >= 2");
  const double zeta = zeta_of(c);
  if (!series_converges(c)) throw DivergentSeries(zeta);
  const double one_minus = 1.0 - zeta;
  return 4.0 * (1.0 - c) * (1.0 - c) * std::pow(zeta, r - 2) *
         ((r - 1) * one_minus + zeta) / (one_minus * one_minus);
}

/// T(r, c): sum over contour lengths k >= r of (1-c)^k times the contour
/// count. Table sources use their counts for r <= k <= k_max and the closed
/// form beyond.
inline double tail_bound(double c, int r, const SeriesCounts& counts = SeriesCounts::analytic()) {
  if (r < 4) throw InvalidArgument("truncation length r must be >= 4");
  if (counts.source == CountSource::analytic) return analytic_tail(c, r);
  CompensatedSum sum;
  for (int k = r; k <= counts.k_max; ++k) {
    const auto it = counts.counts.find(k);
    if (it == counts.counts.end()) throw InvalidArgument("count table has a gap at k = " + std::to_string(k));
    sum.add(std::pow(1.0 - c, k) * it->second.convert_to<double>());
  }
  sum.add(analytic_tail(c, std::max(r, counts.k_max + 1)));
  return sum.value();
}

/// Peierls sum over all contour lengths.
inline double series_bound(double c, const SeriesCounts& counts = SeriesCounts::analytic()) {
  return tail_bound(c, 4, counts);
}

struct ThresholdBound {
  double value = 0.0;
  double growth_rate = 5.0;  // lambda: the series converges for (1-c) lambda < 1
  double growth_spread = 0.0;
  CountSource source = CountSource::analytic;
};

/// Upper estimate of c*. Analytic: exactly 4/5. Table sources: 1 - 1/lambda
/// with lambda the largest successive ratio count[k]/count[k-1] over the last
/// three lengths; the spread of those ratios is reported alongside.
inline ThresholdBound threshold_upper_bound(const SeriesCounts& counts = SeriesCounts::analytic()) {
  if (counts.source == CountSource::analytic) return {0.8, 5.0, 0.0, CountSource::analytic};
  if (counts.k_max < 8) throw InsufficientData("ratio estimate needs counts up to k >= 8");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int k = counts.k_max - 2; k <= counts.k_max; ++k) {
    const double prev = counts.counts.at(k - 1).convert_to<double>();
    const double cur = counts.counts.at(k).convert_to<double>();
    if (prev <= 0.0) throw InsufficientData("zero count at k = " + std::to_string(k - 1));
    const double ratio = cur / prev;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {1.0 - 1.0 / hi, hi, hi - lo, counts.source};
}

// ---------------------------------------------------------------------------
// Truncated polynomial

/// Q_r(c) = c - sum_{gamma in B(0), |gamma| < r} sum_{W : gamma(W) = gamma}
///          c^|W| (1 - c)^|Wbar|.
/// The leading c is the probability that the origin is occupied; the vacant
/// origin is not a contour event and is accounted for separately.
class TruncatedPolynomial {
 public:
  TruncatedPolynomial(const ContourCatalog& catalog, int r) : r_(r) {
    if (r < 4) throw InvalidArgument("truncation length r must be >= 4");
    if (static_cast<std::size_t>(r - 1) > catalog.max_length) {
      throw IncompletenessError("catalog records contours only up to length " +
                                std::to_string(catalog.max_length));
    }
    if (catalog.certified_length + 1 < static_cast<std::size_t>(r)) {
      throw IncompletenessError("catalog is certified complete only up to length " +
                                std::to_string(catalog.certified_length));
    }
    if (!catalog.events_complete_below(static_cast<std::size_t>(r))) {
      throw IncompletenessError("cluster cap " + std::to_string(catalog.cluster_cap) +
                                " is below the interior of some contour shorter than r");
    }
    // Catalog order is the canonical contour order, so the summation order
    // is fixed.
    for (const auto& [key, rec] : catalog.contours) {
      if (static_cast<int>(rec.length()) >= r) continue;
      ++contours_;
      for (const auto& [shape, count] : rec.events) {
        terms_.push_back({shape.first, shape.second, count});
        events_[shape] += count;
      }
    }
  }

  int r() const { return r_; }
  std::size_t contour_count() const { return contours_; }
  const std::map<EventShape, BigInt>& events() const { return events_; }

  /// Sum of P(gamma) over the contours included.
  double contour_mass(double c) const {
    CompensatedSum sum;
    for (const auto& t : terms_) {
      sum.add(static_cast<double>(t.count) * std::pow(c, t.occupied) * std::pow(1.0 - c, t.vacant));
    }
    return sum.value();
  }

  double evaluate(double c) const {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
    return c - contour_mass(c);
  }

  BigRational evaluate_exact(const BigRational& c) const {
    BigRational q = c;
    const BigRational vacant = 1 - c;
    for (const auto& [shape, count] : events_) {
      q -= BigRational(count) * pow_rational(c, shape.first) * pow_rational(vacant, shape.second);
    }
    return q;
  }

  /// Integer coefficients a_j of Q_r(c) = sum_j a_j c^j.
  std::vector<BigInt> coefficients() const {
    std::size_t degree = 1;
    for (const auto& [shape, count] : events_) degree = std::max<std::size_t>(degree, shape.first + shape.second);
    std::vector<BigInt> a(degree + 1, 0);
    a[1] = 1;
    for (const auto& [shape, count] : events_) {
      BigInt binom = 1;  // C(vacant, j)
      for (std::uint32_t j = 0; j <= shape.second; ++j) {
        const BigInt term = count * binom;
        if (j % 2 == 0) {
          a[shape.first + j] -= term;
        } else {
          a[shape.first + j] += term;
        }
        binom = binom * (shape.second - j) / (j + 1);
      }
    }
    return a;
  }

 private:
  struct Term {
    std::uint32_t occupied;
    std::uint32_t vacant;
    std::uint64_t count;
  };

  static BigRational pow_rational(const BigRational& base, std::uint32_t e) {
    BigRational out = 1;
    for (std::uint32_t i = 0; i < e; ++i) out *= base;
    return out;
  }

  int r_;
  std::size_t contours_ = 0;
  std::vector<Term> terms_;
  std::map<EventShape, BigInt> events_;
};

/// Q(c) >= c - sum_gamma (1-c)^|gamma|: the origin is occupied with
/// probability c and every finite cluster around it is enclosed by a contour.
inline double peierls_lower_bound(double c, double series) { return std::clamp(c - series, 0.0, 1.0); }

struct BoundReport {
  double c = 0.0;
  int r = 4;
  CountSource source = CountSource::analytic;
  bool guaranteed = false;  // c > 4/5 and the series converges
  std::optional<double> series_bound;
  std::optional<double> tail;
  double q_lower = 0.0;  // c - series_bound clamped to [0, 1]
  double q_truncated = 0.0;
  std::size_t contours = 0;
  double threshold_bound = 0.8;
};

/// Smallest catalog that determines Q_r exactly: every contour shorter than r
/// (certified against the circuit route) with all of its clusters.
inline ContourCatalog catalog_for_truncation(int r, const ExactOptions& opts = {}) {
  if (r < 4) throw InvalidArgument("truncation length r must be >= 4");
  if (r == 4) {
    // No contour is shorter than the diamond.
    ContourCatalog empty;
    empty.max_length = 3;
    empty.certified_length = 3;
    empty.cluster_cap = 1;
    return empty;
  }
  auto counts = exact_contour_counts(r - 1, opts);
  ContourCatalog cat = std::move(counts.catalog);
  const CatalogOptions copts{opts.threads, opts.safety_limit};
  while (!cat.events_complete_below(static_cast<std::size_t>(r))) {
    const std::size_t cap = cat.cluster_cap + 1;
    if (cap > opts.max_auto_cap) {
      throw CapExceeded("Q_r needs clusters larger than the cap " + std::to_string(opts.max_auto_cap));
    }
    // A larger cap only adds clusters, so the contour set stays complete.
    cat = build_contour_catalog(cap, static_cast<std::size_t>(r - 1), copts);
    cat.certified_length = static_cast<std::size_t>(r - 1);
  }
  return cat;
}

/// Evaluates Q_r(c) with its error bound. For c <= 4/5 the polynomial is still
/// evaluated but carries no guarantee and the series fields are empty.
inline BoundReport truncated_q(double c, const TruncatedPolynomial& poly,
                               const SeriesCounts& counts = SeriesCounts::analytic()) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");
  BoundReport rep;
  rep.c = c;
  rep.r = poly.r();
  rep.source = counts.source;
  rep.q_truncated = poly.evaluate(c);
  rep.contours = poly.contour_count();
  rep.threshold_bound = threshold_upper_bound(counts).value;
  if (series_converges(c)) {
    rep.guaranteed = true;
    rep.series_bound = series_bound(c, counts);
    rep.tail = tail_bound(c, poly.r(), counts);
    rep.q_lower = peierls_lower_bound(c, *rep.series_bound);
  }
  return rep;
}

inline BoundReport truncated_q(double c, int r, const ExactOptions& opts = {},
                               const SeriesCounts& counts = SeriesCounts::analytic()) {
  return truncated_q(c, TruncatedPolynomial(catalog_for_truncation(r, opts), r), counts);
}

}  // namespace peierls
