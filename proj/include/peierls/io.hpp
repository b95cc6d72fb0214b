#pragma once

// CSV and JSON encodings of the result types. CSV: header row, '.' decimal,
// LF line endings, doubles printed in their shortest round-trip form.

#include <algorithm>
#include <charconv>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "peierls/cluster_geometry.hpp"
#include "peierls/contour_enumeration.hpp"
#include "peierls/monte_carlo.hpp"
#include "peierls/peierls_bounds.hpp"

namespace peierls::io {

using nlohmann::ordered_json;

// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Counts that fit in 64 bits become JSON numbers, larger ones strings.
inline ordered_json big_to_json(const BigInt& v) {
  if (v >= 0 && v <= std::numeric_limits<std::uint64_t>::max()) return v.convert_to<std::uint64_t>();
  return v.str();
}

template <class Map>
std::string cell(const Map& m, int k) {
  const auto it = m.find(k);
  return it == m.end() ? std::string() : it->second.str();
}

// ---------------------------------------------------------------------------
// Contours

inline ordered_json to_json(const Contour& g) {
  ordered_json cycle = ordered_json::array();
  for (const Site s : g.cycle) cycle.push_back({s.x, s.y});
  return {{"length", g.length()}, {"cycle", cycle}};
}

inline Contour contour_from_json(const ordered_json& j) {
  Contour g;
  for (const auto& p : j.at("cycle")) g.cycle.push_back({p.at(0).get<std::int32_t>(), p.at(1).get<std::int32_t>()});
  g.sites = g.cycle;
  std::sort(g.sites.begin(), g.sites.end());
  if (j.contains("length") && j.at("length").get<std::size_t>() != g.cycle.size())
    throw InvalidArgument("contour length does not match its cycle");
  return g;
}

// ---------------------------------------------------------------------------
// Count tables

inline std::string count_table_csv(const CountTable& t) {
  std::ostringstream os;
  os << "k,exact,sa_walk,walk_bound\n";
  for (const auto& [k, bound] : t.walk_bound)
    os << k << ',' << cell(t.exact, k) << ',' << cell(t.sa_walk, k) << ',' << bound.str() << '\n';
  return os.str();
}

inline std::string class_table_csv(const CountTable& t) {
  std::ostringstream os;
  os << "k,l,i,count\n";
  for (const auto& [key, n] : t.classes) {
    const auto [k, l, i] = key;
    if (k < 4) continue;
    os << k << ',' << l << ',' << i << ',' << n.str() << '\n';
  }
  return os.str();
}

inline ordered_json to_json(const CountTable& t) {
  const int k_exact = t.exact.empty() ? 0 : t.exact.rbegin()->first;
  const int k_sa = t.sa_walk.empty() ? 0 : t.sa_walk.rbegin()->first;
  ordered_json meta = {{"k_max", t.k_max},
                       {"k_exact", k_exact},
                       {"k_sa", k_sa},
                       {"rule", to_string(t.rule)},
                       {"cluster_cap", t.cluster_cap},
                       {"certified", t.certified}};
  ordered_json rows = ordered_json::array();
  for (const auto& [k, bound] : t.walk_bound) {
    ordered_json row = {{"k", k}};
    auto put = [&](const char* name, const std::map<int, BigInt>& m) {
      const auto it = m.find(k);
      row[name] = it == m.end() ? ordered_json(nullptr) : big_to_json(it->second);
    };
    put("exact", t.exact);
    put("sa_walk", t.sa_walk);
    put("sa_sets", t.sa_sets);
    row["walk_bound"] = big_to_json(bound);
    rows.push_back(row);
  }
  ordered_json classes = ordered_json::array();
  for (const auto& [key, n] : t.classes) {
    const auto [k, l, i] = key;
    if (k < 4) continue;
    classes.push_back({{"k", k}, {"l", l}, {"i", i}, {"count", big_to_json(n)}});
  }
  return {{"metadata", meta}, {"counts", rows}, {"classes", classes}};
}

// ---------------------------------------------------------------------------
// Bounds

inline const char* guarantee_name(const BoundReport& r) { return r.guaranteed ? "series" : "none"; }

inline ordered_json to_json(const BoundReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  return {{"c", r.c},
          {"r", r.r},
          {"source", to_string(r.source)},
          {"guarantee", guarantee_name(r)},
          {"series_bound", opt(r.series_bound)},
          {"tail", opt(r.tail)},
          {"q_lower", r.guaranteed ? ordered_json(r.q_lower) : ordered_json(nullptr)},
          {"q_truncated", r.q_truncated},
          {"contours", r.contours},
          {"threshold_bound", r.threshold_bound}};
}

inline std::string bound_sweep_csv(const std::vector<BoundReport>& rows) {
  std::ostringstream os;
  os << "c,q_truncated,tail,q_lower,guarantee\n";
  for (const auto& r : rows) {
    os << format_double(r.c) << ',' << format_double(r.q_truncated) << ',' << format_optional(r.tail) << ','
       << (r.guaranteed ? format_double(r.q_lower) : std::string()) << ',' << guarantee_name(r) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Monte Carlo

inline ordered_json to_json(const McEstimate& e) {
  return {{"L", e.L},         {"c", e.c},
          {"trials", e.trials}, {"value", e.value},
          {"std_error", e.std_error}, {"seed", e.seed}};
}

inline std::string estimate_csv(const std::vector<McEstimate>& rows) {
  std::ostringstream os;
  os << "L,c,trials,value,std_error,seed\n";
  for (const auto& e : rows) {
    os << e.L << ',' << format_double(e.c) << ',' << e.trials << ',' << format_double(e.value) << ','
       << format_double(e.std_error) << ',' << e.seed << '\n';
  }
  return os.str();
}

inline ordered_json to_json(const ThresholdEstimate& t) {
  ordered_json trace = ordered_json::array();
  for (const auto& s : t.trace) trace.push_back({{"lo", s.lo}, {"hi", s.hi}, {"estimate", to_json(s.crossing)}});
  return {{"threshold", t.value}, {"lo", t.lo}, {"hi", t.hi}, {"tol", t.tol},
          {"L", t.L}, {"trials", t.trials}, {"seed", t.seed}, {"trace", trace}};
}

// One row per bisection step, then a final row carrying the estimate.
inline std::string threshold_csv(const ThresholdEstimate& t) {
  std::ostringstream os;
  os << "step,lo,hi,c,value,std_error\n";
  for (std::size_t i = 0; i < t.trace.size(); ++i) {
    const auto& s = t.trace[i];
    os << i << ',' << format_double(s.lo) << ',' << format_double(s.hi) << ',' << format_double(s.crossing.c)
       << ',' << format_double(s.crossing.value) << ',' << format_double(s.crossing.std_error) << '\n';
  }
  os << "final," << format_double(t.lo) << ',' << format_double(t.hi) << ',' << format_double(t.value) << ",,\n";
  return os.str();
}

}  // namespace peierls::io
