#pragma once

// Command dispatch for the `peierls` tool. run() is re-entrant so that the
// manifest subcommand can execute a recorded command in-process.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peierls/io.hpp"
#include "peierls/peierls.hpp"

namespace peierls::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kArgumentError = 2, kFeasibilityError = 3 };

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> written;  // files produced by the command
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(Context& ctx, const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << bytes;
  if (!f.flush()) throw Error("write failed: " + path);
  ctx.written.push_back(path);
}

struct SweepRange {
  double from = 0, to = 0, step = 0;
};

inline SweepRange parse_sweep(const std::string& spec) {
  SweepRange s;
  char a = 0, b = 0;
  std::istringstream is(spec);
  if (!(is >> s.from >> a >> s.to >> b >> s.step) || a != ':' || b != ':' || !is.eof())
    throw InvalidArgument("sweep must look like c0:c1:step, got '" + spec + "'");
  if (!(s.step > 0) || s.to < s.from) throw InvalidArgument("sweep needs step > 0 and c0 <= c1");
  return s;
}

inline std::vector<double> sweep_points(const SweepRange& s) {
  std::vector<double> pts;
  const auto n = static_cast<long>(std::floor((s.to - s.from) / s.step + 1e-9));
  // Rounded to 12 significant digits so 0.8 + 0.05 prints as 0.85.
  for (long i = 0; i <= n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", s.from + static_cast<double>(i) * s.step);
    pts.push_back(std::strtod(buf, nullptr));
  }
  return pts;
}

inline void check_format(const std::string& f) {
  if (f != "csv" && f != "json") throw InvalidArgument("format must be csv or json");
}

// ---------------------------------------------------------------------------

struct CountsArgs {
  int k_max = 12;
  int k_sa = 0;
  std::string rule = "five";
  std::size_t cap = 0;
  std::string out;
  std::string format = "csv";
};

inline int cmd_counts(Context& ctx, const CountsArgs& a) {
  check_format(a.format);
  if (a.k_max < 4) throw InvalidArgument("--k-max must be >= 4");
  if (a.rule != "five" && a.rule != "seven") throw InvalidArgument("--rule must be five or seven");
  const int k_sa = a.k_sa == 0 ? a.k_max : a.k_sa;
  if (k_sa < 4) throw InvalidArgument("--k-sa must be >= 4");
  ExactOptions opts;
  opts.cluster_cap = a.cap;
  opts.threads = default_threads();
  const auto rule = a.rule == "five" ? ContinuationRule::five : ContinuationRule::seven;
  const CountTable t = count_table(a.k_max, k_sa, rule, opts);

  const std::string json = io::to_json(t).dump(2) + "\n";
  if (!a.out.empty()) {
    write_file(ctx, a.out + ".csv", io::count_table_csv(t));
    write_file(ctx, a.out + "_classes.csv", io::class_table_csv(t));
    write_file(ctx, a.out + ".json", json);
    return kOk;
  }
  ctx.out << (a.format == "json" ? json : io::count_table_csv(t));
  return kOk;
}

struct BoundsArgs {
  std::optional<double> c;
  int r = 5;
  std::string mode = "analytic";
  std::string sweep;
  int k_exact = 12;
  int k_sa = 12;
  std::string out;
  std::string format = "csv";
};

inline SeriesCounts series_for_mode(const BoundsArgs& a) {
  if (a.mode == "analytic") return SeriesCounts::analytic();
  SeriesCounts s;
  if (a.mode == "exact") {
    ExactOptions opts;
    opts.threads = default_threads();
    s.source = CountSource::exact;
    s.k_max = a.k_exact;
    for (const auto& [k, v] : exact_contour_counts(a.k_exact, opts).exact)
      if (k >= 4) s.counts[k] = v;
    return s;
  }
  if (a.mode == "sa") {
    s.source = CountSource::self_avoiding;
    s.k_max = a.k_sa;
    for (const auto& [k, v] : self_avoiding_circuit_count(a.k_sa, ContinuationRule::five, default_threads()).walks)
      s.counts[k] = v;
    return s;
  }
  throw InvalidArgument("--mode must be analytic, exact or sa");
}

inline int cmd_bounds(Context& ctx, const BoundsArgs& a) {
  check_format(a.format);
  if (a.c.has_value() == !a.sweep.empty()) throw InvalidArgument("give exactly one of --c and --sweep");
  if (a.r < 4) throw InvalidArgument("--r must be >= 4");
  std::vector<double> cs = a.c ? std::vector<double>{*a.c} : sweep_points(parse_sweep(a.sweep));
  for (double c : cs)
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("concentration must lie in [0, 1]");

  const SeriesCounts counts = series_for_mode(a);
  ExactOptions opts;
  opts.threads = default_threads();
  const TruncatedPolynomial poly(catalog_for_truncation(a.r, opts), a.r);
  std::vector<BoundReport> rows;
  for (double c : cs) rows.push_back(truncated_q(c, poly, counts));

  std::string text;
  if (a.format == "json") {
    const auto th = threshold_upper_bound(counts);
    io::ordered_json reports = io::ordered_json::array();
    for (const auto& r : rows) reports.push_back(io::to_json(r));
    io::ordered_json j = {{"mode", a.mode},
                          {"r", a.r},
                          {"k_max", counts.k_max},
                          {"threshold_bound", th.value},
                          {"growth_rate", th.growth_rate},
                          {"growth_spread", th.growth_spread},
                          {"reports", reports}};
    text = j.dump(2) + "\n";
  } else {
    text = io::bound_sweep_csv(rows);
  }
  if (!a.out.empty()) {
    write_file(ctx, a.out, text);
  } else {
    ctx.out << text;
  }
  return kOk;
}

struct SimulateArgs {
  std::int32_t L = 64;
  std::optional<double> c;
  std::string sweep;
  bool bisect = false;
  std::string observable = "reach";
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  double tol = 0.005;
  std::string out;
  std::string format = "csv";
};

inline int cmd_simulate(Context& ctx, const SimulateArgs& a) {
  check_format(a.format);
  if (a.L < 1) throw InvalidArgument("--L must be >= 1");
  if (a.trials < 1) throw InvalidArgument("--trials must be >= 1");
  const unsigned threads = default_threads();
  std::string text;
  if (a.bisect) {
    if (a.c || !a.sweep.empty()) throw InvalidArgument("--bisect cannot be combined with --c or --sweep");
    const auto t = estimate_threshold(a.L, a.trials, a.tol, a.seed, threads);
    text = a.format == "json" ? io::to_json(t).dump(2) + "\n" : io::threshold_csv(t);
  } else {
    if (a.c.has_value() == !a.sweep.empty()) throw InvalidArgument("give exactly one of --c, --sweep or --bisect");
    if (a.observable != "reach" && a.observable != "crossing")
      throw InvalidArgument("--observable must be reach or crossing");
    const std::vector<double> cs = a.c ? std::vector<double>{*a.c} : sweep_points(parse_sweep(a.sweep));
    std::vector<McEstimate> rows;
    for (double c : cs) {
      rows.push_back(a.observable == "reach" ? estimate_origin_reach(a.L, c, a.trials, a.seed, threads)
                                             : estimate_crossing(a.L, c, a.trials, a.seed, threads));
    }
    if (a.format == "json") {
      io::ordered_json arr = io::ordered_json::array();
      for (const auto& e : rows) arr.push_back(io::to_json(e));
      text = (rows.size() == 1 ? arr[0] : io::ordered_json{{"observable", a.observable}, {"estimates", arr}})
                 .dump(2) +
             "\n";
    } else {
      text = io::estimate_csv(rows);
    }
  }
  if (!a.out.empty()) {
    write_file(ctx, a.out, text);
  } else {
    ctx.out << text;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

// Flag values recorded in the manifest header, e.g. "--seed" -> "7".
inline std::map<std::string, std::string> flag_values(const std::vector<std::string>& cmd) {
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    const std::string& a = cmd[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) continue;
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      m[a.substr(2, eq - 2)] = a.substr(eq + 1);
    } else if (i + 1 < cmd.size() && cmd[i + 1].rfind("--", 0) != 0) {
      m[a.substr(2)] = cmd[i + 1];
    } else {
      m[a.substr(2)] = "true";
    }
  }
  return m;
}

}  // namespace detail

struct ManifestArgs {
  std::string out;
  std::string verify;
  std::string stdout_path;
};

// Files written by the most recent command run through run().
inline std::vector<std::string>& last_written() {
  static thread_local std::vector<std::string> files;
  return files;
}

inline int cmd_manifest(Context& ctx, const ManifestArgs& a, const std::vector<std::string>& cmd) {
  if (a.out.empty() == a.verify.empty()) throw InvalidArgument("give exactly one of --out and --verify");
  if (!a.out.empty()) {
    if (cmd.empty()) throw InvalidArgument("manifest --out needs a command after --");
    if (cmd.front() == "manifest") throw InvalidArgument("manifest cannot record itself");
    const std::string stdout_path = a.stdout_path.empty() ? a.out + ".stdout" : a.stdout_path;
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream captured;
    const int code = run(cmd, captured, ctx.err);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (code != kOk) return code;
    std::vector<std::string> files = last_written();
    write_file(ctx, stdout_path, captured.str());

    const auto flags = detail::flag_values(cmd);
    io::ordered_json seeds = io::ordered_json::array();
    if (flags.count("seed")) seeds.push_back(std::stoull(flags.at("seed")));
    io::ordered_json outputs = io::ordered_json::array();
    outputs.push_back({{"path", stdout_path}, {"stream", "stdout"}, {"sha256", sha256_hex(captured.str())}});
    for (const auto& f : files) outputs.push_back({{"path", f}, {"sha256", sha256_hex(read_file(f))}});
    io::ordered_json caps = io::ordered_json::object();
    for (const char* key : {"k-max", "k-sa", "k-exact", "cap", "r", "L", "trials", "tol"})
      if (flags.count(key)) caps[key] = flags.at(key);
    io::ordered_json rules = io::ordered_json::object();
    for (const char* key : {"rule", "mode", "observable"})
      if (flags.count(key)) rules[key] = flags.at(key);
    io::ordered_json m = {{"version", kVersion},
                          {"command", cmd},
                          {"seeds", seeds},
                          {"caps", caps},
                          {"rule_variants", rules},
                          {"threads", default_threads()},
                          {"wall_time_seconds", wall},
                          {"outputs", outputs}};
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("cannot write " + a.out);
    f << m.dump(2) << '\n';
    ctx.out << "manifest written to " << a.out << " (" << outputs.size() << " outputs)\n";
    return kOk;
  }

  io::ordered_json m;
  try {
    m = io::ordered_json::parse(read_file(a.verify));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
  const auto recorded = m.at("command").get<std::vector<std::string>>();
  std::ostringstream captured;
  const int code = run(recorded, captured, ctx.err);
  if (code != kOk) return code;
  const std::vector<std::string> files = last_written();
  bool ok = true;
  for (const auto& o : m.at("outputs")) {
    const std::string path = o.at("path").get<std::string>();
    const bool is_stdout = o.contains("stream");
    const std::string now = is_stdout ? sha256_hex(captured.str()) : sha256_hex(read_file(path));
    const std::string want = o.at("sha256").get<std::string>();
    const bool same = now == want;
    ok = ok && same;
    ctx.out << (same ? "OK       " : "MISMATCH ") << path << ' ' << now << '\n';
  }
  if (!ok) ctx.err << "manifest verification failed\n";
  return ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  // manifest takes the recorded command verbatim after "--".
  std::vector<std::string> args = args_in;
  std::vector<std::string> tail;
  if (!args.empty() && args.front() == "manifest") {
    const auto sep = std::find(args.begin(), args.end(), "--");
    if (sep != args.end()) {
      tail.assign(sep + 1, args.end());
      args.erase(sep, args.end());
    }
  }

  CLI::App app{"Peierls contour bounds for site percolation on the square lattice", "peierls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CountsArgs ca;
  auto* counts = app.add_subcommand("counts", "exact contour counts S_k, circuit counts and the walk bound");
  counts->add_option("--k-max", ca.k_max, "largest contour length counted exactly")->capture_default_str();
  counts->add_option("--k-sa", ca.k_sa, "largest length for circuit counts (default: --k-max)");
  counts->add_option("--rule", ca.rule, "continuation rule for circuits: five|seven")->capture_default_str();
  counts->add_option("--cap", ca.cap, "cluster-size cap for the exact route (default: smallest certified)");
  counts->add_option("--out", ca.out, "write PREFIX.csv, PREFIX_classes.csv and PREFIX.json");
  counts->add_option("--format", ca.format, "stdout format: csv|json")->capture_default_str();

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Peierls series, tail and truncated Q_r(c)");
  bounds->add_option("--c", ba.c, "concentration");
  bounds->add_option("--sweep", ba.sweep, "concentration range c0:c1:step");
  bounds->add_option("--r", ba.r, "truncation length")->capture_default_str();
  bounds->add_option("--mode", ba.mode, "contour counts: analytic|exact|sa")->capture_default_str();
  bounds->add_option("--k-exact", ba.k_exact, "largest exact length in exact mode")->capture_default_str();
  bounds->add_option("--k-sa", ba.k_sa, "largest circuit length in sa mode")->capture_default_str();
  bounds->add_option("--out", ba.out, "output file (default: stdout)");
  bounds->add_option("--format", ba.format, "csv|json")->capture_default_str();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo origin reach, crossing and threshold");
  simulate->add_option("--L", sa.L, "window radius")->capture_default_str();
  simulate->add_option("--c", sa.c, "concentration");
  simulate->add_option("--sweep", sa.sweep, "concentration range c0:c1:step");
  simulate->add_flag("--bisect", sa.bisect, "bisect the crossing probability 1/2");
  simulate->add_option("--observable", sa.observable, "reach|crossing")->capture_default_str();
  simulate->add_option("--trials", sa.trials, "number of trials")->capture_default_str();
  simulate->add_option("--seed", sa.seed, "base seed")->capture_default_str();
  simulate->add_option("--tol", sa.tol, "bisection tolerance")->capture_default_str();
  simulate->add_option("--out", sa.out, "output file (default: stdout)");
  simulate->add_option("--format", sa.format, "csv|json")->capture_default_str();

  ManifestArgs ma;
  auto* manifest = app.add_subcommand("manifest", "record or verify a reproducible run: manifest --out m.json -- CMD");
  manifest->add_option("--out", ma.out, "manifest file to write");
  manifest->add_option("--stdout", ma.stdout_path, "where to store the command's stdout (default: OUT.stdout)");
  manifest->add_option("--verify", ma.verify, "manifest file to re-run and check");
  std::string manifest_format = "json";
  manifest->add_option("--format", manifest_format, "manifest format (json only)")->capture_default_str();

  Context ctx{out, err, {}};
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kArgumentError;
  }

  int code = kOk;
  try {
    if (*counts) {
      code = cmd_counts(ctx, ca);
    } else if (*bounds) {
      code = cmd_bounds(ctx, ba);
    } else if (*simulate) {
      code = cmd_simulate(ctx, sa);
    } else if (*manifest) {
      if (manifest_format != "json") throw InvalidArgument("manifests are always json");
      code = cmd_manifest(ctx, ma, tail);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kFeasibilityError;
  } catch (const IncompletenessError& e) {
    err << "error: " << e.what() << '\n';
    return kFeasibilityError;
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return kFeasibilityError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  last_written() = ctx.written;
  return code;
}

}  // namespace peierls::cli
