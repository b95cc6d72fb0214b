#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli_app.hpp"

using namespace peierls;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(row);
  }
  return rows;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("peierls_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Io, ContourJsonRoundTrip) {
  const Contour g = outer_boundary(make_cluster({{0, 0}, {1, 0}}));
  const auto j = io::to_json(g);
  EXPECT_EQ(j.at("length"), 6);
  const Contour back = io::contour_from_json(j);
  EXPECT_EQ(back.cycle, g.cycle);
  EXPECT_EQ(back, g);
}

TEST(Io, DoubleFormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 0.89991, 1e-300}) EXPECT_EQ(std::stod(io::format_double(v)), v);
}

TEST(Io, Sha256KnownAnswer) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Counts, BoundColumnAndDomination) {
  const auto r = run({"counts", "--k-max", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "exact", "sa_walk", "walk_bound"}));
  EXPECT_EQ(rows[1][3], "300");
  EXPECT_EQ(rows[2][3], "2000");
  EXPECT_EQ(rows[1][1], "1");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(std::stoll(rows[i][1]), std::stoll(rows[i][2]));
    EXPECT_LE(std::stoll(rows[i][2]), std::stoll(rows[i][3]));
  }
  EXPECT_EQ(run({"counts", "--k-max", "8"}).out, r.out);
}

TEST(Counts, JsonAndFiles) {
  const auto r = run({"counts", "--k-max", "7", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["metadata"]["rule"], "five");
  EXPECT_TRUE(j["metadata"]["certified"].get<bool>());
  EXPECT_EQ(j["counts"][0]["walk_bound"], 300);

  const auto prefix = (scratch_dir() / "counts").string();
  ASSERT_EQ(run({"counts", "--k-max", "7", "--rule", "seven", "--out", prefix}).code, 0);
  EXPECT_TRUE(fs::exists(prefix + ".csv"));
  EXPECT_TRUE(fs::exists(prefix + ".json"));
  const auto classes = csv_rows(cli::read_file(prefix + "_classes.csv"));
  EXPECT_EQ(classes[0], (std::vector<std::string>{"k", "l", "i", "count"}));
  EXPECT_EQ(classes[1], (std::vector<std::string>{"4", "1", "4", "1"}));
}

TEST(Counts, Errors) {
  EXPECT_EQ(run({"counts", "--k-max", "3"}).code, 2);
  EXPECT_EQ(run({"counts", "--rule", "six"}).code, 2);
  EXPECT_EQ(run({"counts", "--k-max", "notanumber"}).code, 2);
  EXPECT_EQ(run({"counts", "--k-max", "10", "--cap", "4"}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Bounds, BoundaryCaseHasNoGuarantee) {
  const auto r = run({"bounds", "--c", "0.8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"c", "q_truncated", "tail", "q_lower", "guarantee"}));
  EXPECT_EQ(rows[1][4], "none");
  EXPECT_EQ(rows[1][2], "");
}

TEST(Bounds, SweepAndValues) {
  const auto r = run({"bounds", "--sweep", "0.85:0.95:0.05", "--r", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2][4], "series");
  EXPECT_NEAR(std::stod(rows[2][1]), 0.89991, 1e-12);
  EXPECT_NEAR(std::stod(rows[2][3]), 0.82, 1e-12);
}

TEST(Bounds, SelfAvoidingThreshold) {
  const auto r = run({"bounds", "--c", "0.9", "--mode", "sa", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["threshold_bound"].get<double>(), 0.8);
  EXPECT_GT(j["threshold_bound"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(j["reports"][0]["source"], "sa");
}

TEST(Bounds, Errors) {
  EXPECT_EQ(run({"bounds"}).code, 2);
  EXPECT_EQ(run({"bounds", "--c", "1.5"}).code, 2);
  EXPECT_EQ(run({"bounds", "--c", "0.9", "--mode", "bogus"}).code, 2);
  EXPECT_EQ(run({"bounds", "--sweep", "0.9:0.8:0.1"}).code, 2);
  EXPECT_EQ(run({"bounds", "--c", "0.9", "--mode", "sa", "--k-sa", "6"}).code, 3);
}

TEST(Simulate, DeterministicOutput) {
  const std::vector<std::string> cmd{"simulate", "--L", "2", "--c", "0.5", "--trials", "20000", "--seed", "3"};
  const auto a = run(cmd);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run(cmd).out, a.out);
  const auto rows = csv_rows(a.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"L", "c", "trials", "value", "std_error", "seed"}));
  EXPECT_EQ(rows[1][0], "2");
  EXPECT_EQ(rows[1][2], "20000");
}

TEST(Simulate, BisectJson) {
  const auto r = run({"simulate", "--bisect", "--L", "16", "--trials", "400", "--seed", "7", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["threshold"].get<double>(), 1.0 / 3.0);
  EXPECT_LT(j["threshold"].get<double>(), 0.8);
  EXPECT_FALSE(j["trace"].empty());
  const auto csv = run({"simulate", "--bisect", "--L", "16", "--trials", "400", "--seed", "7"});
  EXPECT_EQ(csv_rows(csv.out).back()[0], "final");
}

TEST(Simulate, Errors) {
  EXPECT_EQ(run({"simulate", "--L", "0", "--c", "0.5"}).code, 2);
  EXPECT_EQ(run({"simulate", "--c", "0.5", "--bisect"}).code, 2);
  EXPECT_EQ(run({"simulate", "--c", "0.5", "--observable", "x"}).code, 2);
  EXPECT_EQ(run({"simulate", "--bisect", "--tol", "1e-5"}).code, 2);
}

TEST(Help, EverySubcommand) {
  for (const char* sub : {"counts", "bounds", "simulate", "manifest"}) {
    const auto r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--format"), std::string::npos) << sub;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Manifest, RecordAndVerify) {
  const auto dir = scratch_dir();
  const auto m = (dir / "m.json").string();
  const auto prefix = (dir / "t").string();
  const auto rec = run({"manifest", "--out", m, "--", "counts", "--k-max", "6", "--out", prefix});
  ASSERT_EQ(rec.code, 0) << rec.err;
  const auto j = nlohmann::json::parse(cli::read_file(m));
  EXPECT_EQ(j["outputs"].size(), 4u);
  EXPECT_EQ(j["caps"]["k-max"], "6");
  EXPECT_EQ(j["outputs"][1]["sha256"], cli::sha256_hex(cli::read_file(prefix + ".csv")));

  const auto ok = run({"manifest", "--verify", m});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;

  // A manifest whose recorded digest disagrees with the rerun fails.
  auto bad = j;
  bad["outputs"][1]["sha256"] = std::string(64, '0');
  const auto bad_path = (dir / "bad.json").string();
  {
    std::ofstream f(bad_path);
    f << bad.dump();
  }
  EXPECT_EQ(run({"manifest", "--verify", bad_path}).code, 1);

  const auto sm = (dir / "sim.json").string();
  ASSERT_EQ(run({"manifest", "--out", sm, "--", "simulate", "--L", "4", "--c", "0.6", "--trials", "500", "--seed", "9"}).code, 0);
  const auto sj = nlohmann::json::parse(cli::read_file(sm));
  EXPECT_EQ(sj["seeds"][0], 9);
  EXPECT_EQ(run({"manifest", "--verify", sm}).code, 0);
}

TEST(Manifest, Errors) {
  EXPECT_EQ(run({"manifest"}).code, 2);
  EXPECT_EQ(run({"manifest", "--out", "x.json"}).code, 2);
  EXPECT_EQ(run({"manifest", "--verify", "/nonexistent/m.json"}).code, 2);
}
