#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ssc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ssc::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

const fs::path kData = SSC_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate") {
  const auto dir = scratch("simulate");
  spit(dir / "flip.csv", "2,2\n0,1\n1,0\n");
  const auto r = run({"simulate", "-i", (dir / "flip.csv").string(), "-n", "3", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "0\n1\n0\n1\n");

  spit(dir / "chain.csv", "3,3\n0.2,0.3,0.5\n0.6,0.2,0.2\n0.1,0.1,0.8\n");
  const auto a = run({"simulate", "-i", (dir / "chain.csv").string(), "-n", "50", "--seed", "9"});
  const auto b = run({"simulate", "-i", (dir / "chain.csv").string(), "-n", "50", "--seed", "9"});
  CHECK(a.out == b.out);
  const auto st = run({"simulate", "-i", (dir / "chain.csv").string(), "-k", "1", "-r", "2",
                       "--initial", "stationary"});
  CHECK(st.code == 0);

  spit(dir / "bad.csv", "2,2\n0.6,0.5\n0.5,0.5\n");
  const auto bad = run({"simulate", "-i", (dir / "bad.csv").string(), "-n", "3"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("row 0") != std::string::npos);

  CHECK(run({"simulate", "-i", (dir / "chain.csv").string()}).code == 2);
  CHECK(run({"simulate", "-i", (dir / "nope.csv").string(), "-n", "3"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("estimate") {
  const auto dir = scratch("estimate");
  // Rank one: every row of P is the same distribution.
  spit(dir / "rank1.csv", "3,3\n0.2,0.3,0.5\n0.2,0.3,0.5\n0.2,0.3,0.5\n");
  REQUIRE(run({"simulate", "-i", (dir / "rank1.csv").string(), "-n", "2000", "--seed", "4", "-o",
               (dir / "traj.txt").string()})
              .code == 0);
  const auto r = run({"estimate", "-i", (dir / "traj.txt").string(), "-r", "1", "--with-empirical"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["p"] == 3);
  CHECK(j["transitions"] == 2000);
  const auto& rows = j["P_hat"]["entries"];
  for (int i = 1; i < 3; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(rows[i][c].get<double>() == doctest::Approx(rows[0][c].get<double>()).epsilon(1e-9));
  CHECK(j.contains("F_tilde"));
  CHECK(j["diagnostics"].is_object());

  const auto golden = kData / "golden_estimate.json";
  REQUIRE(fs::exists(golden));
  CHECK(r.out == slurp(golden));

  const auto sub = run({"subspaces", "-i", (dir / "traj.txt").string(), "-r", "1"});
  REQUIRE(sub.code == 0);
  CHECK(nlohmann::json::parse(sub.out)["U_P"]["q"] == 1);
}

TEST_CASE("aggregate and lump with a reference partition") {
  const auto dir = scratch("partition");
  REQUIRE(run({"generate", "--generator", "aggregatable", "-p", "40", "-r", "3", "--seed", "5",
               "--transition-output", (dir / "P.csv").string(), "--truth-output",
               (dir / "truth.csv").string(), "-o", (dir / "bundle.json").string()})
              .code == 0);
  REQUIRE(run({"simulate", "-i", (dir / "P.csv").string(), "-k", "8", "-r", "3", "--seed", "6",
               "-o", (dir / "traj.txt").string()})
              .code == 0);
  const auto agg = run({"aggregate", "-i", (dir / "traj.txt").string(), "-r", "3", "--truth",
                        (dir / "truth.csv").string(), "-o", (dir / "est.csv").string()});
  CHECK(agg.code == 0);
  CHECK(agg.out == "misclassification,0\n");
  CHECK(slurp(dir / "est.csv").rfind("state,block\n", 0) == 0);

  REQUIRE(run({"generate", "--generator", "lumpable", "-p", "30", "-r", "2", "--seed", "7",
               "--transition-output", (dir / "L.csv").string(), "--truth-output",
               (dir / "ltruth.csv").string()})
              .code == 0);
  REQUIRE(run({"simulate", "-i", (dir / "L.csv").string(), "-k", "10", "-r", "2", "--seed", "8",
               "-o", (dir / "ltraj.txt").string()})
              .code == 0);
  const auto lump = run({"lump", "-i", (dir / "ltraj.txt").string(), "-r", "2", "--truth",
                         (dir / "ltruth.csv").string()});
  CHECK(lump.code == 0);
  CHECK(lump.err == "misclassification,0\n");
  CHECK(lump.out.rfind("state,block\n", 0) == 0);

  spit(dir / "short.csv", "state,block\n0,0\n1,1\n");
  const auto bad = run({"aggregate", "-i", (dir / "traj.txt").string(), "-r", "3", "--truth",
                        (dir / "short.csv").string()});
  CHECK(bad.code == 2);
}

TEST_CASE("bench") {
  const auto dir = scratch("bench");
  spit(dir / "cfg.json",
       R"({"figure":"tiny","generator":"low_rank","p_values":[20],"r":2,"k_values":[1,2,4,8],"trials":2,"base_seed":1})");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run({"bench", "-i", (dir / "cfg.json").string(), "-o", (dir / "a").string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.code == 0);
  CHECK(secs < 5.0);
  CHECK(r.out.find("records,16") != std::string::npos);
  REQUIRE(run({"bench", "-i", (dir / "cfg.json").string(), "-o", (dir / "b").string()}).code == 0);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  bool has_slope = false;
  for (const auto& f : summary["fits"]) has_slope = has_slope || f["slope"].is_number();
  CHECK(has_slope);
  CHECK(fs::exists(dir / "a" / "timings.csv"));

  spit(dir / "bad.json", R"({"p_values":[20]})");
  CHECK(run({"bench", "-i", (dir / "bad.json").string(), "-o", (dir / "c").string()}).code == 2);
}

TEST_CASE("taxi") {
  const auto dir = scratch("taxi");
  const std::string input = (kData / "trips_fixture.csv").string();
  const std::vector<std::string> grid{"--bbox", "40.70,40.80,-74.00,-73.90", "--grid-cell-lat",
                                      "0.02", "--grid-cell-lon", "0.02"};
  auto args = std::vector<std::string>{"taxi", "-i", input, "-o", (dir / "all").string(), "-r", "2",
                                       "--min-visits", "40"};
  args.insert(args.end(), grid.begin(), grid.end());
  const auto r = run(args);
  REQUIRE(r.code == 0);
  const auto golden = kData / "golden_taxi_partition.csv";
  REQUIRE(fs::exists(golden));
  CHECK(slurp(dir / "all" / "partition.csv") == slurp(golden));
  CHECK(fs::exists(dir / "all" / "counts.csv"));
  CHECK(fs::exists(dir / "all" / "P_tilde.json"));
  const auto summary = nlohmann::json::parse(slurp(dir / "all" / "summary.json"));
  CHECK(summary["parse"]["parsed"] == 987);

  args = {"taxi", "-i", input, "-o", (dir / "seg").string(), "--segments", "--min-visits", "5",
          "--format", "geojson"};
  args.insert(args.end(), grid.begin(), grid.end());
  REQUIRE(run(args).code == 0);
  for (const char* s : {"morning", "afternoon", "evening"}) {
    CHECK(fs::exists(dir / "seg" / s / "partition.geojson"));
  }

  spit(dir / "empty.csv", "");
  CHECK(run({"taxi", "-i", (dir / "empty.csv").string(), "-o", (dir / "e").string()}).code == 2);
  CHECK(run({"taxi", "-i", input, "-o", (dir / "x").string(), "--min-visits", "100000"}).code == 2);
}
