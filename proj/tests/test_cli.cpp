#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lob/analytic.hpp"
#include "lob/empirical.hpp"
#include "lob/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("lobtool_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_tool(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = std::string(LOBTOOL_PATH) + " " + args + " >" +
                    out.string() + " 2>" + err.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<double>> read_csv(const fs::path& p,
                                          const std::string& want_header) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == want_header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: constant-rate survival table") {
  fs::path dir = fresh_dir("survival");
  fs::path csv = dir / "s.csv";
  RunResult r = run_tool(
      "survival --lambda 0.5 --mu 1 --x 1 --tmax 1 --points 3 --out " +
          csv.string(),
      dir);
  CHECK(r.exit_code == 0);
  auto rows = read_csv(csv, "T,survival,tail");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] == 1.0);
  CHECK(rows[0][2] == 1.0);
  CHECK(std::abs(rows[1][0] - 0.5) <= 1e-15);
  CHECK(std::abs(rows[1][1] - 0.64217295355349213) <= 1e-9);
  CHECK(std::abs(rows[2][1] - 0.45251016611885995) <= 1e-9);
}

TEST_CASE("cli: time-changed survival with oracle column") {
  fs::path dir = fresh_dir("survival_tc");
  fs::path csv = dir / "tc.csv";
  RunResult r = run_tool(
      "survival --lambda 0.8 --mu 1 --x 2 --tmin 0 --tmax 9 --points 4 "
      "--alpha power:1,-0.5 --oracle --out " +
          csv.string(),
      dir);
  CHECK(r.exit_code == 0);
  auto rows = read_csv(csv, "T,survival,tail,A_T,oracle");
  REQUIRE(rows.size() == 4);
  CHECK(rows[3][0] == 9.0);
  CHECK(std::abs(rows[3][1] - 0.34057452452097284) <= 1e-9);
  CHECK(std::abs(rows[3][3] - 6.0) <= 1e-12);
  CHECK(std::abs(rows[3][2] - lob::tail_sigma(6.0, 2, 0.8, 1.0)) <= 1e-12);
  CHECK(std::abs(rows[3][4] - rows[3][1]) <= 1e-6);
  // idle before the clock origin: full mass at T = 0
  CHECK(rows[0][1] == 1.0);
  CHECK(rows[0][2] == 1.0);
}

TEST_CASE("cli: survival argument failures") {
  fs::path dir = fresh_dir("survival_bad");
  RunResult bad_x =
      run_tool("survival --lambda 0.5 --mu 1 --x 0 --tmax 1", dir);
  CHECK(bad_x.exit_code == 2);
  CHECK(bad_x.err.find("x must be >= 1") != std::string::npos);

  CHECK(run_tool("survival --lambda 0.5 --mu 1 --x 1", dir).exit_code == 2);
  CHECK(run_tool("survival --lambda 0.5 --mu 1 --x 1 --tmax 1 --bogus", dir)
            .exit_code == 2);
  CHECK(run_tool("frobnicate", dir).exit_code == 2);
  CHECK(run_tool("", dir).exit_code == 2);

  RunResult bad_alpha = run_tool(
      "survival --lambda 0.5 --mu 1 --x 1 --tmax 1 --alpha power:1", dir);
  CHECK(bad_alpha.exit_code == 2);
  CHECK(bad_alpha.err.find("error:") != std::string::npos);
}

TEST_CASE("cli: simulate is reproducible byte for byte") {
  fs::path dir = fresh_dir("simulate");
  lob::BookConfig cfg;
  cfg.rates = lob::RateSpec{lob::ConstantForm{1.0}, 0.9, 1.1};
  cfg.depth = lob::DepthDistribution::uniform(2, 2);
  fs::path config = dir / "config.json";
  {
    std::ofstream out(config);
    out << lob::book_config_to_json(cfg).dump(2) << "\n";
  }
  std::string base = "simulate --config " + config.string() +
                     " --paths 2 --export-paths 2 --horizon 10 ";
  RunResult r1 = run_tool(
      base + "--seed 42 --outdir " + (dir / "a").string(), dir);
  CHECK(r1.exit_code == 0);
  RunResult r2 = run_tool(
      base + "--seed 42 --outdir " + (dir / "b").string(), dir);
  CHECK(r2.exit_code == 0);
  for (const char* f : {"path_0.csv", "path_1.csv", "summary.json"}) {
    CAPTURE(f);
    std::string a = slurp(dir / "a" / f);
    REQUIRE(!a.empty());
    CHECK(a == slurp(dir / "b" / f));
  }
  json summary = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["seed"] == 42);
  CHECK(summary["n_paths"] == 2);

  RunResult r3 = run_tool(
      base + "--seed 43 --outdir " + (dir / "c").string(), dir);
  CHECK(r3.exit_code == 0);
  CHECK(slurp(dir / "a" / "path_0.csv") != slurp(dir / "c" / "path_0.csv"));

  RunResult no_seed = run_tool(
      "simulate --config " + config.string() + " --horizon 10", dir);
  CHECK(no_seed.exit_code == 2);
  RunResult no_file = run_tool(
      "simulate --config " + (dir / "nope.json").string() +
          " --horizon 10 --seed 1",
      dir);
  CHECK(no_file.exit_code == 2);
}

TEST_CASE("cli: limit experiment report") {
  fs::path dir = fresh_dir("limit");
  std::string base =
      "limit --lambda 0.9 --mu 1.1 --depth uniform:2,2 --n-ladder 64 "
      "--t-grid 0.5,1,1.5,2 --paths 1200 --seed 7 --outdir ";
  RunResult r1 = run_tool(base + (dir / "a").string(), dir);
  CHECK(r1.exit_code == 0);
  json lim = json::parse(slurp(dir / "a" / "limit.json"));
  CHECK(lim["regime"]["regime"] == "SubcriticalStandard");
  CHECK(lim["schedule_used"] == "t_n = n*t");
  REQUIRE(lim["slopes"].size() == 1);
  CHECK(lim["slopes"][0]["n"] == 64.0);
  CHECK(lim["slopes"][0]["paths_used"] == 1200);
  double slope = lim["slopes"][0]["slope"].get<double>();
  CHECK(slope > 0.5);
  CHECK(slope < 1.5);
  auto rows = read_csv(dir / "a" / "variance_n64.csv",
                       "t,t_n,variance,mean_count");
  REQUIRE(rows.size() == 4);
  CHECK(rows[3][1] == doctest::Approx(128.0));

  RunResult r2 = run_tool(base + (dir / "b").string(), dir);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(dir / "a" / "limit.json") == slurp(dir / "b" / "limit.json"));
  CHECK(slurp(dir / "a" / "variance_n64.csv") ==
        slurp(dir / "b" / "variance_n64.csv"));
}

TEST_CASE("cli: limit failure and edge modes") {
  fs::path dir = fresh_dir("limit_edge");
  RunResult starved = run_tool(
      "limit --lambda 0.9 --mu 1.1 --n-ladder 64 --paths 500 --seed 1 "
      "--outdir " +
          (dir / "s").string(),
      dir);
  CHECK(starved.exit_code == 3);
  CHECK(starved.err.find("error:") != std::string::npos);

  RunResult none = run_tool(
      "limit --lambda 1 --mu 1 --alpha power:1,-1.5 --seed 3 --outdir " +
          (dir / "n").string(),
      dir);
  CHECK(none.exit_code == 0);
  json lim = json::parse(slurp(dir / "n" / "limit.json"));
  CHECK(lim["regime"]["regime"] == "NoConvergence");
  CHECK(lim["slopes"].empty());

  RunResult misuse = run_tool(
      "limit --lambda 0.9 --mu 1.1 --printed-schedule --seed 1 --outdir " +
          (dir / "m").string(),
      dir);
  CHECK(misuse.exit_code == 2);

  RunResult printed = run_tool(
      "limit --lambda 1 --mu 1 --n-ladder 64 --t-grid 0.5,1,1.5,2 "
      "--paths 1200 --printed-schedule --seed 5 --outdir " +
          (dir / "p").string(),
      dir);
  CHECK(printed.exit_code == 0);
  json plim = json::parse(slurp(dir / "p" / "limit.json"));
  std::string used = plim["schedule_used"].get<std::string>();
  CHECK(used.find("comparison form") != std::string::npos);

  RunResult dup = run_tool(
      "limit --lambda 0.9 --mu 1.1 --n-ladder 64,64 --seed 1 --outdir " +
          (dir / "d").string(),
      dir);
  CHECK(dup.exit_code == 2);
}

TEST_CASE("cli: fit from the bundled table") {
  fs::path dir = fresh_dir("fit_table");
  RunResult r = run_tool(
      std::string("fit --table ") + FIXTURE_DIR +
          "/stock_fits_nov2014.json --outdir " + (dir / "o").string(),
      dir);
  CHECK(r.exit_code == 0);
  json rep = json::parse(slurp(dir / "o" / "report.json"));
  REQUIRE(rep.is_array());
  CHECK(rep.size() == 6);
  std::string text = slurp(dir / "o" / "report.txt");
  CHECK(text.find("MSFT") != std::string::npos);
  CHECK(text.find("CriticalTimeDependent") != std::string::npos);
  CHECK(r.out.find("stock") != std::string::npos);
}

TEST_CASE("cli: fit from an event file") {
  fs::path dir = fresh_dir("fit_events");
  lob::Rng rng(12);
  lob::EventStream stream = lob::synthetic_session(
      {0.1703, 0.456}, {0.179, 0.4412}, {0.1264, 0.4149}, {0.1775, 0.4509},
      50.0, 23400.0, rng);
  fs::path events = dir / "session_a.csv";
  {
    std::ofstream out(events, std::ios::binary);
    out << lob::events_to_csv(stream);
  }
  RunResult r = run_tool(
      "fit --events " + events.string() + " --outdir " + (dir / "o").string(),
      dir);
  CHECK(r.exit_code == 0);
  for (const char* f : {"curve_lambda_ask.csv", "curve_mu_ask.csv",
                        "curve_lambda_bid.csv", "curve_mu_bid.csv"}) {
    auto rows = read_csv(dir / "o" / f, "t_mid,rate");
    CHECK(rows.size() == 78);
  }
  json rep = json::parse(slurp(dir / "o" / "report.json"));
  REQUIRE(rep.size() == 1);
  CHECK(rep[0]["name"] == "session_a");
  CHECK(rep[0].contains("quotient_ask"));
}

TEST_CASE("cli: fit failure modes") {
  fs::path dir = fresh_dir("fit_bad");
  RunResult neither = run_tool("fit", dir);
  CHECK(neither.exit_code == 2);
  CHECK(neither.err.find("exactly one") != std::string::npos);
  RunResult both = run_tool(
      "fit --events a.csv --table b.json", dir);
  CHECK(both.exit_code == 2);

  fs::path bad = dir / "bad.csv";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "t_seconds,side,kind,price_ticks,size\n"
           "1.0,B,L,100,1\n"
           "oops,B,L,100,1\n";
  }
  RunResult malformed = run_tool(
      "fit --events " + bad.string() + " --outdir " + (dir / "m").string(),
      dir);
  CHECK(malformed.exit_code == 2);
  CHECK(malformed.err.find("line 3") != std::string::npos);

  fs::path empty = dir / "empty.csv";
  { std::ofstream out(empty, std::ios::binary); }
  RunResult vacuous = run_tool(
      "fit --events " + empty.string() + " --outdir " + (dir / "e").string(),
      dir);
  CHECK(vacuous.exit_code == 2);

  fs::path sparse = dir / "sparse.csv";
  {
    std::ofstream out(sparse, std::ios::binary);
    out << "t_seconds,side,kind,price_ticks,size\n"
           "10.0,A,L,100,1\n"
           "11.0,A,L,100,1\n"
           "12.0,A,M,100,1\n"
           "13.0,B,L,100,1\n"
           "14.0,B,M,100,1\n";
  }
  RunResult thin = run_tool(
      "fit --events " + sparse.string() + " --outdir " + (dir / "t").string(),
      dir);
  CHECK(thin.exit_code == 3);
  CHECK(thin.err.find("error:") != std::string::npos);

  RunResult missing = run_tool(
      "fit --events " + (dir / "ghost.csv").string(), dir);
  CHECK(missing.exit_code == 2);
}
