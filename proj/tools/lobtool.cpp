#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lob/analytic.hpp"
#include "lob/empirical.hpp"
#include "lob/oracle.hpp"
#include "lob/rates.hpp"
#include "lob/scaling.hpp"
#include "lob/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataInsufficiency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size())
      throw std::invalid_argument("bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

lob::DepthDistribution parse_depth(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) args = parse_list(text.substr(colon + 1));
  if (head == "point" && args.size() == 2)
    return lob::DepthDistribution::point_mass(static_cast<int>(args[0]),
                                              static_cast<int>(args[1]));
  if (head == "uniform" && args.size() == 2)
    return lob::DepthDistribution::uniform(static_cast<int>(args[0]),
                                           static_cast<int>(args[1]));
  throw std::invalid_argument(
      "depth must be point:x,y or uniform:max_bid,max_ask");
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string format_csv(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---- survival ----------------------------------------------------------

struct SurvivalArgs {
  double lambda = 0.0, mu = 0.0;
  int x = 0;
  double tmin = 0.0, tmax = 0.0;
  int points = 50;
  std::string alpha;
  bool oracle = false;
  std::string out = "survival.csv";
};

int run_survival(const SurvivalArgs& a) {
  if (a.x < 1) {
    std::cerr << "x must be >= 1\n";
    return 2;
  }
  if (a.lambda <= 0.0 || a.mu <= 0.0) {
    std::cerr << "rates must be positive\n";
    return 2;
  }
  if (a.tmax <= a.tmin || a.points < 1) {
    std::cerr << "need tmax > tmin and points >= 1\n";
    return 2;
  }
  std::optional<lob::CumulativeClock> clock;
  if (!a.alpha.empty())
    clock.emplace(lob::RateSpec{lob::parse_rate_form(a.alpha), a.lambda, a.mu});
  std::ostringstream os;
  os << "T,survival,tail";
  if (clock) os << ",A_T";
  if (a.oracle) os << ",oracle";
  os << "\n";
  for (int i = 0; i < a.points; ++i) {
    double T = a.points == 1
                   ? a.tmax
                   : a.tmin + (a.tmax - a.tmin) * i / (a.points - 1.0);
    double surv, tail, at = T;
    if (clock) {
      surv = lob::survival_timechanged(*clock, T, a.x);
      at = T <= clock->origin() ? 0.0 : clock->cumulative(T);
      tail = at > 0.0 ? lob::tail_sigma(at, a.x, a.lambda, a.mu) : 1.0;
    } else {
      surv = lob::survival_const(T, a.x, a.lambda, a.mu);
      tail = T > 0.0 ? lob::tail_sigma(T, a.x, a.lambda, a.mu) : 1.0;
    }
    os << format_csv(T) << ',' << format_csv(surv) << ',' << format_csv(tail);
    if (clock) os << ',' << format_csv(at);
    if (a.oracle) {
      double v = clock ? lob::ctmc_survival(*clock, T, a.x).value
                       : lob::ctmc_survival_const(T, a.x, a.lambda, a.mu).value;
      os << ',' << format_csv(v);
    }
    os << "\n";
  }
  write_file(a.out, os.str());
  return 0;
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
  std::string config;
  int paths = 1;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  int export_paths = 1;
  std::string outdir = ".";
};

int run_simulate(const SimulateArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw std::runtime_error("cannot open config: " + a.config);
  json j = json::parse(in);
  lob::BookConfig config = lob::book_config_from_json(j);
  if (a.paths < 1) throw std::invalid_argument("paths must be >= 1");
  if (a.horizon <= 0.0) throw std::invalid_argument("horizon must be > 0");
  std::vector<lob::PricePath> paths =
      lob::replicate(config, a.paths, a.horizon, a.seed);
  fs::create_directories(a.outdir);
  int exported = std::min<int>(a.export_paths, a.paths);
  for (int i = 0; i < exported; ++i)
    write_file(fs::path(a.outdir) / ("path_" + std::to_string(i) + ".csv"),
               lob::path_to_csv(paths[static_cast<std::size_t>(i)]));
  json summary = lob::path_summary(paths);
  summary["seed"] = a.seed;
  summary["horizon"] = a.horizon;
  summary["config"] = lob::book_config_to_json(config);
  write_file(fs::path(a.outdir) / "summary.json", summary.dump(2) + "\n");
  return 0;
}

// ---- limit -------------------------------------------------------------

struct LimitArgs {
  double lambda = 0.0, mu = 0.0;
  std::string alpha = "constant:1";
  std::string ladder = "1024,4096,16384";
  std::string grid = "0.25,0.5,0.75,1,1.25,1.5,1.75,2";
  std::string depth = "point:1,1";
  int paths = 2000;
  std::uint64_t seed = 0;
  bool printed_schedule = false;
  std::string outdir = ".";
};

int run_limit(const LimitArgs& a) {
  lob::RateSpec spec{lob::parse_rate_form(a.alpha), a.lambda, a.mu};
  lob::RegimeReport report = lob::classify_regime(spec);
  fs::create_directories(a.outdir);

  std::vector<double> ladder = parse_list(a.ladder);
  if (!std::is_sorted(ladder.begin(), ladder.end()) ||
      std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end())
    throw std::invalid_argument("n-ladder must be strictly increasing");
  std::vector<double> grid = parse_list(a.grid);

  lob::Schedule schedule = report.schedule;
  if (a.printed_schedule) {
    if (report.regime != lob::Regime::kCriticalTimeDependent)
      throw std::invalid_argument(
          "--printed-schedule applies to the time-dependent balanced regime");
    schedule = {lob::ScheduleKind::kPrintedLog, schedule.exponent};
  }

  json slopes = json::array();
  if (report.regime != lob::Regime::kNoConvergence) {
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      lob::LimitExperiment exp;
      exp.book.rates = spec;
      exp.book.depth = parse_depth(a.depth);
      exp.schedule = schedule;
      exp.n = ladder[k];
      exp.t_grid = grid;
      exp.n_paths = a.paths;
      exp.master_seed = lob::derive_seed(a.seed, k);
      lob::LimitResult res = lob::run_limit_experiment(exp);

      std::ostringstream os;
      os << "t,t_n,variance,mean_count\n";
      for (std::size_t g = 0; g < res.profile.points.size(); ++g) {
        const auto& p = res.profile.points[g];
        os << format_csv(p.t) << ',' << format_csv(p.t_n) << ','
           << format_csv(p.variance) << ',' << format_csv(res.mean_count[g])
           << "\n";
      }
      std::string tag = std::to_string(static_cast<long>(ladder[k]));
      write_file(fs::path(a.outdir) / ("variance_n" + tag + ".csv"), os.str());

      const lob::OlsFit& fit = res.profile.loglog;
      slopes.push_back({{"n", ladder[k]},
                        {"slope", fit.slope},
                        {"slope_stderr", fit.slope_stderr},
                        {"ci_low", fit.slope - 1.96 * fit.slope_stderr},
                        {"ci_high", fit.slope + 1.96 * fit.slope_stderr},
                        {"r2", fit.r2},
                        {"paths_used", res.profile.paths_used},
                        {"censored", res.profile.censored},
                        {"pooled_mean", res.profile.pooled_mean}});
    }
  }
  json out;
  out["regime"] = report.to_json();
  out["schedule_used"] = schedule.describe();
  out["seed"] = a.seed;
  out["slopes"] = slopes;
  write_file(fs::path(a.outdir) / "limit.json", out.dump(2) + "\n");
  return 0;
}

// ---- fit ---------------------------------------------------------------

struct FitArgs {
  std::string events;
  std::string table;
  double bin_width = lob::kDefaultBinWidth;
  double session = lob::kDefaultSessionLength;
  std::string outdir = ".";
};

void write_curve(const fs::path& path, const lob::IntensityCurve& curve) {
  std::ostringstream os;
  os << "t_mid,rate\n";
  for (std::size_t i = 0; i < curve.bins(); ++i)
    os << format_csv(curve.mid(i)) << ',' << format_csv(curve.rate[i]) << "\n";
  write_file(path, os.str());
}

lob::PowerLawFit checked_fit(const lob::IntensityCurve& curve) {
  try {
    return lob::fit_power_law(curve);
  } catch (const std::runtime_error& e) {
    throw DataInsufficiency(e.what());
  }
}

int run_fit(const FitArgs& a) {
  fs::create_directories(a.outdir);
  std::vector<lob::StockFits> all;
  if (!a.table.empty()) {
    std::ifstream in(a.table);
    if (!in) throw std::runtime_error("cannot open fixture: " + a.table);
    json j = json::parse(in);
    for (const auto& row : j.at("stocks"))
      all.push_back(lob::stock_fits_from_json(row));
  } else {
    lob::EventStream stream = lob::parse_events_file(a.events);
    using K = lob::EventKind;
    auto la = lob::estimate_intensity(stream, lob::Side::kAsk, {K::kLimit},
                                      a.bin_width, a.session);
    auto ma = lob::estimate_intensity(stream, lob::Side::kAsk,
                                      {K::kMarket, K::kCancel}, a.bin_width,
                                      a.session);
    auto lb = lob::estimate_intensity(stream, lob::Side::kBid, {K::kLimit},
                                      a.bin_width, a.session);
    auto mb = lob::estimate_intensity(stream, lob::Side::kBid,
                                      {K::kMarket, K::kCancel}, a.bin_width,
                                      a.session);
    write_curve(fs::path(a.outdir) / "curve_lambda_ask.csv", la);
    write_curve(fs::path(a.outdir) / "curve_mu_ask.csv", ma);
    write_curve(fs::path(a.outdir) / "curve_lambda_bid.csv", lb);
    write_curve(fs::path(a.outdir) / "curve_mu_bid.csv", mb);
    lob::StockFits fits;
    fits.name = fs::path(a.events).stem().string();
    fits.lambda_ask = checked_fit(la);
    fits.mu_ask = checked_fit(ma);
    fits.lambda_bid = checked_fit(lb);
    fits.mu_bid = checked_fit(mb);
    fits.quotient_ask = lob::quotient_series(la, ma).mean;
    fits.quotient_bid = lob::quotient_series(lb, mb).mean;
    all.push_back(std::move(fits));
  }
  lob::TableReport report = lob::table_report(all);
  write_file(fs::path(a.outdir) / "report.json", report.to_json().dump(2) + "\n");
  std::string text = report.to_text();
  write_file(fs::path(a.outdir) / "report.txt", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-one order book queue toolkit"};
  app.require_subcommand(1);

  SurvivalArgs sa;
  CLI::App* survival = app.add_subcommand(
      "survival", "first-passage survival curves with tail and oracle columns");
  survival->add_option("--lambda", sa.lambda)->required();
  survival->add_option("--mu", sa.mu)->required();
  survival->add_option("--x", sa.x)->required();
  survival->add_option("--tmin", sa.tmin);
  survival->add_option("--tmax", sa.tmax)->required();
  survival->add_option("--points", sa.points);
  survival->add_option("--alpha", sa.alpha,
                       "rate form constant:c | power:K,s | powerlog:K,s,m | "
                       "recip:k,t0");
  survival->add_flag("--oracle", sa.oracle);
  survival->add_option("--out", sa.out);

  SimulateArgs ma;
  CLI::App* simulate =
      app.add_subcommand("simulate", "sample price paths from a book config");
  simulate->add_option("--config", ma.config)->required();
  simulate->add_option("--paths", ma.paths);
  simulate->add_option("--horizon", ma.horizon)->required();
  simulate->add_option("--seed", ma.seed)->required();
  simulate->add_option("--export-paths", ma.export_paths);
  simulate->add_option("--outdir", ma.outdir);

  LimitArgs la;
  CLI::App* limit = app.add_subcommand(
      "limit", "rescaled-price variance profiles and regime report");
  limit->add_option("--lambda", la.lambda)->required();
  limit->add_option("--mu", la.mu)->required();
  limit->add_option("--alpha", la.alpha);
  limit->add_option("--n-ladder", la.ladder);
  limit->add_option("--t-grid", la.grid);
  limit->add_option("--depth", la.depth);
  limit->add_option("--paths", la.paths);
  limit->add_option("--seed", la.seed)->required();
  limit->add_flag("--printed-schedule", la.printed_schedule,
                  "use the printed comparison schedule");
  limit->add_option("--outdir", la.outdir);

  FitArgs fa;
  CLI::App* fit = app.add_subcommand(
      "fit", "intensity estimation, power-law fits and classification");
  fit->add_option("--events", fa.events);
  fit->add_option("--table", fa.table);
  fit->add_option("--bin-width", fa.bin_width);
  fit->add_option("--session", fa.session);
  fit->add_option("--outdir", fa.outdir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (survival->parsed()) return run_survival(sa);
    if (simulate->parsed()) return run_simulate(ma);
    if (limit->parsed()) return run_limit(la);
    if (fit->parsed()) {
      if (fa.events.empty() == fa.table.empty()) {
        std::cerr << "fit: pass exactly one of --events or --table\n";
        return 2;
      }
      return run_fit(fa);
    }
  } catch (const lob::InsufficientPathsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataInsufficiency& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const lob::EventParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
