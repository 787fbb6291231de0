#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lob/rates.hpp"
#include "lob/simulator.hpp"
#include "lob/stats.hpp"

namespace lob {

enum class Regime {
  kSubcriticalStandard,
  kSubcriticalBoundary,
  kCriticalStandard,
  kCriticalTimeDependent,
  kNoConvergence,
};
const char* regime_name(Regime r);

enum class ScheduleKind {
  kLinear,      // t_n = n * t
  kPowerRoot,   // t_n = t * n^exponent   (exponent = 1/(2kC))
  kProofLog,    // t_n = t * (n log n)^exponent
  kPrintedLog,  // t_n = t * n^{1/exponent} * log n (comparison form)
  kNone,
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::kLinear;
  double exponent = 1.0;

  double time(double t, double n) const;  // wall horizon t_n
  std::string describe() const;
};

/** Variance structure of the limit: plain Brownian motion, or a Brownian
 *  integral against the kernel u^exponent. */
struct LimitVolatility {
  bool constant_bm = true;
  double exponent = 0.0;
  std::string describe() const;
};

struct RegimeReport {
  Regime regime = Regime::kNoConvergence;
  Schedule schedule;
  LimitVolatility volatility;
  double lambda = 0.0;
  double mu = 0.0;
  double quotient = 0.0;  // lambda / mu
  double gap = 0.0;       // C = (sqrt(mu) - sqrt(lambda))^2
  std::string form;
  std::string note;

  nlohmann::json to_json() const;
};

/** Decide the rescaling regime for a fitted rate family. Quotients at or
 *  above the threshold are treated as the balanced case. Piecewise forms
 *  are not classifiable. */
RegimeReport classify_regime(const RateSpec& spec,
                             double criticality_threshold = 0.97);

struct InsufficientPathsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VariancePoint {
  double t = 0.0;
  double t_n = 0.0;
  double variance = 0.0;
};

struct VarianceProfile {
  std::vector<VariancePoint> points;
  double pooled_mean = 0.0;  // empirical mean direction used for centering
  long paths_used = 0;
  long censored = 0;
  OlsFit loglog;  // slope of log variance vs log t
};

/** Var[(s_{t_n} - mean_dir * N_{t_n}) / sqrt(n)] across paths at each grid t.
 *  Directions are centered by the pooled mean over every change up to the
 *  largest t_n. Requires >= 1000 usable paths. */
VarianceProfile variance_profile(const std::vector<PricePath>& paths,
                                 const Schedule& schedule, double n,
                                 const std::vector<double>& t_grid);

/** The centered, rescaled prices at one grid time (one value per usable
 *  path), for distributional tests. */
std::vector<double> centered_rescaled_prices(
    const std::vector<PricePath>& paths, const Schedule& schedule, double n,
    double t);

struct CountingPoint {
  double t = 0.0;
  double t_n = 0.0;
  double empirical = 0.0;  // mean N_{t_n} / n
  double theory = 0.0;     // profile implied by the regime (NaN if unknown)
};

/** Mean of N_{t_n}/n against the regime's predicted profile: t/E[tau] for
 *  the standard schedules; a shape curve t^{2kC} (resp. t^{1/s}) matched at
 *  the last grid point for the boundary (resp. time-dependent) regime. */
std::vector<CountingPoint> counting_process_rescale(
    const std::vector<PricePath>& paths, const RegimeReport& report, double n,
    const std::vector<double>& t_grid, double mean_tau = 0.0);

enum class TruncatedKind {
  kPsi,  // tail Theta / (t^a log t), a = 2kC in (0, 1]
  kPhi,  // tail Theta / t^s, s in (0, 1]
};

/** E[X_n] for the rescaled truncated durations, via the exact identity
 *  E[tau 1{tau<b}] = int_0^b G - b G(b) with G the capped tail law.
 *  Returns (n, value) pairs. */
std::vector<std::pair<double, double>> truncated_mean_sequence(
    TruncatedKind kind, double theta, double tail_exponent,
    const std::vector<double>& n_list);

/** Streaming Monte Carlo limit experiment: paths are sampled on the grid
 *  and discarded, so memory stays flat in the path count. */
struct LimitExperiment {
  BookConfig book;
  Schedule schedule;
  double n = 1.0;
  std::vector<double> t_grid;
  int n_paths = 0;
  std::uint64_t master_seed = 0;
};

struct LimitResult {
  VarianceProfile profile;
  std::vector<std::vector<double>> centered;  // [grid point][path]
  std::vector<double> mean_count;             // mean N_{t_n}/n per grid point
};

LimitResult run_limit_experiment(const LimitExperiment& cfg);

}  // namespace lob
