#include "lob/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lob/quadrature.hpp"

namespace lob {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kSubcriticalStandard: return "SubcriticalStandard";
    case Regime::kSubcriticalBoundary: return "SubcriticalBoundary";
    case Regime::kCriticalStandard: return "CriticalStandard";
    case Regime::kCriticalTimeDependent: return "CriticalTimeDependent";
    case Regime::kNoConvergence: return "NoConvergence";
  }
  return "?";
}

double Schedule::time(double t, double n) const {
  switch (kind) {
    case ScheduleKind::kLinear:
      return n * t;
    case ScheduleKind::kPowerRoot:
      return t * std::pow(n, exponent);
    case ScheduleKind::kProofLog:
      return t * std::pow(n * std::log(n), exponent);
    case ScheduleKind::kPrintedLog:
      return t * std::pow(n, 1.0 / exponent) * std::log(n);
    case ScheduleKind::kNone:
      break;
  }
  throw std::logic_error("schedule: no admissible rescaling");
}

std::string Schedule::describe() const {
  switch (kind) {
    case ScheduleKind::kLinear:
      return "t_n = n*t";
    case ScheduleKind::kPowerRoot:
      return "t_n = t*n^" + format_number(exponent);
    case ScheduleKind::kProofLog:
      return "t_n = t*(n*log n)^" + format_number(exponent);
    case ScheduleKind::kPrintedLog:
      return "t_n = t*n^" + format_number(1.0 / exponent) +
             "*log n (comparison form)";
    case ScheduleKind::kNone:
      break;
  }
  return "none";
}

std::string LimitVolatility::describe() const {
  if (constant_bm) return "constant Brownian motion";
  return "Brownian integral with kernel u^" + format_number(exponent);
}

nlohmann::json RegimeReport::to_json() const {
  nlohmann::json j;
  j["regime"] = regime_name(regime);
  j["schedule"] = schedule.describe();
  if (schedule.kind != ScheduleKind::kNone) {
    j["schedule_kind"] = static_cast<int>(schedule.kind);
    j["schedule_exponent"] = schedule.exponent;
  }
  j["volatility"] = volatility.describe();
  if (!volatility.constant_bm) j["kernel_exponent"] = volatility.exponent;
  j["lambda"] = lambda;
  j["mu"] = mu;
  j["quotient"] = quotient;
  j["gap"] = gap;
  j["form"] = form;
  if (!note.empty()) j["note"] = note;
  return j;
}

namespace {

RegimeReport base_report(const RateSpec& spec) {
  RegimeReport r;
  r.lambda = spec.lambda;
  r.mu = spec.mu;
  r.quotient = spec.lambda / spec.mu;
  double d = std::sqrt(spec.mu) - std::sqrt(spec.lambda);
  r.gap = d * d;
  r.form = describe_rate_form(spec.form);
  return r;
}

void set_no_convergence(RegimeReport& r, const std::string& note) {
  r.regime = Regime::kNoConvergence;
  r.schedule = {ScheduleKind::kNone, 0.0};
  r.volatility = {true, 0.0};
  r.note = note;
}

void classify_reciprocal_like(RegimeReport& r, bool critical, double k) {
  if (critical) {
    set_no_convergence(r,
                       "balanced rates with logarithmic integrated intensity: "
                       "no rescaling schedule yields a nondegenerate limit");
    return;
  }
  double theta = 2.0 * k * r.gap;
  if (theta > 1.0) {
    r.regime = Regime::kSubcriticalStandard;
    r.schedule = {ScheduleKind::kLinear, 1.0};
    r.volatility = {true, 0.0};
  } else {
    r.regime = Regime::kSubcriticalBoundary;
    r.schedule = {ScheduleKind::kPowerRoot, 1.0 / theta};
    r.volatility = {false, (theta - 1.0) / 2.0};
  }
}

void classify_power_like(RegimeReport& r, bool critical, double exponent,
                         const std::string& extra_note) {
  if (!critical) {
    r.regime = Regime::kSubcriticalStandard;
    r.schedule = {ScheduleKind::kLinear, 1.0};
    r.volatility = {true, 0.0};
    r.note = extra_note;
    return;
  }
  double s = exponent + 1.0;
  if (s > 1.0) {
    r.regime = Regime::kCriticalStandard;
    r.schedule = {ScheduleKind::kLinear, 1.0};
    r.volatility = {true, 0.0};
    r.note = extra_note;
  } else if (s > 0.0) {
    r.regime = Regime::kCriticalTimeDependent;
    r.schedule = {ScheduleKind::kProofLog, s};
    if (s == 1.0) {
      r.volatility = {true, 0.0};
      // extra_note may alias r.note, so compose before assigning
      std::string note = "balanced constant-intensity case: schedule t*n*log n";
      if (!extra_note.empty()) note += "; " + extra_note;
      r.note = std::move(note);
    } else {
      r.volatility = {false, -s / 2.0};
      r.note = extra_note;
    }
  } else {
    set_no_convergence(
        r,
        "balanced rates with integrated-intensity growth exponent " +
            format_number(s) +
            " <= 0: no rescaling schedule yields a nondegenerate limit" +
            (extra_note.empty() ? "" : "; " + extra_note));
  }
}

}  // namespace

RegimeReport classify_regime(const RateSpec& spec,
                             double criticality_threshold) {
  if (spec.lambda <= 0.0 || spec.mu <= 0.0)
    throw std::invalid_argument("classify_regime: rates must be positive");
  if (std::holds_alternative<PiecewiseForm>(spec.form))
    throw std::invalid_argument(
        "classify_regime: piecewise forms are not classifiable");

  RegimeReport r = base_report(spec);
  bool critical = r.quotient >= criticality_threshold;
  if (critical && r.quotient > 1.0)
    r.note = "quotient above 1 treated as balanced";

  if (const auto* c = std::get_if<ConstantForm>(&spec.form)) {
    (void)c;
    classify_power_like(r, critical, 0.0, r.note);
    return r;
  }
  if (const auto* p = std::get_if<PowerForm>(&spec.form)) {
    if (p->exponent < -1.0) {
      set_no_convergence(r,
                         "integrated intensity converges: the book makes "
                         "finitely many price changes almost surely");
      return r;
    }
    if (p->exponent == -1.0) {
      classify_reciprocal_like(r, critical, p->coeff);
      return r;
    }
    classify_power_like(r, critical, p->exponent, r.note);
    return r;
  }
  if (const auto* pl = std::get_if<PowerLogForm>(&spec.form)) {
    if (pl->exponent < -1.0) {
      set_no_convergence(r,
                         "integrated intensity converges: the book makes "
                         "finitely many price changes almost surely");
      return r;
    }
    if (pl->exponent == -1.0) {
      if (pl->log_power == 0.0) {
        classify_reciprocal_like(r, critical, pl->coeff);
        return r;
      }
      if (critical) {
        set_no_convergence(r,
                           "balanced rates with polylogarithmic integrated "
                           "intensity: no rescaling schedule yields a "
                           "nondegenerate limit");
        return r;
      }
      r.regime = Regime::kSubcriticalStandard;
      r.schedule = {ScheduleKind::kLinear, 1.0};
      r.volatility = {true, 0.0};
      r.note = "duration tail decays faster than every power law";
      return r;
    }
    classify_power_like(r, critical, pl->exponent,
                        "logarithmic factor ignored at leading order");
    return r;
  }
  const auto& rec = std::get<ReciprocalForm>(spec.form);
  classify_reciprocal_like(r, critical, rec.k);
  return r;
}

namespace {

// (S_{t_n}, N_{t_n}) per path per grid point; prefix sums built once.
struct PathGridStats {
  std::vector<std::vector<double>> s;  // [grid][path]
  std::vector<std::vector<double>> n;  // [grid][path]
  double pooled_mean = 0.0;
  long paths_used = 0;
  long censored = 0;
};

PathGridStats collect_grid_stats(const std::vector<PricePath>& paths,
                                 const Schedule& schedule, double n,
                                 const std::vector<double>& t_grid) {
  if (t_grid.empty())
    throw std::invalid_argument("variance_profile: empty time grid");
  std::vector<double> horizons(t_grid.size());
  for (std::size_t g = 0; g < t_grid.size(); ++g)
    horizons[g] = schedule.time(t_grid[g], n);
  if (!std::is_sorted(horizons.begin(), horizons.end()))
    throw std::invalid_argument("variance_profile: grid must be increasing");

  PathGridStats st;
  st.s.assign(t_grid.size(), {});
  st.n.assign(t_grid.size(), {});
  double sum_dir = 0.0, sum_count = 0.0;
  for (const auto& p : paths) {
    if (p.censored) {
      ++st.censored;
      continue;
    }
    ++st.paths_used;
    long displacement = 0;
    std::size_t i = 0;
    for (std::size_t g = 0; g < horizons.size(); ++g) {
      while (i < p.epochs.size() && p.epochs[i] <= horizons[g]) {
        displacement += p.directions[i];
        ++i;
      }
      st.s[g].push_back(static_cast<double>(displacement));
      st.n[g].push_back(static_cast<double>(i));
    }
    sum_dir += static_cast<double>(displacement);
    sum_count += static_cast<double>(i);
  }
  if (st.paths_used < 1000)
    throw InsufficientPathsError(
        "variance_profile: needs >= 1000 usable paths, got " +
        std::to_string(st.paths_used));
  st.pooled_mean = sum_count > 0.0 ? sum_dir / sum_count : 0.0;
  return st;
}

VarianceProfile profile_from_stats(const PathGridStats& st, double n,
                                   const std::vector<double>& t_grid,
                                   const Schedule& schedule) {
  VarianceProfile out;
  out.pooled_mean = st.pooled_mean;
  out.paths_used = st.paths_used;
  out.censored = st.censored;
  const double root_n = std::sqrt(n);
  std::vector<double> log_t, log_var;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    std::vector<double> centered(st.s[g].size());
    for (std::size_t p = 0; p < centered.size(); ++p)
      centered[p] = (st.s[g][p] - st.pooled_mean * st.n[g][p]) / root_n;
    MeanVar mv = mean_var(centered);
    out.points.push_back({t_grid[g], schedule.time(t_grid[g], n), mv.var});
    if (t_grid[g] > 0.0 && mv.var > 0.0) {
      log_t.push_back(std::log(t_grid[g]));
      log_var.push_back(std::log(mv.var));
    }
  }
  if (log_t.size() >= 3) out.loglog = ols(log_t, log_var);
  return out;
}

}  // namespace

VarianceProfile variance_profile(const std::vector<PricePath>& paths,
                                 const Schedule& schedule, double n,
                                 const std::vector<double>& t_grid) {
  PathGridStats st = collect_grid_stats(paths, schedule, n, t_grid);
  return profile_from_stats(st, n, t_grid, schedule);
}

std::vector<double> centered_rescaled_prices(
    const std::vector<PricePath>& paths, const Schedule& schedule, double n,
    double t) {
  PathGridStats st = collect_grid_stats(paths, schedule, n, {t});
  std::vector<double> out(st.s[0].size());
  const double root_n = std::sqrt(n);
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = (st.s[0][p] - st.pooled_mean * st.n[0][p]) / root_n;
  return out;
}

std::vector<CountingPoint> counting_process_rescale(
    const std::vector<PricePath>& paths, const RegimeReport& report, double n,
    const std::vector<double>& t_grid, double mean_tau) {
  if (report.regime == Regime::kNoConvergence)
    throw std::invalid_argument(
        "counting_process_rescale: no admissible rescaling");
  PathGridStats st = collect_grid_stats(paths, report.schedule, n, t_grid);
  std::vector<CountingPoint> out(t_grid.size());
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    MeanVar mv = mean_var(st.n[g]);
    out[g].t = t_grid[g];
    out[g].t_n = report.schedule.time(t_grid[g], n);
    out[g].empirical = mv.mean / n;
  }
  double shape = 0.0;
  switch (report.regime) {
    case Regime::kSubcriticalStandard:
    case Regime::kCriticalStandard:
      for (auto& c : out) c.theory = mean_tau > 0.0 ? c.t / mean_tau : kNaN;
      return out;
    case Regime::kSubcriticalBoundary:
      shape = 1.0 / report.schedule.exponent;  // = 2kC
      break;
    case Regime::kCriticalTimeDependent:
      shape = 1.0 / report.schedule.exponent;  // = 1/s
      break;
    default:
      break;
  }
  // shape profile anchored at the last grid point
  double t_ref = out.back().t, v_ref = out.back().empirical;
  for (auto& c : out)
    c.theory = t_ref > 0.0 ? v_ref * std::pow(c.t / t_ref, shape) : kNaN;
  return out;
}

namespace {

// G(t) = min(1, theta / (t^a log t)) for t > 1, 1 on [0, 1]; continuous
// because the cap binds on a neighbourhood of 1.
double psi_cap_point(double theta, double a) {
  double lo = 1.0, hi = 2.0;
  while (std::pow(hi, a) * std::log(hi) < theta) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (std::pow(mid, a) * std::log(mid) < theta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double psi_truncated_mean(double theta, double a, double b) {
  double t_star = psi_cap_point(theta, a);
  if (b <= t_star) return 0.0;
  auto integrand = [theta, a](double t) {
    return theta / (std::pow(t, a) * std::log(t));
  };
  QuadResult q = integrate_adaptive(integrand, t_star, b, 1e-13, 1e-10);
  return t_star + q.value - b * integrand(b);
}

double phi_truncated_mean(double theta, double s, double b) {
  double t_star = std::pow(theta, 1.0 / s);
  if (b <= t_star) return 0.0;
  double tail_part;
  if (s == 1.0)
    tail_part = theta * std::log(b / t_star);
  else
    tail_part =
        theta * (std::pow(b, 1.0 - s) - std::pow(t_star, 1.0 - s)) / (1.0 - s);
  return t_star + tail_part - theta * std::pow(b, 1.0 - s);
}

}  // namespace

std::vector<std::pair<double, double>> truncated_mean_sequence(
    TruncatedKind kind, double theta, double tail_exponent,
    const std::vector<double>& n_list) {
  if (theta < 0.0)
    throw std::invalid_argument("truncated_mean_sequence: theta must be >= 0");
  if (!(tail_exponent > 0.0 && tail_exponent <= 1.0))
    throw std::invalid_argument(
        "truncated_mean_sequence: tail exponent must lie in (0, 1]");
  std::vector<std::pair<double, double>> out;
  out.reserve(n_list.size());
  for (double n : n_list) {
    if (n < 2.0)
      throw std::invalid_argument("truncated_mean_sequence: n must be >= 2");
    double value = 0.0;
    if (theta > 0.0) {
      if (kind == TruncatedKind::kPsi) {
        double b = std::pow(n, 1.0 / tail_exponent);
        value = std::pow(n, 1.0 - 1.0 / tail_exponent) *
                psi_truncated_mean(theta, tail_exponent, b);
      } else {
        double b = std::pow(n, 1.0 / tail_exponent) * std::log(n);
        value = n / b * phi_truncated_mean(theta, tail_exponent, b);
      }
    }
    out.emplace_back(n, value);
  }
  return out;
}

LimitResult run_limit_experiment(const LimitExperiment& cfg) {
  if (cfg.t_grid.empty())
    throw std::invalid_argument("limit experiment: empty time grid");
  if (cfg.n_paths < 1000)
    throw InsufficientPathsError(
        "limit experiment: needs >= 1000 paths, got " +
        std::to_string(cfg.n_paths));
  std::vector<double> horizons(cfg.t_grid.size());
  for (std::size_t g = 0; g < cfg.t_grid.size(); ++g)
    horizons[g] = cfg.schedule.time(cfg.t_grid[g], cfg.n);
  if (!std::is_sorted(horizons.begin(), horizons.end()))
    throw std::invalid_argument("limit experiment: grid must be increasing");

  std::vector<GridSample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_paths));
  long censored = 0;
  for (int i = 0; i < cfg.n_paths; ++i) {
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
    GridSample g = simulate_book_grid(cfg.book, horizons, rng);
    if (g.censored) {
      ++censored;
      continue;
    }
    samples.push_back(std::move(g));
  }
  if (static_cast<long>(samples.size()) < 1000)
    throw InsufficientPathsError(
        "limit experiment: fewer than 1000 uncensored paths");

  double sum_dir = 0.0, sum_count = 0.0;
  for (const auto& g : samples) {
    sum_dir += g.price.back();
    sum_count += static_cast<double>(g.count.back());
  }
  const double mean_dir = sum_count > 0.0 ? sum_dir / sum_count : 0.0;
  const double root_n = std::sqrt(cfg.n);

  LimitResult res;
  res.profile.pooled_mean = mean_dir;
  res.profile.paths_used = static_cast<long>(samples.size());
  res.profile.censored = censored;
  res.centered.assign(cfg.t_grid.size(), {});
  res.mean_count.assign(cfg.t_grid.size(), 0.0);
  std::vector<double> log_t, log_var;
  for (std::size_t g = 0; g < cfg.t_grid.size(); ++g) {
    std::vector<double>& c = res.centered[g];
    c.resize(samples.size());
    double count_sum = 0.0;
    for (std::size_t p = 0; p < samples.size(); ++p) {
      double np = static_cast<double>(samples[p].count[g]);
      c[p] = (samples[p].price[g] - mean_dir * np) / root_n;
      count_sum += np;
    }
    MeanVar mv = mean_var(c);
    res.profile.points.push_back({cfg.t_grid[g], horizons[g], mv.var});
    res.mean_count[g] = count_sum / static_cast<double>(samples.size()) / cfg.n;
    if (cfg.t_grid[g] > 0.0 && mv.var > 0.0) {
      log_t.push_back(std::log(cfg.t_grid[g]));
      log_var.push_back(std::log(mv.var));
    }
  }
  if (log_t.size() >= 3) res.profile.loglog = ols(log_t, log_var);
  return res;
}

}  // namespace lob
