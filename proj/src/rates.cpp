#include "lob/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lob/quadrature.hpp"

namespace lob {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

bool is_integer(double x) { return std::floor(x) == x && std::abs(x) < 1e9; }

void validate_form(const RateForm& form) {
  if (const auto* c = std::get_if<ConstantForm>(&form)) {
    if (!(c->c > 0.0) || !std::isfinite(c->c)) fail("rate: constant c must be > 0");
  } else if (const auto* p = std::get_if<PowerForm>(&form)) {
    if (!(p->coeff > 0.0) || !std::isfinite(p->coeff)) fail("rate: power coeff must be > 0");
    if (!std::isfinite(p->exponent)) fail("rate: power exponent must be finite");
  } else if (const auto* pl = std::get_if<PowerLogForm>(&form)) {
    if (!(pl->coeff > 0.0) || !std::isfinite(pl->coeff)) fail("rate: powerlog coeff must be > 0");
    if (!std::isfinite(pl->exponent)) fail("rate: powerlog exponent must be finite");
    if (!(pl->log_power >= 0.0) || !std::isfinite(pl->log_power))
      fail("rate: powerlog log_power must be >= 0");
  } else if (const auto* r = std::get_if<ReciprocalForm>(&form)) {
    if (!(r->k > 0.0) || !std::isfinite(r->k)) fail("rate: recip k must be > 0");
    if (!(r->t0 > 0.0) || !std::isfinite(r->t0)) fail("rate: recip t0 must be > 0");
  } else if (const auto* pw = std::get_if<PiecewiseForm>(&form)) {
    if (pw->breakpoints.empty()) fail("rate: piecewise needs at least one segment");
    if (pw->breakpoints.size() != pw->values.size())
      fail("rate: piecewise breakpoints/values size mismatch");
    if (!(pw->breakpoints.front() >= 0.0)) fail("rate: piecewise must start at t >= 0");
    for (std::size_t i = 0; i + 1 < pw->breakpoints.size(); ++i)
      if (!(pw->breakpoints[i] < pw->breakpoints[i + 1]))
        fail("rate: piecewise breakpoints must be strictly increasing");
    for (double v : pw->values)
      if (!(v >= 0.0) || !std::isfinite(v)) fail("rate: piecewise values must be >= 0");
  }
}

}  // namespace

double default_origin(const RateForm& form) {
  if (const auto* p = std::get_if<PowerForm>(&form))
    return p->exponent <= -1.0 ? 1.0 : 0.0;
  if (std::holds_alternative<PowerLogForm>(form)) return 1.0;
  if (const auto* r = std::get_if<ReciprocalForm>(&form)) return r->t0;
  if (const auto* pw = std::get_if<PiecewiseForm>(&form))
    return pw->breakpoints.front();
  return 0.0;
}

double eval_alpha(const RateSpec& spec, double t) {
  return std::visit(
      [t](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForm>) {
          if (t < 0.0) fail("alpha: t must be >= 0");
          return f.c;
        } else if constexpr (std::is_same_v<F, PowerForm>) {
          if (t < 0.0) fail("alpha: t must be >= 0");
          if (t == 0.0) return f.exponent < 0.0 ? kInf : (f.exponent == 0.0 ? f.coeff : 0.0);
          return f.coeff * std::pow(t, f.exponent);
        } else if constexpr (std::is_same_v<F, PowerLogForm>) {
          if (t < 1.0) fail("alpha: powerlog defined on t >= 1");
          double lg = std::log(t);
          double logs = f.log_power == 0.0 ? 1.0 : std::pow(lg, f.log_power);
          return f.coeff * std::pow(t, f.exponent) * logs;
        } else if constexpr (std::is_same_v<F, ReciprocalForm>) {
          if (t < f.t0) fail("alpha: recip defined on t >= t0");
          return f.k / t;
        } else {
          if (t < f.breakpoints.front()) fail("alpha: t before first breakpoint");
          auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), t);
          return f.values[static_cast<std::size_t>(it - f.breakpoints.begin()) - 1];
        }
      },
      spec.form);
}

CumulativeClock::CumulativeClock(RateSpec spec, std::optional<double> origin)
    : spec_(std::move(spec)) {
  if (!(spec_.lambda > 0.0) || !std::isfinite(spec_.lambda)) fail("rate: lambda must be > 0");
  if (!(spec_.mu > 0.0) || !std::isfinite(spec_.mu)) fail("rate: mu must be > 0");
  validate_form(spec_.form);
  origin_ = origin.value_or(default_origin(spec_.form));
  if (const auto* p = std::get_if<PowerForm>(&spec_.form)) {
    if (p->exponent <= -1.0 && !(origin_ > 0.0))
      fail("clock: power with exponent <= -1 needs origin > 0");
    if (origin_ < 0.0) fail("clock: origin must be >= 0");
  } else if (std::holds_alternative<PowerLogForm>(spec_.form)) {
    if (!(origin_ >= 1.0)) fail("clock: powerlog needs origin >= 1");
  } else if (const auto* r = std::get_if<ReciprocalForm>(&spec_.form)) {
    if (origin_ != r->t0) fail("clock: recip origin must equal t0");
  } else if (const auto* pw = std::get_if<PiecewiseForm>(&spec_.form)) {
    if (origin_ != pw->breakpoints.front())
      fail("clock: piecewise origin must equal first breakpoint");
    cum_.assign(pw->breakpoints.size(), 0.0);
    for (std::size_t i = 0; i + 1 < pw->breakpoints.size(); ++i)
      cum_[i + 1] = cum_[i] + pw->values[i] * (pw->breakpoints[i + 1] - pw->breakpoints[i]);
  } else {
    if (origin_ < 0.0) fail("clock: origin must be >= 0");
  }
}

double CumulativeClock::cumulative(double t) const {
  if (t < origin_) fail("cumulative: t must be >= origin");
  const double o = origin_;
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForm>) {
          return f.c * (t - o);
        } else if constexpr (std::is_same_v<F, PowerForm>) {
          double s1 = f.exponent + 1.0;
          if (s1 == 0.0) return f.coeff * std::log(t / o);
          double hi = std::pow(t, s1);
          double lo = o == 0.0 ? 0.0 : std::pow(o, s1);
          return f.coeff * (hi - lo) / s1;
        } else if constexpr (std::is_same_v<F, PowerLogForm>) {
          if (t == o) return 0.0;
          double s1 = f.exponent + 1.0;
          double m = f.log_power;
          if (s1 == 0.0) {
            // int t^-1 ln^m t dt = ln^(m+1) t / (m+1)
            double p = m + 1.0;
            return f.coeff * (std::pow(std::log(t), p) - std::pow(std::log(o), p)) / p;
          }
          if (is_integer(m)) {
            // I_j = [t^s1 ln^j t / s1] - (j/s1) I_{j-1}
            auto term = [&](double u, double j) {
              double lg = std::log(u);
              return std::pow(u, s1) * (j == 0.0 ? 1.0 : std::pow(lg, j)) / s1;
            };
            double acc = term(t, 0.0) - term(o, 0.0);
            for (double j = 1.0; j <= m; j += 1.0)
              acc = term(t, j) - term(o, j) - (j / s1) * acc;
            return f.coeff * acc;
          }
          auto res = integrate_adaptive(
              [&](double u) {
                return std::pow(u, f.exponent) * std::pow(std::log(u), m);
              },
              o, t, 1e-12, 1e-12);
          return f.coeff * res.value;
        } else if constexpr (std::is_same_v<F, ReciprocalForm>) {
          return f.k * std::log(t / f.t0);
        } else {
          auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), t);
          std::size_t i = static_cast<std::size_t>(it - f.breakpoints.begin()) - 1;
          return cum_[i] + f.values[i] * (t - f.breakpoints[i]);
        }
      },
      spec_.form);
}

double CumulativeClock::total_mass() const {
  if (const auto* p = std::get_if<PowerForm>(&spec_.form)) {
    double s1 = p->exponent + 1.0;
    if (s1 < 0.0) return -p->coeff * std::pow(origin_, s1) / s1;
  } else if (const auto* pl = std::get_if<PowerLogForm>(&spec_.form)) {
    double s1 = pl->exponent + 1.0;
    if (s1 < 0.0) {
      double m = pl->log_power;
      if (is_integer(m)) {
        auto term = [&](double j) {
          double lg = std::log(origin_);
          return std::pow(origin_, s1) * (j == 0.0 ? 1.0 : std::pow(lg, j)) / s1;
        };
        double acc = -term(0.0);
        for (double j = 1.0; j <= m; j += 1.0) acc = -term(j) - (j / s1) * acc;
        return pl->coeff * acc;
      }
      // u = ln t: int e^{s1 u} u^m du, truncated where e^{s1 u} ~ 1e-26
      double u0 = std::log(origin_), u1 = u0 + 60.0 / -s1;
      auto res = integrate_adaptive(
          [&](double u) { return std::exp(s1 * u) * std::pow(u, m); }, u0, u1,
          1e-14, 1e-12);
      return pl->coeff * res.value;
    }
  } else if (const auto* pw = std::get_if<PiecewiseForm>(&spec_.form)) {
    if (pw->values.back() == 0.0) return cum_.back();
  }
  return kInf;
}

double CumulativeClock::inverse(double a) const {
  if (!(a >= 0.0)) fail("inverse: a must be >= 0");
  if (a == 0.0) return origin_;
  const double o = origin_;
  if (const auto* c = std::get_if<ConstantForm>(&spec_.form)) return o + a / c->c;
  if (const auto* p = std::get_if<PowerForm>(&spec_.form)) {
    double s1 = p->exponent + 1.0;
    if (s1 == 0.0) return o * std::exp(a / p->coeff);
    double base = (o == 0.0 ? 0.0 : std::pow(o, s1)) + a * s1 / p->coeff;
    if (base <= 0.0) return kInf;  // beyond total clock mass
    return std::pow(base, 1.0 / s1);
  }
  if (const auto* r = std::get_if<ReciprocalForm>(&spec_.form))
    return r->t0 * std::exp(a / r->k);
  if (const auto* pw = std::get_if<PiecewiseForm>(&spec_.form)) {
    // smallest t with A(t) >= a (flat stretches resolve leftward)
    auto it = std::lower_bound(cum_.begin(), cum_.end(), a);
    if (it != cum_.end() && *it == a)
      return pw->breakpoints[static_cast<std::size_t>(it - cum_.begin())];
    std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    if (pw->values[i] == 0.0) return kInf;  // past a trailing flat segment
    return pw->breakpoints[i] + (a - cum_[i]) / pw->values[i];
  }
  // powerlog: bracket by doubling, then guarded Newton; times past double
  // range (or past a finite total mass) saturate to +inf
  double lo = o, hi = std::max(2.0 * o, o + 1.0);
  while (cumulative(hi) < a) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e290) return kInf;
  }
  double t = 0.5 * (lo + hi);
  const double tol = 1e-10 * std::max(1.0, a);
  for (int iter = 0; iter < 100; ++iter) {
    double g = cumulative(t) - a;
    if (std::abs(g) <= tol) return t;
    if (g > 0.0) hi = t; else lo = t;
    double d = alpha(t);
    double step = t - g / d;
    t = (d > 0.0 && step > lo && step < hi) ? step : 0.5 * (lo + hi);
  }
  fail("inverse: did not converge");
  return 0.0;
}

RateForm parse_rate_form(const std::string& text) {
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        fail("rate grammar: bad number '" + tok + "'");
      }
      if (pos != tok.size()) fail("rate grammar: bad number '" + tok + "'");
      args.push_back(v);
    }
  }
  auto want = [&](std::size_t n) {
    if (args.size() != n)
      fail("rate grammar: '" + name + "' expects " + std::to_string(n) + " args");
  };
  RateForm form;
  if (name == "constant") {
    want(1);
    form = ConstantForm{args[0]};
  } else if (name == "power") {
    want(2);
    form = PowerForm{args[0], args[1]};
  } else if (name == "powerlog") {
    want(3);
    form = PowerLogForm{args[0], args[1], args[2]};
  } else if (name == "recip") {
    want(2);
    form = ReciprocalForm{args[0], args[1]};
  } else if (name == "piecewise") {
    if (args.size() < 2 || args.size() % 2 != 0)
      fail("rate grammar: piecewise expects b0,v0,b1,v1,...");
    PiecewiseForm pw;
    for (std::size_t i = 0; i < args.size(); i += 2) {
      pw.breakpoints.push_back(args[i]);
      pw.values.push_back(args[i + 1]);
    }
    form = pw;
  } else {
    fail("rate grammar: unknown form '" + name + "'");
  }
  validate_form(form);
  return form;
}

std::string describe_rate_form(const RateForm& form) {
  std::ostringstream os;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForm>) {
          os << "constant:" << f.c;
        } else if constexpr (std::is_same_v<F, PowerForm>) {
          os << "power:" << f.coeff << "," << f.exponent;
        } else if constexpr (std::is_same_v<F, PowerLogForm>) {
          os << "powerlog:" << f.coeff << "," << f.exponent << "," << f.log_power;
        } else if constexpr (std::is_same_v<F, ReciprocalForm>) {
          os << "recip:" << f.k << "," << f.t0;
        } else {
          os << "piecewise:";
          for (std::size_t i = 0; i < f.breakpoints.size(); ++i) {
            if (i) os << ",";
            os << f.breakpoints[i] << "," << f.values[i];
          }
        }
      },
      form);
  return os.str();
}

nlohmann::json rate_spec_to_json(const RateSpec& spec) {
  nlohmann::json j;
  j["lambda"] = spec.lambda;
  j["mu"] = spec.mu;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForm>) {
          j["form"] = "constant";
          j["params"] = {{"c", f.c}};
        } else if constexpr (std::is_same_v<F, PowerForm>) {
          j["form"] = "power";
          j["params"] = {{"K", f.coeff}, {"s", f.exponent}};
        } else if constexpr (std::is_same_v<F, PowerLogForm>) {
          j["form"] = "powerlog";
          j["params"] = {{"K", f.coeff}, {"s", f.exponent}, {"m", f.log_power}};
        } else if constexpr (std::is_same_v<F, ReciprocalForm>) {
          j["form"] = "recip";
          j["params"] = {{"k", f.k}, {"t0", f.t0}};
        } else {
          j["form"] = "piecewise";
          j["params"] = {{"breakpoints", f.breakpoints}, {"values", f.values}};
        }
      },
      spec.form);
  return j;
}

RateSpec rate_spec_from_json(const nlohmann::json& j) {
  RateSpec spec;
  spec.lambda = j.at("lambda").get<double>();
  spec.mu = j.at("mu").get<double>();
  std::string name = j.at("form").get<std::string>();
  const auto& p = j.at("params");
  if (name == "constant") {
    spec.form = ConstantForm{p.at("c").get<double>()};
  } else if (name == "power") {
    spec.form = PowerForm{p.at("K").get<double>(), p.at("s").get<double>()};
  } else if (name == "powerlog") {
    spec.form = PowerLogForm{p.at("K").get<double>(), p.at("s").get<double>(),
                             p.at("m").get<double>()};
  } else if (name == "recip") {
    spec.form = ReciprocalForm{p.at("k").get<double>(), p.at("t0").get<double>()};
  } else if (name == "piecewise") {
    PiecewiseForm pw;
    pw.breakpoints = p.at("breakpoints").get<std::vector<double>>();
    pw.values = p.at("values").get<std::vector<double>>();
    spec.form = pw;
  } else {
    fail("rate json: unknown form '" + name + "'");
  }
  validate_form(spec.form);
  return spec;
}

}  // namespace lob
