#include "lob/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "lob/quadrature.hpp"
#include "lob/special.hpp"

namespace lob {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr int kTailTerms = 8;

void check_rates(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("survival: rates must be > 0");
  if (lambda > mu)
    throw std::invalid_argument("survival: requires lambda <= mu");
}

// Asymptotic-series coefficients of the scaled Bessel factor:
// Ihat_x(a s) ~ (2 pi a s)^{-1/2} * sum_j e_j s^{-j}
void hankel_coeffs(int x, double a, double* e) {
  e[0] = 1.0;
  const double mu4 = 4.0 * static_cast<double>(x) * x;
  for (int j = 1; j <= kTailTerms; ++j) {
    double odd = 2.0 * j - 1.0;
    e[j] = e[j - 1] * (odd * odd - mu4) / (8.0 * j * a);
  }
}

// int_{s1}^inf s^{-3/2-j} e^{-Cs} ds for j = 0..kTailTerms
void tail_integrals(double s1, double C, double* out) {
  const double w = s1 * C;
  if (w > 0.0) {
    double gam[kTailTerms + 1];
    upper_gamma_neg_half_ladder(w, kTailTerms, gam);
    double cpow = std::sqrt(C);
    for (int j = 0; j <= kTailTerms; ++j) {
      out[j] = cpow * gam[j];
      cpow *= C;
    }
  } else {
    double spow = 1.0 / std::sqrt(s1);
    for (int j = 0; j <= kTailTerms; ++j) {
      out[j] = spow / (0.5 + j);
      spow /= s1;
    }
  }
}

}  // namespace

TailRegime TailRegime::from_rates(double lambda, double mu) {
  check_rates(lambda, mu);
  double d = std::sqrt(mu) - std::sqrt(lambda);
  return {d == 0.0, d * d};
}

double survival_const(double T, int x, double lambda, double mu,
                      double abs_tol) {
  if (x < 1) throw std::invalid_argument("survival: x must be >= 1");
  check_rates(lambda, mu);
  if (!(T >= 0.0)) throw std::invalid_argument("survival: T must be >= 0");
  if (std::isinf(T)) return 0.0;
  if (T == 0.0) return 1.0;

  const double a = 2.0 * std::sqrt(lambda * mu);
  const double d = std::sqrt(mu) - std::sqrt(lambda);
  const double C = d * d;
  const double pf = std::exp(0.5 * x * std::log(mu / lambda));
  const double zh = std::max(60.0, 1.2 * x * static_cast<double>(x) + 30.0);
  const double s1 = std::max(T, zh / a);

  double total = 0.0;
  if (s1 > T) {
    auto g = [&](double s) {
      return (x / s) * scaled_bessel_i(x, a * s) * std::exp(-s * C);
    };
    auto res = integrate_adaptive(g, T, s1, 0.5 * abs_tol / pf, 1e-12);
    total += res.value;
  }
  double e[kTailTerms + 1], ints[kTailTerms + 1];
  hankel_coeffs(x, a, e);
  tail_integrals(s1, C, ints);
  double tail = 0.0;
  for (int j = 0; j <= kTailTerms; ++j) tail += e[j] * ints[j];
  total += x / std::sqrt(2.0 * kPi * a) * tail;

  return std::clamp(pf * total, 0.0, 1.0);
}

double survival_timechanged(const CumulativeClock& clock, double T, int x,
                            double abs_tol) {
  double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  return survival_const(A, x, clock.lambda(), clock.mu(), abs_tol);
}

double tau_survival(const CumulativeClock& clock, double T, int x, int y,
                    double abs_tol) {
  return survival_timechanged(clock, T, x, 0.5 * abs_tol) *
         survival_timechanged(clock, T, y, 0.5 * abs_tol);
}

double tau_survival_mixture(const CumulativeClock& clock, double T,
                            const DepthDistribution& f, double abs_tol) {
  double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  std::map<int, double> u;
  for (const auto& atom : f.atoms()) {
    for (int d : {atom.bid, atom.ask})
      if (!u.count(d))
        u[d] = survival_const(A, d, clock.lambda(), clock.mu(), 0.5 * abs_tol);
  }
  double acc = 0.0;
  for (const auto& atom : f.atoms()) acc += atom.p * u[atom.bid] * u[atom.ask];
  return acc;
}

double tail_sigma(double T, int x, double lambda, double mu, TailVariant v) {
  if (x < 1) throw std::invalid_argument("tail_sigma: x must be >= 1");
  check_rates(lambda, mu);
  if (!(T > 0.0)) throw std::invalid_argument("tail_sigma: T must be > 0");
  const double d = std::sqrt(mu) - std::sqrt(lambda);
  const double C = d * d;
  const double root = std::sqrt(lambda * mu);
  if (C == 0.0) {
    if (v == TailVariant::kQuoted) return x / (lambda * std::sqrt(kPi * T));
    return x / std::sqrt(kPi * lambda * T);
  }
  const double pf = std::exp(0.5 * x * std::log(mu / lambda));
  switch (v) {
    case TailVariant::kRefined:
      return pf * x * std::sqrt(C) / (2.0 * std::sqrt(kPi * root)) *
             upper_gamma_neg_half(T * C);
    case TailVariant::kLeadingOrder:
      return pf * x / std::sqrt(kPi * root) * std::exp(-T * C) / std::sqrt(T);
    case TailVariant::kQuoted:
    default:
      return pf * x / (C * std::sqrt(kPi * root)) * std::exp(-T) /
             std::sqrt(T);
  }
}

double tail_tau(const CumulativeClock& clock, double T, int x, int y,
                TailVariant v) {
  if (x < 1 || y < 1) throw std::invalid_argument("tail_tau: depths must be >= 1");
  const double lambda = clock.lambda(), mu = clock.mu();
  check_rates(lambda, mu);
  const double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  if (!(A > 0.0)) throw std::invalid_argument("tail_tau: A_T must be > 0");
  const double d = std::sqrt(mu) - std::sqrt(lambda);
  const double C = d * d;
  const double root = std::sqrt(lambda * mu);
  const double xy = static_cast<double>(x) * y;
  if (C == 0.0) {
    if (v == TailVariant::kQuoted) return xy / (lambda * lambda * kPi * A);
    return xy / (kPi * lambda * A);
  }
  const double pf = std::exp(0.5 * (x + y) * std::log(mu / lambda));
  switch (v) {
    case TailVariant::kRefined: {
      double g = upper_gamma_neg_half(A * C);
      return pf * xy * C / (4.0 * kPi * root) * g * g;
    }
    case TailVariant::kLeadingOrder:
      return pf * xy / (kPi * root) * std::exp(-2.0 * A * C) / A;
    case TailVariant::kQuoted:
    default:
      return pf * xy / (kPi * C * C * root) * std::exp(-2.0 * A * C) / A;
  }
}

double tau_density(const CumulativeClock& clock, double T,
                   const DepthDistribution& f) {
  const double lambda = clock.lambda(), mu = clock.mu();
  check_rates(lambda, mu);
  const double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  if (!(A > 0.0)) throw std::invalid_argument("tau_density: A_T must be > 0");
  const double alpha = clock.alpha(T);
  const double a = 2.0 * std::sqrt(lambda * mu);
  const double d = std::sqrt(mu) - std::sqrt(lambda);
  const double C = d * d;
  // -d/dA of the survival integral is its integrand at A
  std::map<int, double> u, g;
  for (const auto& atom : f.atoms()) {
    for (int dep : {atom.bid, atom.ask}) {
      if (u.count(dep)) continue;
      u[dep] = survival_const(A, dep, lambda, mu);
      double pf = std::exp(0.5 * dep * std::log(mu / lambda));
      g[dep] = pf * (dep / A) * scaled_bessel_i(dep, a * A) * std::exp(-A * C);
    }
  }
  double acc = 0.0;
  for (const auto& atom : f.atoms())
    acc += atom.p * (g[atom.ask] * u[atom.bid] + g[atom.bid] * u[atom.ask]);
  return alpha * acc;
}

double tau_density_asymptotic(const CumulativeClock& clock, double T,
                              const DepthDistribution& f, DensityVariant v) {
  const double lambda = clock.lambda(), mu = clock.mu();
  check_rates(lambda, mu);
  const double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  if (!(A > 0.0))
    throw std::invalid_argument("tau_density_asymptotic: A_T must be > 0");
  const double alpha = clock.alpha(T);
  const double d = std::sqrt(mu) - std::sqrt(lambda);
  const double C = d * d;
  const double root = std::sqrt(lambda * mu);
  double moment = 0.0;  // sum xy f(x,y) with the (mu/lambda) weights folded in
  for (const auto& atom : f.atoms()) {
    double xy = static_cast<double>(atom.bid) * atom.ask;
    if (C == 0.0) {
      moment += atom.p * xy;
    } else {
      moment += atom.p * xy *
                std::exp(0.5 * (atom.bid + atom.ask) * std::log(mu / lambda));
    }
  }
  if (C == 0.0) {
    double denom = v == DensityVariant::kQuoted ? lambda * lambda : lambda;
    return moment / (denom * kPi) * alpha / (A * A);
  }
  double base = moment / (kPi * root) * (2.0 * C * A + 1.0) * alpha *
                std::exp(-2.0 * A * C) / (A * A);
  if (v == DensityVariant::kQuoted) base /= C * C;
  return base;
}

Moment moment_finiteness(int n, const TailRegime& regime,
                         const RateSpec& spec) {
  if (n < 1) throw std::invalid_argument("moment_finiteness: n must be >= 1");
  if (std::holds_alternative<PiecewiseForm>(spec.form))
    throw std::invalid_argument(
        "moment_finiteness: piecewise form has no asymptotic classification");

  // reduce to (power exponent s, log power m) or reciprocal k
  double s = 0.0, m = 0.0, k = 0.0;
  bool reciprocal = false;
  if (const auto* p = std::get_if<PowerForm>(&spec.form)) {
    s = p->exponent;
    if (s == -1.0) {
      reciprocal = true;
      k = p->coeff;
    }
  } else if (const auto* pl = std::get_if<PowerLogForm>(&spec.form)) {
    s = pl->exponent;
    m = pl->log_power;
    if (s == -1.0 && m == 0.0) {
      reciprocal = true;
      k = pl->coeff;
    }
  } else if (const auto* r = std::get_if<ReciprocalForm>(&spec.form)) {
    reciprocal = true;
    k = r->k;
  }
  // ConstantForm falls through as s = 0, m = 0

  if (reciprocal) {
    if (regime.critical) return Moment::kInfinite;
    return n < 2.0 * k * regime.C ? Moment::kFinite : Moment::kInfinite;
  }
  if (!regime.critical) return Moment::kFinite;
  if (s == -1.0) {
    // log-corrected reciprocal decay: A_t grows poly-logarithmically
    return Moment::kInfinite;
  }
  (void)m;  // log factors do not move the n < s+1 threshold
  return n < s + 1.0 ? Moment::kFinite : Moment::kInfinite;
}

double expected_tau(const CumulativeClock& clock, const DepthDistribution& f,
                    double rel_tol) {
  const double origin = clock.origin();  // survival is 1 on [0, origin)
  double lo = origin;
  double hi = std::max(2.0 * lo, lo + 1.0);
  double total = origin;
  int quiet = 0;
  for (int seg = 0; seg < 200; ++seg) {
    auto res = integrate_adaptive(
        [&](double t) { return tau_survival_mixture(clock, t, f); }, lo, hi,
        1e-14, 1e-10);
    total += res.value;
    if (res.value < rel_tol * total) {
      if (++quiet >= 2) return total;
    } else {
      quiet = 0;
    }
    lo = hi;
    hi *= 2.0;
  }
  throw std::runtime_error("expected_tau: integral did not converge (heavy tail)");
}

}  // namespace lob
