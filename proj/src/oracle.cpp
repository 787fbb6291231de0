#include "lob/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lob/special.hpp"

namespace lob {
namespace {

void check_args(int x, int cap, double lambda, double mu) {
  if (x < 1) throw std::invalid_argument("oracle: x must be >= 1");
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("oracle: rates must be > 0");
  if (cap < x + 10) throw std::invalid_argument("oracle: cap must be >= x + 10");
}

double truncation_bound(double lambda, double t, int x, int cap) {
  return poisson_upper_tail(lambda * t, cap + 1 - x);
}

// One uniformized step v <- v P on live states 1..cap (index 0 unused).
void uniform_step(std::vector<double>& v, std::vector<double>& next,
                  double pl, double pm, int cap) {
  for (int i = 1; i <= cap; ++i) {
    double acc = 0.0;
    if (i > 1) acc += v[i - 1] * pl;          // birth into i
    if (i < cap) acc += v[i + 1] * pm;        // death into i
    if (i == cap) acc += v[cap] * pl;         // reflected birth
    next[i] = acc;                            // death from 1 is absorption
  }
  v.swap(next);
}

}  // namespace

int oracle_default_cap(int x, double lambda, double internal_time) {
  double guess = x + 20.0 * std::sqrt(lambda * std::max(internal_time, 0.0)) + 50.0;
  return std::max(10 * x, static_cast<int>(std::ceil(guess)));
}

OracleResult ctmc_survival_const(double t, int x, double lambda, double mu,
                                 int cap) {
  if (cap == 0) cap = oracle_default_cap(x, lambda, t);
  check_args(x, cap, lambda, mu);
  if (!(t >= 0.0)) throw std::invalid_argument("oracle: t must be >= 0");

  double bound = truncation_bound(lambda, t, x, cap);
  if (bound > 1e-8)
    throw std::runtime_error("oracle: truncation bound exceeds 1e-8, raise cap");
  if (t == 0.0) return {1.0, bound};

  const double big_lambda = lambda + mu;
  const double pl = lambda / big_lambda, pm = mu / big_lambda;
  const double nu = big_lambda * t;
  const double lnu = std::log(nu);

  std::vector<double> v(cap + 2, 0.0), next(cap + 2, 0.0);
  v[x] = 1.0;

  double survival = 0.0, wsum = 0.0, mass = 1.0;
  const long kmax = static_cast<long>(nu + 60.0 * std::sqrt(nu + 1.0) + 200.0);
  for (long k = 0; k <= kmax; ++k) {
    double logw = k * lnu - nu - std::lgamma(static_cast<double>(k) + 1.0);
    double w = logw < -745.0 ? 0.0 : std::exp(logw);
    survival += w * mass;
    wsum += w;
    if (wsum >= 1.0 - 1e-14) break;
    uniform_step(v, next, pl, pm, cap);
    mass = 0.0;
    for (int i = 1; i <= cap; ++i) mass += v[i];
  }
  // any unconsumed Poisson weight contributes at most (1 - wsum) * 1
  survival = std::clamp(survival, 0.0, 1.0);
  return {survival, bound + (1.0 - wsum)};
}

OracleResult ctmc_survival(const CumulativeClock& clock, double T, int x,
                           int cap) {
  double A = T <= clock.origin() ? 0.0 : clock.cumulative(T);
  return ctmc_survival_const(A, x, clock.lambda(), clock.mu(), cap);
}

double ctmc_survival_ode(const CumulativeClock& clock, double T, int x,
                         int cap, double tol) {
  const double lambda = clock.lambda(), mu = clock.mu();
  const double t0 = clock.origin();
  if (cap == 0)
    cap = oracle_default_cap(x, lambda, T <= t0 ? 0.0 : clock.cumulative(T));
  check_args(x, cap, lambda, mu);
  if (T <= t0) return 1.0;

  // Steps never straddle a discontinuity of alpha, so the implicit-midpoint
  // scheme below stays second order and Richardson extrapolation applies.
  std::vector<double> seg = {t0};
  if (const auto* p = std::get_if<PiecewiseForm>(&clock.spec().form))
    for (double b : p->breakpoints)
      if (b > t0 && b < T) seg.push_back(b);
  seg.push_back(T);
  std::vector<long> base(seg.size() - 1);
  for (std::size_t si = 0; si + 1 < seg.size(); ++si)
    base[si] = std::max<long>(
        1, std::lround(64.0 * (seg[si + 1] - seg[si]) / (T - t0)));

  // pi' = alpha_t * pi Q on live states; midpoint rule with Thomas solves
  auto run = [&](long mult) {
    std::vector<double> pi(cap + 1, 0.0), rhs(cap + 1, 0.0);
    std::vector<double> dl(cap + 1), dm(cap + 1), du(cap + 1);
    pi[x] = 1.0;
    for (std::size_t si = 0; si + 1 < seg.size(); ++si) {
      const long m_steps = base[si] * mult;
      const double h = (seg[si + 1] - seg[si]) / m_steps;
      for (long n = 0; n < m_steps; ++n) {
        const double am = clock.alpha(seg[si] + (n + 0.5) * h);
        // rhs = pi (I + h/2 am Q)
        double c = 0.5 * h * am;
        for (int i = 1; i <= cap; ++i) {
          double acc = pi[i] * (1.0 - c * (lambda + mu));
          if (i == cap) acc += pi[i] * c * lambda;  // reflecting top
          if (i > 1) acc += pi[i - 1] * c * lambda;
          if (i < cap) acc += pi[i + 1] * c * mu;
          rhs[i] = acc;
        }
        // solve pi (I - h/2 am Q) = rhs: Thomas on the transposed tridiagonal
        for (int i = 1; i <= cap; ++i) {
          dm[i] = 1.0 + c * (lambda + mu);
          if (i == cap) dm[i] -= c * lambda;
          dl[i] = -c * lambda;  // sub-diagonal: birth flow from i-1
          du[i] = -c * mu;      // super-diagonal: death flow from i+1
        }
        for (int i = 2; i <= cap; ++i) {
          double f = dl[i] / dm[i - 1];
          dm[i] -= f * du[i - 1];
          rhs[i] -= f * rhs[i - 1];
        }
        pi[cap] = rhs[cap] / dm[cap];
        for (int i = cap - 1; i >= 1; --i)
          pi[i] = (rhs[i] - du[i] * pi[i + 1]) / dm[i];
      }
    }
    double mass = 0.0;
    for (int i = 1; i <= cap; ++i) mass += pi[i];
    return mass;
  };

  long mult = 1;
  double coarse = run(mult);
  for (int iter = 0; iter < 14; ++iter) {
    mult *= 2;
    double fine = run(mult);
    double err = std::abs(fine - coarse) / 3.0;
    if (err < tol) return std::clamp((4.0 * fine - coarse) / 3.0, 0.0, 1.0);
    coarse = fine;
  }
  throw std::runtime_error("oracle: ODE witness did not reach tolerance");
}

OracleResult ctmc_tau_survival(const CumulativeClock& clock, double T, int x,
                               int y, int cap) {
  OracleResult rx = ctmc_survival(clock, T, x, cap);
  OracleResult ry = ctmc_survival(clock, T, y, cap);
  return {rx.value * ry.value, rx.trunc_bound + ry.trunc_bound};
}

}  // namespace lob
