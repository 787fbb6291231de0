#pragma once

#include "lob/depth.hpp"
#include "lob/rates.hpp"

namespace lob {

/** Criticality descriptor: C = (sqrt(mu) - sqrt(lambda))^2, zero exactly at
 *  lambda = mu. */
struct TailRegime {
  bool critical = false;
  double C = 0.0;
  static TailRegime from_rates(double lambda, double mu);
};

// Closed-form tail families for the extinction / price-change times.
enum class TailVariant {
  kRefined,       // tail integral's incomplete-gamma factor kept un-expanded
  kLeadingOrder,  // bare envelope e^{-TC}/sqrt(T) with the same prefactor
  kQuoted,        // constants exactly as quoted by the source lemmas
};

enum class DensityVariant {
  kQuoted,           // closed form as printed (1/C^2 prefactor, subcritical)
  kProofConsistent,  // derivative of the leading-order tail product
};

/** P[sigma > T | depth x] for the constant-rate absorbed birth-death queue:
 *  (mu/lambda)^{x/2} * int_T^inf (x/s) I_x(2s*sqrt(lambda mu)) e^{-s(lambda+mu)} ds,
 *  evaluated with scaled Bessel terms plus an analytic incomplete-gamma tail.
 *  Absolute error <= abs_tol; result clamped to [0,1]. Requires lambda <= mu. */
double survival_const(double T, int x, double lambda, double mu,
                      double abs_tol = 1e-10);

/** P[sigma > T] under the clock: survival_const(A_T, x). Times before the
 *  clock origin have A = 0 (the book is idle there). */
double survival_timechanged(const CumulativeClock& clock, double T, int x,
                            double abs_tol = 1e-10);

/** P[tau > T | depths x, y]: product of the two independent sides. */
double tau_survival(const CumulativeClock& clock, double T, int x, int y,
                    double abs_tol = 1e-10);

/** P[tau > T] aggregated over the depth redraw law f. */
double tau_survival_mixture(const CumulativeClock& clock, double T,
                            const DepthDistribution& f,
                            double abs_tol = 1e-10);

/** Large-T tail of the single-queue extinction time under constant rates. */
double tail_sigma(double T, int x, double lambda, double mu,
                  TailVariant v = TailVariant::kRefined);

/** Large-T tail of tau under the clock (evaluated at A_T). */
double tail_tau(const CumulativeClock& clock, double T, int x, int y,
                TailVariant v = TailVariant::kRefined);

/** Exact density of the first price-change time: -d/dT of the aggregated
 *  survival, via the closed derivative of the Bessel integral. Needs A_T > 0. */
double tau_density(const CumulativeClock& clock, double T,
                   const DepthDistribution& f);

/** Closed-form large-T approximation of the tau density. Needs A_T > 0. */
double tau_density_asymptotic(const CumulativeClock& clock, double T,
                              const DepthDistribution& f,
                              DensityVariant v = DensityVariant::kQuoted);

enum class Moment { kFinite, kInfinite };

/** Finiteness of E[tau^n] from the modulation form and the regime:
 *  power-type decay with exponent != -1 -> finite iff subcritical or
 *  n < exponent + 1; reciprocal-type k/t -> finite iff subcritical and
 *  n < 2kC. Piecewise forms are not classifiable. */
Moment moment_finiteness(int n, const TailRegime& regime,
                         const RateSpec& spec);

/** E[tau] = int_0^inf tau_survival_mixture dT by doubling-segment quadrature;
 *  throws if the integral fails to converge (heavy-tailed regimes). */
double expected_tau(const CumulativeClock& clock, const DepthDistribution& f,
                    double rel_tol = 1e-9);

}  // namespace lob
