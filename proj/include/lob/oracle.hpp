#pragma once

#include "lob/rates.hpp"

namespace lob {

struct OracleResult {
  double value = 0.0;
  double trunc_bound = 0.0;  // birth-only Poisson bound on truncation error
};

/** Headroom rule keeping the truncation bound below 1e-8 at desk scale. */
int oracle_default_cap(int x, double lambda, double internal_time);

/** Survival of the absorbed birth-death queue on the truncated state space
 *  {0..cap} (0 absorbing, cap reflecting) at constant rates, via
 *  uniformization of the tridiagonal generator. Throws when the truncation
 *  bound exceeds 1e-8 (raise cap). */
OracleResult ctmc_survival_const(double t, int x, double lambda, double mu,
                                 int cap = 0);

/** Time-changed survival: the constant-rate solution evaluated at A_T
 *  (the modulated generator family commutes). cap = 0 picks the default. */
OracleResult ctmc_survival(const CumulativeClock& clock, double T, int x,
                           int cap = 0);

/** Independent witness: integrates the forward equations with
 *  alpha_t-modulated rates directly (implicit trapezoid steps, Richardson
 *  extrapolation). Requires alpha bounded on [origin, T]. */
double ctmc_survival_ode(const CumulativeClock& clock, double T, int x,
                         int cap = 0, double tol = 1e-10);

/** Product of the two independent single-queue survivals. */
OracleResult ctmc_tau_survival(const CumulativeClock& clock, double T, int x,
                               int y, int cap = 0);

}  // namespace lob
