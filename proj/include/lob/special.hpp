#pragma once

namespace lob {

/** I_n(z) * exp(-z) for integer n >= 0, z >= 0.
 *  Absolute/relative accuracy ~1e-12 over the supported range. */
double scaled_bessel_i(int n, double z);

/** Upper incomplete gamma Gamma(-1/2, z), z > 0. */
double upper_gamma_neg_half(double z);

/** Gamma(-1/2 - j, z) for j = 0..jmax, written into out[0..jmax]. */
void upper_gamma_neg_half_ladder(double z, int jmax, double* out);

/** P[Poisson(nu) >= m]. */
double poisson_upper_tail(double nu, long m);

}  // namespace lob
