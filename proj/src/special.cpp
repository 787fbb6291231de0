#include "lob/special.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lob {

namespace {

// log of the large-order envelope: I_k(z) ~ exp(eta(k,z)) / sqrt(2 pi r),
// eta = r + k log(z / (k + r)), r = hypot(k, z).  Used to pick the Miller
// start order; crude but monotone in k.
double log_envelope(double k, double z) {
  const double r = std::hypot(k, z);
  return r + (k > 0 ? k * std::log(z / (k + r)) : 0.0);
}

double series_scaled(int n, double z) {
  // I_n(z) e^{-z} = sum_k (z/2)^{n+2k} / (k! (n+k)!) * e^{-z}
  double t = std::exp(n * std::log(0.5 * z) - std::lgamma(n + 1.0) - z);
  if (t == 0.0) return 0.0;
  double s = t;
  const double q = 0.25 * z * z;
  for (int k = 1; k <= 40000; ++k) {
    t *= q / (static_cast<double>(k) * (n + static_cast<double>(k)));
    s += t;
    if (t < s * 1e-17) return s;
  }
  throw std::runtime_error("scaled_bessel_i: series failed to converge");
}

double hankel_scaled(int n, double z) {
  // I_n(z) e^{-z} ~ 1/sqrt(2 pi z) * sum_j d_j / z^j,
  // d_0 = 1, d_j = d_{j-1} * ((2j-1)^2 - 4n^2) / (8j)
  const double mu = 4.0 * static_cast<double>(n) * n;
  double term = 1.0, sum = 1.0, prev = 1.0;
  for (int j = 1; j <= 60; ++j) {
    const double od = 2.0 * j - 1.0;
    term *= (od * od - mu) / (8.0 * j * z);
    if (std::abs(term) > std::abs(prev)) break;  // asymptotic turn-over
    sum += term;
    prev = term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

double miller_scaled(int n, double z) {
  // backward recurrence, normalized with Ihat_0 + 2 sum_{k>=1} Ihat_k = 1
  const double target = log_envelope(0.0, z) - 45.0 - 0.5 * std::log(z + 1.0);
  double m = std::max<double>(n, z);
  while (log_envelope(m, z) > target) m += std::max(8.0, 0.04 * m);
  int M = static_cast<int>(m) + 2;
  double kp1 = 0.0, k0 = 1e-250, norm = 2.0 * k0, result = 0.0;
  for (int k = M; k >= 1; --k) {
    const double km1 = kp1 + (2.0 * k / z) * k0;
    kp1 = k0;
    k0 = km1;
    if (k - 1 == n) result = k0;  // Ihat_n up to normalization
    norm += (k - 1 >= 1 ? 2.0 : 1.0) * k0;
    if (std::abs(k0) > 1e250) {  // rescale to avoid overflow
      kp1 *= 1e-250;
      k0 *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
  }
  return result / norm;
}

}  // namespace

double scaled_bessel_i(int n, double z) {
  if (n < 0 || z < 0 || !std::isfinite(z))
    throw std::invalid_argument("scaled_bessel_i: need n >= 0, z >= 0");
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  if (z <= 650.0 && n <= 600) return series_scaled(n, z);
  if (z >= 60.0 && z >= 1.2 * static_cast<double>(n) * n)
    return hankel_scaled(n, z);
  return miller_scaled(n, z);
}

double upper_gamma_neg_half(double z) {
  if (z <= 0.0) throw std::invalid_argument("upper_gamma_neg_half: z > 0 required");
  if (z > 745.0) return 0.0;  // below double underflow once e^{-z} is folded in
  if (z < 30.0) {
    const double rz = std::sqrt(z);
    return 2.0 * std::exp(-z) / rz - 2.0 * std::sqrt(M_PI) * std::erfc(rz);
  }
  // asymptotic: z^{-3/2} e^{-z} [1 - 3/(2z) + 15/(4z^2) - ...],
  // term_j = term_{j-1} * (-(2j+1)/2) / z
  double term = 1.0, sum = 1.0, prev = 1.0;
  for (int j = 1; j <= 40; ++j) {
    term *= -(2.0 * j + 1.0) / (2.0 * z);
    if (std::abs(term) > std::abs(prev)) break;
    sum += term;
    prev = term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(z, -1.5) * std::exp(-z) * sum;
}

void upper_gamma_neg_half_ladder(double z, int jmax, double* out) {
  // Gamma(a-1, z) = (Gamma(a, z) - z^{a-1} e^{-z}) / (a - 1), from a = -1/2 down
  out[0] = upper_gamma_neg_half(z);
  const double ez = (z > 745.0) ? 0.0 : std::exp(-z);
  double zpow = std::pow(z, -1.5);  // z^{a-1} at a = -1/2
  for (int j = 1; j <= jmax; ++j) {
    const double a = -0.5 - (j - 1);
    out[j] = (out[j - 1] - zpow * ez) / (a - 1.0);
    zpow /= z;
  }
}

double poisson_upper_tail(double nu, long m) {
  if (nu < 0) throw std::invalid_argument("poisson_upper_tail: nu >= 0");
  if (m <= 0) return 1.0;
  if (nu == 0.0) return 0.0;
  if (m <= nu) {
    // complement: sum pmf downward from k = m-1
    double logp = (m - 1) * std::log(nu) - nu - std::lgamma(m + 0.0);
    if (logp < -745.0) return 1.0;
    double p = std::exp(logp), s = p;
    for (long k = m - 1; k >= 1; --k) {
      p *= static_cast<double>(k) / nu;
      s += p;
      if (p < s * 1e-16) break;
    }
    return std::max(0.0, 1.0 - s);
  }
  // sum pmf from k = m upward until additions stop mattering
  double logp = m * std::log(nu) - nu - std::lgamma(m + 1.0);
  if (logp < -745.0) return 0.0;
  double p = std::exp(logp);
  double s = p;
  for (long k = m + 1; k <= m + 100000; ++k) {
    p *= nu / static_cast<double>(k);
    s += p;
    if (p < s * 1e-16) break;
  }
  return std::min(s, 1.0);
}

}  // namespace lob
