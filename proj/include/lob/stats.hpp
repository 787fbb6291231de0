#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace lob {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};

/** Ordinary least squares y = intercept + slope * x. Requires n >= 3 and
 *  non-degenerate x. */
OlsFit ols(const std::vector<double>& x, const std::vector<double>& y);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  long n = 0;
};
MeanVar mean_var(const std::vector<double>& v);

/** Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
 *  `samples` is sorted in place. */
double ks_statistic(std::vector<double>& samples,
                    const std::function<double(double)>& cdf);

// 1% critical value for sqrt(n)*D under the KS null, as n -> inf
inline double ks_critical_1pct(std::size_t n) {
  return 1.63 / std::sqrt(static_cast<double>(n));
}

/** Jarque-Bera normality statistic; ~chi^2(2) under the Gaussian null. */
double jarque_bera(const std::vector<double>& v);

inline constexpr double kJarqueBeraCrit1pct = 9.210;  // chi^2(2), 1% level

}  // namespace lob
