#include "lob/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lob {

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("ols: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("ols: need at least 3 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0) throw std::invalid_argument("ols: degenerate x");
  OlsFit f;
  f.n = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = (syy > 0) ? 1.0 - sse / syy : 1.0;
  f.slope_stderr = (n > 2) ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

MeanVar mean_var(const std::vector<double>& v) {
  MeanVar mv;
  mv.n = static_cast<long>(v.size());
  if (mv.n == 0) return mv;
  for (double t : v) mv.mean += t;
  mv.mean /= mv.n;
  if (mv.n < 2) return mv;
  double s = 0;
  for (double t : v) {
    const double d = t - mv.mean;
    s += d * d;
  }
  mv.var = s / (mv.n - 1);
  return mv;
}

double ks_statistic(std::vector<double>& samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max(d, std::abs(F - (i + 1) / n));
    d = std::max(d, std::abs(F - i / n));
  }
  return d;
}

double jarque_bera(const std::vector<double>& v) {
  if (v.size() < 8) throw std::invalid_argument("jarque_bera: sample too small");
  const MeanVar mv = mean_var(v);
  if (mv.var <= 0) throw std::invalid_argument("jarque_bera: zero variance");
  double m3 = 0, m4 = 0;
  for (double t : v) {
    const double d = t - mv.mean;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(v.size());
  m3 /= n;
  m4 /= n;
  const double sig2 = mv.var * (n - 1) / n;  // MLE variance
  const double skew = m3 / std::pow(sig2, 1.5);
  const double kurt = m4 / (sig2 * sig2);
  return n * (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
}

}  // namespace lob
