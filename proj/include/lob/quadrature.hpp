#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace lob {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
  int panels = 0;
};

namespace detail {

// Gauss7/Kronrod15 nodes and weights (positive half; node 7 is the center).
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                                  0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(F&& f, double a, double b, double& kron, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double k = kWgk[7] * fv[7];
  for (int i = 0; i < 7; ++i) k += kWgk[i] * (fv[i] + fv[14 - i]);
  double g = kWg[3] * fv[7];
  for (int i = 0; i < 3; ++i) g += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  kron = k * h;
  err = std::abs((k - g) * h);
}

}  // namespace detail

/** Globally adaptive Gauss-Kronrod integration of f over [a, b].
 *  Splits the panel with the largest error estimate until the total estimated
 *  error drops below max(abs_tol, rel_tol*|I|). Throws on non-convergence. */
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                              double rel_tol = 0.0, int max_panels = 4000) {
  QuadResult out;
  if (a == b) return out;
  struct Panel {
    double a, b, val, err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  std::priority_queue<Panel> heap;
  double v, e;
  detail::gk15(f, a, b, v, e);
  heap.push({a, b, v, e});
  double total_v = v, total_e = e;
  int n = 1;
  while (total_e > std::max(abs_tol, rel_tol * std::abs(total_v))) {
    if (n >= max_panels) throw std::runtime_error("quadrature: panel budget exhausted");
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (m <= p.a || m >= p.b) {
      // panel at floating-point resolution; accept its estimate
      heap.push({p.a, p.b, p.val, 0.0});
      total_e -= p.err;
      continue;
    }
    double v1, e1, v2, e2;
    detail::gk15(f, p.a, m, v1, e1);
    detail::gk15(f, m, p.b, v2, e2);
    total_v += v1 + v2 - p.val;
    total_e += e1 + e2 - p.err;
    heap.push({p.a, m, v1, e1});
    heap.push({m, p.b, v2, e2});
    ++n;
  }
  out.value = total_v;
  out.error = total_e;
  out.panels = n;
  return out;
}

}  // namespace lob
