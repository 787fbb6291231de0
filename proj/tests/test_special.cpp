#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lob/quadrature.hpp"
#include "lob/special.hpp"
#include "lob/stats.hpp"

using namespace lob;

namespace {

// relative comparison that stays meaningful for very small magnitudes
void check_rel(double got, double want, double tol) {
  CAPTURE(got);
  CAPTURE(want);
  CHECK(std::abs(got - want) <= tol * std::abs(want));
}

}  // namespace

TEST_CASE("scaled Bessel matches high-precision references") {
  struct Ref {
    int n;
    double z;
    double value;
  };
  // independently computed with 40-digit arithmetic
  const Ref refs[] = {
      {0, 0.1, 0.9071009257823011},
      {1, 1.0, 0.20791041534970845},
      {2, 10.0, 0.1035808008865375},
      {5, 80.0, 0.038175293493241961},
      {0, 650.0, 0.015650815436407734},
      {3, 650.0, 0.015542755118427208},
      {10, 1e4, 0.0039695741057832239},
      {40, 1e4, 0.0036827330997748734},
      {100, 5e4, 0.0016143447340506015},
      {7, 1e7, 0.00012615631859459128},
  };
  for (const auto& r : refs) {
    CAPTURE(r.n);
    CAPTURE(r.z);
    check_rel(scaled_bessel_i(r.n, r.z), r.value, 1e-11);
  }
}

TEST_CASE("scaled Bessel agrees with the standard library at moderate z") {
  for (int n : {0, 1, 2, 5}) {
    for (double z : {0.1, 1.0, 5.0, 20.0}) {
      CAPTURE(n);
      CAPTURE(z);
      double ref = std::cyl_bessel_i(static_cast<double>(n), z) * std::exp(-z);
      check_rel(scaled_bessel_i(n, z), ref, 1e-10);
    }
  }
}

TEST_CASE("scaled Bessel edge cases and domain") {
  CHECK(scaled_bessel_i(0, 0.0) == 1.0);
  CHECK(scaled_bessel_i(3, 0.0) == 0.0);
  CHECK_THROWS_AS(scaled_bessel_i(-1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(scaled_bessel_i(0, -0.5), std::invalid_argument);
}

TEST_CASE("scaled Bessel satisfies the three-term recurrence") {
  // pairs span the series, asymptotic and backward-recurrence branches
  const std::pair<int, double> pts[] = {{1, 0.5},    {3, 10.0},   {5, 100.0},
                                        {2, 1000.0}, {4, 1e5},    {30, 700.0},
                                        {50, 2000.0}};
  for (auto [n, z] : pts) {
    CAPTURE(n);
    CAPTURE(z);
    double lhs = scaled_bessel_i(n - 1, z) - scaled_bessel_i(n + 1, z);
    double rhs = (2.0 * n / z) * scaled_bessel_i(n, z);
    double scale = std::max({std::abs(scaled_bessel_i(n - 1, z)),
                             std::abs(rhs), 1e-300});
    CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
  }
}

namespace {

double gamma_tail_quadrature(double z, int j) {
  // exp(-t) screens everything past z + 45 at double precision
  auto f = [j](double t) { return std::pow(t, -1.5 - j) * std::exp(-t); };
  return integrate_adaptive(f, z, z + 45.0, 0.0, 1e-12).value;
}

}  // namespace

TEST_CASE("incomplete gamma at -1/2 matches quadrature") {
  for (double z : {0.3, 1.0, 5.0, 20.0, 35.0, 100.0}) {
    CAPTURE(z);
    check_rel(upper_gamma_neg_half(z), gamma_tail_quadrature(z, 0), 1e-9);
  }
  CHECK(upper_gamma_neg_half(800.0) == 0.0);
  CHECK_THROWS_AS(upper_gamma_neg_half(0.0), std::invalid_argument);
  CHECK_THROWS_AS(upper_gamma_neg_half(-1.0), std::invalid_argument);
}

TEST_CASE("incomplete gamma ladder matches quadrature order by order") {
  for (double z : {0.5, 5.0, 40.0}) {
    double out[4];
    upper_gamma_neg_half_ladder(z, 3, out);
    CHECK(out[0] == upper_gamma_neg_half(z));
    for (int j = 0; j <= 3; ++j) {
      CAPTURE(z);
      CAPTURE(j);
      check_rel(out[j], gamma_tail_quadrature(z, j), 1e-9);
    }
  }
}

TEST_CASE("Poisson upper tail") {
  CHECK(poisson_upper_tail(3.0, 0) == 1.0);
  CHECK(poisson_upper_tail(3.0, -2) == 1.0);
  CHECK(poisson_upper_tail(0.0, 1) == 0.0);
  for (double nu : {0.3, 2.0, 50.0}) {
    CAPTURE(nu);
    check_rel(poisson_upper_tail(nu, 1), 1.0 - std::exp(-nu), 1e-13);
  }
  // P[Poisson(5) >= 3] = 1 - e^-5 (1 + 5 + 12.5)
  check_rel(poisson_upper_tail(5.0, 3), 1.0 - 18.5 * std::exp(-5.0), 1e-13);
  // complement against a direct lower sum across the branch switch
  double lower = 0.0, p = std::exp(-10.0);
  for (long k = 0; k <= 8; ++k) {
    lower += p;
    p *= 10.0 / static_cast<double>(k + 1);
  }
  check_rel(poisson_upper_tail(10.0, 9), 1.0 - lower, 1e-12);
  for (long m = 1; m <= 30; ++m)
    CHECK(poisson_upper_tail(7.0, m) >= poisson_upper_tail(7.0, m + 1));
  CHECK_THROWS_AS(poisson_upper_tail(-1.0, 2), std::invalid_argument);
}

TEST_CASE("adaptive quadrature basics") {
  auto poly = [](double x) { return x * x * x * x * x; };
  check_rel(integrate_adaptive(poly, 0.0, 1.0, 1e-12).value, 1.0 / 6.0, 1e-13);
  auto cubic = [](double x) { return x * x * x - 2.0 * x + 1.0; };
  check_rel(integrate_adaptive(cubic, 0.0, 3.0, 1e-12).value,
            81.0 / 4.0 - 9.0 + 3.0, 1e-13);
  auto decay = [](double x) { return std::exp(-x); };
  check_rel(integrate_adaptive(decay, 0.0, 10.0, 1e-13).value,
            1.0 - std::exp(-10.0), 1e-12);
  CHECK(integrate_adaptive(decay, 2.0, 2.0, 1e-13).value == 0.0);
  // endpoint singularity handled by panel refinement
  auto sing = [](double x) { return 1.0 / std::sqrt(x); };
  check_rel(integrate_adaptive(sing, 0.0, 4.0, 1e-9).value, 4.0, 1e-7);
  auto wiggle = [](double x) { return std::sin(200.0 * x); };
  CHECK_THROWS_AS(integrate_adaptive(wiggle, 0.0, 10.0, 1e-300, 0.0, 3),
                  std::runtime_error);
}

TEST_CASE("least squares helper") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 + 3.0 * v);
  OlsFit f = ols(x, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0));
  CHECK(f.n == 4);
  CHECK_THROWS_AS(ols({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(ols({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ols({1.0, 2.0, 3.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("mean/variance helper") {
  MeanVar mv = mean_var({1.0, 2.0, 3.0, 4.0});
  CHECK(mv.mean == doctest::Approx(2.5));
  CHECK(mv.var == doctest::Approx(5.0 / 3.0));
  CHECK(mv.n == 4);
  CHECK(mean_var({}).n == 0);
  CHECK(mean_var({7.0}).var == 0.0);
}

TEST_CASE("KS statistic against the uniform law") {
  std::vector<double> s{0.75, 0.25, 0.5};
  double d = ks_statistic(s, [](double v) { return v; });
  CHECK(d == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(std::is_sorted(s.begin(), s.end()));
  std::vector<double> empty;
  CHECK_THROWS_AS(ks_statistic(empty, [](double v) { return v; }),
                  std::invalid_argument);
}

TEST_CASE("Jarque-Bera statistic") {
  std::vector<double> sym{-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0};
  double kurt = 88.5 / (7.5 * 7.5);
  double expect = 8.0 * (kurt - 3.0) * (kurt - 3.0) / 24.0;
  CHECK(jarque_bera(sym) == doctest::Approx(expect).epsilon(1e-12));
  std::vector<double> small{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(jarque_bera(small), std::invalid_argument);
}
