#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lob/analytic.hpp"

using namespace lob;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CumulativeClock unit_clock(double lambda, double mu) {
  return CumulativeClock(RateSpec{ConstantForm{1.0}, lambda, mu});
}

void check_rel(double got, double want, double tol) {
  CAPTURE(got);
  CAPTURE(want);
  CHECK(std::abs(got - want) <= tol * std::abs(want));
}

}  // namespace

TEST_CASE("constant-rate survival matches high-precision references") {
  struct Ref {
    double T;
    int x;
    double lambda, mu, value;
  };
  // independently computed with 40-digit arithmetic
  const Ref refs[] = {
      {0.5, 1, 0.5, 1.0, 0.64217295355349213},
      {1.0, 1, 0.5, 1.0, 0.45251016611885995},
      {5.0, 3, 0.9, 1.1, 0.54994526034272854},
      {10.0, 5, 0.99, 1.0, 0.7307231455380473},
      {2.0, 1, 0.8, 1.0, 0.34066286697116731},
      {1.0, 2, 1.0, 1.0, 0.83228593435627973},
      {100.0, 2, 1.0, 1.0, 0.11248576165394133},
      {0.5, 4, 0.25, 4.0, 0.86586938470883545},
      {30.0, 2, 0.81, 1.21, 0.019826886337562018},
      {3.0, 2, 1.0, 1.0, 0.58673396412714295},
  };
  for (const auto& r : refs) {
    CAPTURE(r.T);
    CAPTURE(r.x);
    CHECK(std::abs(survival_const(r.T, r.x, r.lambda, r.mu) - r.value) <=
          2e-9);
  }
}

TEST_CASE("survival boundary behavior and monotonicity") {
  for (int x : {1, 2, 5}) CHECK(survival_const(0.0, x, 0.9, 1.1) == 1.0);
  CHECK(survival_const(kInf, 2, 0.9, 1.1) == 0.0);
  double prev = 1.0;
  for (double T : {0.5, 1.0, 2.0, 5.0, 20.0, 80.0}) {
    double v = survival_const(T, 2, 0.9, 1.1);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK(survival_const(2.0, 1, 0.9, 1.1) < survival_const(2.0, 2, 0.9, 1.1));
  CHECK(survival_const(2.0, 2, 0.9, 1.1) < survival_const(2.0, 3, 0.9, 1.1));
}

TEST_CASE("survival argument guards") {
  CHECK_THROWS_AS(survival_const(1.0, 0, 0.9, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(survival_const(1.0, 1, 1.2, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(survival_const(-1.0, 1, 0.9, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(survival_const(1.0, 1, 0.0, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(survival_const(1.0, 1, 0.9, -1.0), std::invalid_argument);
}

TEST_CASE("time-changed survival equals the constant law at A_T") {
  CumulativeClock clock(RateSpec{PowerForm{1.0, -0.5}, 0.8, 1.0});
  CHECK(std::abs(survival_timechanged(clock, 1.0, 2) - 0.63938508097655147) <=
        2e-9);
  CHECK(std::abs(survival_timechanged(clock, 4.0, 2) - 0.44353827731543476) <=
        2e-9);
  CHECK(std::abs(survival_timechanged(clock, 9.0, 2) - 0.34057452452097284) <=
        2e-9);
  for (double T : {0.3, 2.0, 6.5}) {
    double direct = survival_const(clock.cumulative(T), 2, 0.8, 1.0);
    check_rel(survival_timechanged(clock, T, 2), direct, 1e-12);
  }

  CumulativeClock recip(RateSpec{ReciprocalForm{2.0, 1.0}, 0.8, 1.0});
  CHECK(std::abs(survival_timechanged(recip, std::exp(1.0), 1) -
                 0.34066286697116731) <= 2e-9);
  // the book is idle before the clock origin
  CHECK(survival_timechanged(recip, 0.5, 1) == 1.0);
}

TEST_CASE("inter-change survival is the product of the two sides") {
  CumulativeClock clock = unit_clock(0.81, 1.21);
  CHECK(std::abs(tau_survival(clock, 5.0, 2, 2) - 0.074647208481895381) <=
        2e-9);
  CHECK(std::abs(tau_survival(clock, 30.0, 2, 2) - 0.0003931054218426034) <=
        2e-9);
  double u2 = survival_timechanged(clock, 5.0, 2);
  check_rel(tau_survival(clock, 5.0, 2, 2), u2 * u2, 1e-8);
  // asymmetric depths
  double u1 = survival_timechanged(clock, 5.0, 1);
  check_rel(tau_survival(clock, 5.0, 2, 1), u2 * u1, 1e-8);
}

TEST_CASE("depth-aggregated survival") {
  CumulativeClock clock = unit_clock(0.9, 1.1);
  DepthDistribution f = DepthDistribution::uniform(2, 2);
  double u1 = survival_const(4.0, 1, 0.9, 1.1);
  double u2 = survival_const(4.0, 2, 0.9, 1.1);
  double avg = 0.5 * (u1 + u2);
  check_rel(tau_survival_mixture(clock, 4.0, f), avg * avg, 1e-8);
  DepthDistribution point = DepthDistribution::point_mass(2, 2);
  check_rel(tau_survival_mixture(clock, 4.0, point),
            tau_survival(clock, 4.0, 2, 2), 1e-8);
}

TEST_CASE("expected inter-change time") {
  CumulativeClock clock = unit_clock(0.9, 1.1);
  DepthDistribution f = DepthDistribution::uniform(2, 2);
  CHECK(std::abs(expected_tau(clock, f) - 1.80000308274) <= 1e-6);
  // balanced constant rates have no finite mean
  CumulativeClock crit = unit_clock(1.0, 1.0);
  CHECK_THROWS_AS(expected_tau(crit, DepthDistribution::point_mass(1, 1)),
                  std::runtime_error);
}

TEST_CASE("criticality descriptor") {
  TailRegime sub = TailRegime::from_rates(0.81, 1.21);
  CHECK_FALSE(sub.critical);
  CHECK(sub.C == doctest::Approx(0.04).epsilon(1e-12));
  TailRegime crit = TailRegime::from_rates(1.0, 1.0);
  CHECK(crit.critical);
  CHECK(crit.C == 0.0);
  CHECK_THROWS_AS(TailRegime::from_rates(1.21, 0.81), std::invalid_argument);
}

TEST_CASE("subcritical tail: refined constant tracks the true decay") {
  // w = T*C = 8: the envelope regime
  double surv = survival_const(200.0, 1, 0.81, 1.21);
  CHECK(surv > 1e-10);
  double refined = tail_sigma(200.0, 1, 0.81, 1.21, TailVariant::kRefined);
  CHECK(surv / refined > 0.98);
  CHECK(surv / refined < 1.02);
  // the as-printed constant has exp(-T) in place of exp(-T*C)
  double quoted = tail_sigma(200.0, 1, 0.81, 1.21, TailVariant::kQuoted);
  CHECK(surv / quoted > 1e10);
}

TEST_CASE("subcritical tail: leading-order envelope overshoots by ~2TC") {
  const double T = 400.0, C = 0.16;
  double refined = tail_sigma(T, 2, 0.64, 1.44, TailVariant::kRefined);
  double leading = tail_sigma(T, 2, 0.64, 1.44, TailVariant::kLeadingOrder);
  double ratio = leading / refined;
  CHECK(ratio > 0.9 * 2.0 * T * C);
  CHECK(ratio < 1.1 * (2.0 * T * C + 3.0));
  double surv = survival_const(T, 2, 0.64, 1.44);
  CHECK(surv / refined > 0.99);
  CHECK(surv / refined < 1.01);
}

TEST_CASE("critical tail and its rate scaling") {
  for (double T : {1e3, 1e4, 1e5}) {
    double ratio = survival_const(T, 2, 1.0, 1.0) /
                   tail_sigma(T, 2, 1.0, 1.0, TailVariant::kRefined);
    CHECK(ratio > 0.98);
    CHECK(ratio < 1.02);
  }
  check_rel(tail_sigma(1e4, 2, 1.0, 1.0, TailVariant::kRefined),
            2.0 / std::sqrt(M_PI * 1e4), 1e-12);
  // at lambda = mu = 1 the quoted constant coincides...
  CHECK(tail_sigma(1e4, 2, 1.0, 1.0, TailVariant::kQuoted) ==
        doctest::Approx(tail_sigma(1e4, 2, 1.0, 1.0, TailVariant::kRefined)));
  // ...but scales as 1/lambda instead of 1/sqrt(lambda) otherwise
  double refined = tail_sigma(2000.0, 1, 0.25, 0.25, TailVariant::kRefined);
  double quoted = tail_sigma(2000.0, 1, 0.25, 0.25, TailVariant::kQuoted);
  check_rel(quoted / refined, 2.0, 1e-12);
  double surv = survival_const(2000.0, 1, 0.25, 0.25);
  CHECK(surv / refined > 0.98);
  CHECK(surv / refined < 1.02);
  CHECK(surv / quoted < 0.55);
}

TEST_CASE("tau tail variants") {
  CumulativeClock crit = unit_clock(1.0, 1.0);
  double ratio = tau_survival(crit, 1e4, 1, 1) /
                 tail_tau(crit, 1e4, 1, 1, TailVariant::kRefined);
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);
  check_rel(tail_tau(crit, 1e4, 1, 1, TailVariant::kRefined),
            1.0 / (M_PI * 1e4), 1e-12);

  CumulativeClock sub = unit_clock(0.64, 1.44);
  const double T = 400.0;
  double refined = tail_tau(sub, T, 2, 1, TailVariant::kRefined);
  double tau = tau_survival(sub, T, 2, 1);
  CHECK(tau / refined > 0.97);
  CHECK(tau / refined < 1.03);
  // quoted tau constant is off by ~4 A^2
  double quoted = tail_tau(sub, T, 2, 1, TailVariant::kQuoted);
  CHECK(tau / quoted < 0.01);
  check_rel(quoted / refined, 4.0 * T * T, 0.15);

  CHECK_THROWS_AS(tail_tau(sub, 0.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(tail_tau(sub, 1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(tail_sigma(0.0, 1, 0.9, 1.1), std::invalid_argument);
}

TEST_CASE("exact inter-change density matches a finite difference") {
  DepthDistribution f = DepthDistribution::uniform(2, 2);
  CumulativeClock clock = unit_clock(0.9, 1.1);
  const double T = 30.0, h = 0.05;
  double fd = (tau_survival_mixture(clock, T - h, f) -
               tau_survival_mixture(clock, T + h, f)) /
              (2.0 * h);
  check_rel(tau_density(clock, T, f), fd, 1e-3);

  CumulativeClock tc(RateSpec{PowerForm{1.0, -0.5}, 0.9, 1.1});
  DepthDistribution point = DepthDistribution::point_mass(2, 1);
  const double T2 = 16.0;
  double fd2 = (tau_survival_mixture(tc, T2 - h, point) -
                tau_survival_mixture(tc, T2 + h, point)) /
               (2.0 * h);
  check_rel(tau_density(tc, T2, point), fd2, 1e-3);

  CHECK_THROWS_AS(tau_density(clock, 0.0, f), std::invalid_argument);
}

TEST_CASE("asymptotic density closes on the exact density at large T") {
  DepthDistribution f = DepthDistribution::uniform(2, 2);
  CumulativeClock crit = unit_clock(1.0, 1.0);
  const double T = 1e5;
  double exact = tau_density(crit, T, f);
  double asym = tau_density_asymptotic(crit, T, f, DensityVariant::kQuoted);
  check_rel(asym, exact, 2e-4);
  // at lambda = 1 both normalizations coincide
  CHECK(tau_density_asymptotic(crit, T, f, DensityVariant::kProofConsistent) ==
        doctest::Approx(asym));
  // away from lambda = 1 they differ by exactly 1/lambda
  CumulativeClock crit2 = unit_clock(0.49, 0.49);
  double q = tau_density_asymptotic(crit2, T, f, DensityVariant::kQuoted);
  double p =
      tau_density_asymptotic(crit2, T, f, DensityVariant::kProofConsistent);
  check_rel(q / p, 1.0 / 0.49, 1e-12);
  CHECK_THROWS_AS(tau_density_asymptotic(crit, 0.0, f), std::invalid_argument);
}

TEST_CASE("moment finiteness classification") {
  TailRegime crit = TailRegime::from_rates(1.0, 1.0);
  TailRegime sub = TailRegime::from_rates(0.81, 1.21);

  RateSpec grow{PowerForm{1.0, 2.0}, 1.0, 1.0};
  CHECK(moment_finiteness(1, crit, grow) == Moment::kFinite);
  CHECK(moment_finiteness(2, crit, grow) == Moment::kFinite);
  CHECK(moment_finiteness(3, crit, grow) == Moment::kInfinite);

  RateSpec slow{PowerForm{1.0, 0.5}, 1.0, 1.0};
  CHECK(moment_finiteness(1, crit, slow) == Moment::kFinite);
  CHECK(moment_finiteness(2, crit, slow) == Moment::kInfinite);

  RateSpec flat{ConstantForm{1.0}, 1.0, 1.0};
  CHECK(moment_finiteness(1, crit, flat) == Moment::kInfinite);
  CHECK(moment_finiteness(5, sub, flat) == Moment::kFinite);

  RateSpec laggy{PowerLogForm{1.0, -1.0, 2.0}, 1.0, 1.0};
  CHECK(moment_finiteness(1, crit, laggy) == Moment::kInfinite);
  CHECK(moment_finiteness(3, sub, laggy) == Moment::kFinite);

  RateSpec recip_small{ReciprocalForm{2.0, 1.0}, 0.81, 1.21};
  CHECK(moment_finiteness(1, crit, recip_small) == Moment::kInfinite);
  CHECK(moment_finiteness(1, sub, recip_small) == Moment::kInfinite);  // 2kC = 0.16
  RateSpec recip_big{ReciprocalForm{45.0, 1.0}, 0.81, 1.21};  // 2kC = 3.6
  CHECK(moment_finiteness(3, sub, recip_big) == Moment::kFinite);
  CHECK(moment_finiteness(4, sub, recip_big) == Moment::kInfinite);
  // power:k,-1 is the same family
  RateSpec recip_alias{PowerForm{45.0, -1.0}, 0.81, 1.21};
  CHECK(moment_finiteness(3, sub, recip_alias) == Moment::kFinite);
  CHECK(moment_finiteness(4, sub, recip_alias) == Moment::kInfinite);

  RateSpec pw{PiecewiseForm{{0.0}, {1.0}}, 1.0, 1.0};
  CHECK_THROWS_AS(moment_finiteness(1, sub, pw), std::invalid_argument);
  CHECK_THROWS_AS(moment_finiteness(0, sub, flat), std::invalid_argument);
}
