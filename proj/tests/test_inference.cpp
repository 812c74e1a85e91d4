#include <doctest.h>

#include <cmath>
#include <random>

#include "rskit/errors.hpp"
#include "rskit/inference.hpp"

using namespace rskit;

namespace {

RsSolution rs_with(double tau, double eps, double k_tau) {
  RsSolution rs;
  rs.tau = tau;
  rs.epsilon = eps;
  rs.k_tau = k_tau;
  rs.erm_min_loss = tau / (1.0 + eps);
  return rs;
}

}  // namespace

TEST_CASE("constant schedule worked example") {
  RemainderSchedule s;
  s.kind = BetaKind::constant;
  s.parameter = std::exp(-1.0);
  s.c1 = std::exp(1.0);
  s.c2 = 1.0;
  s.m = 2;
  const Remainder r = remainder(s, 4);
  CHECK(r.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(r.small_regime);
  CHECK(r.dimension_caveat);
  CHECK(!r.degenerate);
  // Substituting back gives the requested confidence level.
  CHECK(concentration_level(s, r.value, 4) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("large-radius regime uses the tail exponent") {
  RemainderSchedule s;
  s.parameter = 0.01;
  s.c1 = 10.0;
  s.c2 = 0.5;
  s.a = 3.0;
  s.m = 4;
  const Remainder r = remainder(s, 2);  // log(1000)/(0.5*2) > 1
  CHECK(!r.small_regime);
  CHECK(r.value == doctest::Approx(std::cbrt(std::log(1000.0))).epsilon(1e-14));
  CHECK(r.value > 1.0);
}

TEST_CASE("degenerate parameters are flagged") {
  RemainderSchedule s;
  s.c1 = 0.01;  // c1 below beta: log(c1/beta) < 0
  const Remainder r = remainder(s, 100);
  CHECK(r.degenerate);
  CHECK(r.value == 0.0);
  s = RemainderSchedule{};
  s.kind = BetaKind::polynomial;
  s.parameter = 1.0;
  CHECK(remainder(s, 1).degenerate);  // beta_1 = 1
  s.a = 1.0;
  CHECK_THROWS_AS(remainder(s, 10), ParameterError);
  CHECK_THROWS_AS(remainder(RemainderSchedule{}, 0), ParameterError);
}

TEST_CASE("inversion and monotonicity across random parameter draws") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> mdist(1, 12);
  std::uniform_int_distribution<long long> ndist(1, 100000);
  double worst_inversion = 0.0;
  int monotone_failures = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    RemainderSchedule s;
    s.kind = static_cast<BetaKind>(draw % 3);
    s.c1 = std::exp(1.0 + 3.0 * u01(gen));
    s.c2 = 0.05 + 5.0 * u01(gen);
    s.a = 1.1 + 4.0 * u01(gen);
    s.m = mdist(gen);
    switch (s.kind) {
      case BetaKind::constant: s.parameter = 0.001 + 0.5 * u01(gen); break;
      case BetaKind::exp_sqrt: s.parameter = 0.01 + 2.0 * u01(gen); break;
      case BetaKind::polynomial: s.parameter = 0.1 + 2.9 * u01(gen); break;
    }
    const long long n = ndist(gen);
    const Remainder r = remainder(s, n);
    if (!r.degenerate) {
      const double back = concentration_level(s, r.value, n);
      if (r.beta > 1e-300) worst_inversion = std::max(worst_inversion, std::abs(back - r.beta) / r.beta);
      const double log_gap = log_concentration_level(s, r.value, n) - s.log_beta(n);
      worst_inversion = std::max(worst_inversion, std::abs(std::expm1(log_gap)));
    }
    double prev = std::numeric_limits<double>::infinity();
    for (long long k = 2; k <= 4096; k *= 2) {
      const Remainder rk = remainder(s, k);
      if (rk.degenerate) continue;
      if (rk.value > prev * (1.0 + 1e-12)) ++monotone_failures;
      prev = rk.value;
    }
  }
  CHECK(worst_inversion <= 1e-10);
  CHECK(monotone_failures == 0);
}

TEST_CASE("log-domain level where beta underflows") {
  RemainderSchedule s;
  s.kind = BetaKind::exp_sqrt;
  s.parameter = 3.0;
  const long long n = 1000000;
  CHECK(s.beta(n) == 0.0);
  CHECK(s.log_beta(n) == doctest::Approx(-3000.0));
  const Remainder r = remainder(s, n);
  REQUIRE(!r.degenerate);
  CHECK(log_concentration_level(s, r.value, n) == doctest::Approx(-3000.0).epsilon(1e-12));
}

TEST_CASE("polynomial schedule vanishes") {
  RemainderSchedule s;
  s.kind = BetaKind::polynomial;
  s.parameter = 2.0;
  CHECK(remainder(s, 1000000000).value < 0.01);
  CHECK(remainder(s, 100).value > remainder(s, 1000000000).value);
}

TEST_CASE("confidence intervals") {
  const RsSolution rs = rs_with(1.2, 0.2, 0.4);
  const ConfidenceInterval t1 = confidence_interval(rs, 1.0, 0.1, IntervalVariant::theorem1, 0.95);
  CHECK(t1.lower == doctest::Approx(0.9));
  CHECK(t1.upper == doctest::Approx(1.24));
  const ConfidenceInterval c1 = confidence_interval(rs, 1.0, 0.1, IntervalVariant::corollary1, 0.95);
  CHECK(c1.lower == doctest::Approx(0.9));
  CHECK(c1.upper == doctest::Approx(1.3));
  CHECK(c1.lower <= t1.lower);
  CHECK(c1.upper >= t1.upper);

  const ConfidenceInterval asym = confidence_interval(rs, 1.0, 0.0, IntervalVariant::theorem1, 0.95);
  CHECK(asym.lower == doctest::Approx(1.0));
  CHECK(asym.upper == 1.2);
  const ConfidenceInterval point = confidence_interval(rs_with(0.7, 0.0, 0.3), 1.0, 0.0, IntervalVariant::theorem1, 0.5);
  CHECK(point.lower == point.upper);

  CHECK_THROWS_AS(confidence_interval(rs, 0.3, 0.1, IntervalVariant::corollary1, 0.95), ConsistencyError);
  CHECK_THROWS_AS(confidence_interval(rs, 1.0, 0.1, IntervalVariant::theorem1, 1.0), ParameterError);
  CHECK_THROWS_AS(confidence_interval(rs, 1.0, -0.1, IntervalVariant::theorem1, 0.9), ParameterError);
}

TEST_CASE("interval width is monotone") {
  double prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.05) {
    const ConfidenceInterval ci = confidence_interval(rs_with(1.0, 0.3, 0.5), 1.0, r, IntervalVariant::theorem1, 0.9);
    CHECK(ci.upper - ci.lower >= prev);
    prev = ci.upper - ci.lower;
  }
  prev = -1.0;
  for (double eps = 0.0; eps <= 1.0; eps += 0.05) {
    // fixed ERM loss 0.8, tau grows with eps
    const ConfidenceInterval ci = confidence_interval(rs_with(0.8 * (1 + eps), eps, 0.5), 1.0, 0.1,
                                                      IntervalVariant::theorem1, 0.9);
    CHECK(ci.upper - ci.lower >= prev - 1e-15);
    prev = ci.upper - ci.lower;
  }
}

TEST_CASE("generalization bound") {
  CHECK(generalization_bound(0.0, 3.0, 1.0, 0.0) == 0.0);
  CHECK(generalization_bound(0.5, 2.0, 1.0, 0.1) == doctest::Approx(1.25));
  CHECK_THROWS_AS(generalization_bound(-0.1, 1.0, 1.0, 0.1), ParameterError);
}

TEST_CASE("shifted interval") {
  const RsSolution rs = rs_with(1.2, 0.2, 0.4);
  const ShiftedInterval none = shifted_interval(rs, 1.0, 0.1, 0.0, 0.9);
  const ConfidenceInterval t1 = confidence_interval(rs, 1.0, 0.1, IntervalVariant::theorem1, 0.9);
  CHECK(none.interval.lower == t1.lower);
  CHECK(none.interval.upper == t1.upper);
  CHECK(!none.regret_bound);

  const ShiftedInterval one = shifted_interval(rs, 1.0, 0.1, 0.1, 0.9, 2.0);
  const ShiftedInterval two = shifted_interval(rs, 1.0, 0.1, 0.2, 0.9, 2.0);
  CHECK(t1.lower - two.interval.lower == doctest::Approx(2.0 * (t1.lower - one.interval.lower)));
  CHECK(two.interval.upper - t1.upper == doctest::Approx(2.0 * (one.interval.upper - t1.upper)));
  REQUIRE(one.regret_bound);
  CHECK(*one.regret_bound == doctest::Approx(0.2 * 2.0 + 2.2 * 1.0 * 0.2));
  CHECK(one.interval.variant == IntervalVariant::shifted);
  CHECK_THROWS_AS(shifted_interval(rs, 1.0, 0.1, -0.1, 0.9), ParameterError);
}

TEST_CASE("names") {
  CHECK(beta_kind_from_name("exp_sqrt") == BetaKind::exp_sqrt);
  CHECK(to_string(BetaKind::polynomial) == "polynomial");
  CHECK_THROWS_AS(beta_kind_from_name("harmonic"), ParameterError);
  CHECK(to_string(IntervalVariant::corollary1) == "corollary1");
}
