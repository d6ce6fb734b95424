#include <gtest/gtest.h>

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "ruinbound/adjustment.hpp"

using namespace ruinbound;

namespace {

constexpr double kTol = 1e-10;

// Independent root of a scalar function with f(a) < 0 < f(b), via Boost's bisection.
template <class F>
double root(F f, double a, double b) {
  auto r = boost::math::tools::bisect(f, a, b, boost::math::tools::eps_tolerance<double>(50));
  return 0.5 * (r.first + r.second);
}

// sup_{k <= K} G_k(h) straight from the prefix sums.
double scan_sup(const RiskModel& m, double h, std::int64_t K = 3000) {
  double best = -kInf;
  for (const auto& g : cumulative_log_mgf(m, h, K)) best = std::max(best, g.value());
  return best;
}

std::vector<RiskModel> assorted() {
  return {
      fixtures::ex1(),
      fixtures::ex2(),
      fixtures::ex3(),
      fixtures::classical(),
      fixtures::two_normals(-1.0, 0.4),
      fixtures::iid(Distribution::two_point(1.0, 0.25, -1.0)),
      fixtures::iid(Distribution::shifted_exponential(1.0, -2.0), 0.02),
      RiskModel(QuasiPeriodicScaled{{Distribution::normal(-1.0, 1.0)}, 0.5}),
      RiskModel(Periodic{{Distribution::uniform(-1.5, 0.5), Distribution::normal(-0.2, 0.3)}},
                PeriodicRates{{0.0, 0.1}}),
  };
}

}  // namespace

TEST(SolveLY, IidNormalUnitRoot) {
  const auto r = solve_L_Y(fixtures::iid(Distribution::normal(-0.5, 1.0)), kTol);
  EXPECT_NEAR(r.value, 1.0, kTol);
  EXPECT_EQ(r.status, "converged");
  EXPECT_TRUE(r.certified);
}

TEST(SolveLY, NonpositiveStepsGiveInfinity) {
  const auto r = solve_L_Y(fixtures::iid(Distribution::degenerate(-1.0)));
  EXPECT_EQ(r.value, kInf);
  EXPECT_EQ(r.status, "always-feasible");
}

// The 1e-12 criterion slack admits h up to sqrt(2e-12) when the log-MGF is h^2/2.
constexpr double kSlackWidth = 1.5e-6;

TEST(SolveLY, NonnegativeFirstMeanGivesZero) {
  for (double a1 : {0.0, 0.2, 1.0}) {
    const auto r = solve_L_Y(fixtures::two_normals(a1, -1.0 - a1), kTol);
    EXPECT_LE(r.value, a1 == 0.0 ? kSlackWidth : kTol) << a1;
  }
}

TEST(SolveLY, PeriodicTakesTheWorstPhase) {
  // h a + h^2/2 <= 0 iff h <= -2a; the phase with a = -1/4 binds.
  EXPECT_NEAR(solve_L_Y(fixtures::ex1(), kTol).value, 0.5, kTol);
  EXPECT_NEAR(solve_L_Y(fixtures::ex3(), kTol).value, 0.5, kTol);
}

TEST(SolveLY, ContractingScaleBindsAtFirstBlock) {
  // steps ~ q^{k-1} N(-1, 1): -h w + h^2 w^2 / 2 <= 0 iff h w <= 2.
  const auto r = solve_L_Y(RiskModel(QuasiPeriodicScaled{{Distribution::normal(-1.0, 1.0)}, 0.5}), kTol);
  EXPECT_NEAR(r.value, 2.0, kTol);
  EXPECT_TRUE(r.certified);
}

TEST(SolveLS, Example1) {
  // G_1 = -h/4 + h^2/2, G_2 = -h + h^2: the odd partial sums bind at h = 1/2.
  const auto r = solve_L_S(fixtures::ex1(), kTol);
  EXPECT_NEAR(r.value, 0.5, kTol);
  EXPECT_TRUE(r.certified);
}

TEST(SolveLS, ClassicalRenewal) {
  // (1/(1-h)) (lambda/(lambda+h)) = 1 with lambda = 1/2.
  const auto r = solve_L_S(fixtures::classical(), kTol);
  EXPECT_NEAR(r.value, 0.5, kTol);
}

TEST(SolveLS, IndexedNormal) {
  // -h n^2/4 + n h^2/2 <= 0 for all n iff h <= 1/2.
  EXPECT_NEAR(solve_L_S(fixtures::ex3(), kTol).value, 0.5, kTol);
}

TEST(SolveLS, TwoPointHasNoFeasibleExponent) {
  // P[Y_1 = 1] = 1/2 makes E e^{hY_1} = cosh h > 1.
  EXPECT_LE(solve_L_S(fixtures::ex4(), kTol).value, kSlackWidth);
}

TEST(SolveLS, DiscountedIidAgainstScan) {
  // With r > 0 the sup no longer reduces to one step; compare with a root of the scanned sup.
  const auto m = fixtures::iid(Distribution::normal(-0.5, 1.0), 0.05);
  const double oracle = root([&](double h) { return scan_sup(m, h) > 1e-13 ? 1.0 : -1.0; }, 0.5, 5.0);
  EXPECT_NEAR(solve_L_S(m, kTol).value, oracle, 1e-8);
}

TEST(SolveLS, UncertifiedOnExplicitPrefix) {
  const auto m = RiskModel(ExplicitPrefix{{Distribution::normal(-1, 1), Distribution::normal(-1, 1)}});
  const auto r = solve_L_S(m, kTol);
  EXPECT_FALSE(r.certified);
  EXPECT_NEAR(r.value, 2.0, 1e-8);  // lower estimate from the prefix alone
}

TEST(SolvePeriodRoot, Example1) { EXPECT_NEAR(solve_period_root(fixtures::ex1(), 2, kTol).value, 1.0, 1e-8); }

TEST(SolvePeriodRoot, Example2FeasibleAtTwoThirds) {
  const auto r = solve_period_root(fixtures::ex2(), 3, kTol);
  EXPECT_GE(r.value, 2.0 / 3.0);
  EXPECT_LT(r.value, 1.0);
  const double oracle = root(
      [](double h) {
        return std::log(std::expm1(2 * h) / (2 * h)) + std::log(-std::expm1(-2 * h) / (2 * h)) - 2 * h -
               std::log1p(-h);
      },
      0.3, 0.99);
  EXPECT_NEAR(r.value, oracle, 1e-9);
}

TEST(SolvePeriodRoot, DegenerateZeroPeriod) {
  const auto m = RiskModel(Periodic{{Distribution::degenerate(-1.0), Distribution::degenerate(1.0)}});
  EXPECT_EQ(solve_period_root(m, 2).value, kInf);
}

TEST(SolvePeriodRoot, MultiplesOfTheCycle) {
  // S_4 = 2 S_2 in law for period-2 normals; the root does not move.
  EXPECT_NEAR(solve_period_root(fixtures::ex1(), 4, kTol).value, 1.0, 1e-8);
}

TEST(SolvePeriodRoot, HypothesisChecks) {
  EXPECT_THROW(solve_period_root(fixtures::ex1(), 3), HypothesisViolated);
  EXPECT_THROW(solve_period_root(fixtures::ex4(), 1), HypothesisViolated);
  EXPECT_THROW(solve_period_root(RiskModel(QuasiPeriodicScaled{{Distribution::normal(-1, 1)}, 1.5}), 1),
               HypothesisViolated);
  EXPECT_THROW(solve_period_root(RiskModel(PrefixThenTail{{Distribution::normal(-1, 1)},
                                                          Periodic{{Distribution::normal(-1, 1)}}}),
                                 1),
               HypothesisViolated);
}

TEST(VerifyLStar, Example1) {
  EXPECT_TRUE(verify_L_star(fixtures::ex1(), 2, 1, 1.0).ok);
  const auto bad = verify_L_star(fixtures::ex1(), 2, 1, 1.5);
  EXPECT_FALSE(bad.ok);
  EXPECT_NEAR(bad.max_delta, 0.75, 1e-12);
  EXPECT_FALSE(bad.reason.empty());
}

TEST(VerifyLStar, ZeroAlwaysHolds) {
  EXPECT_TRUE(verify_L_star(fixtures::ex4(), 3, 2, 0.0).ok);
  EXPECT_TRUE(verify_L_star(fixtures::two_normals(1, 1), 2, 1, 0.0).ok);
}

TEST(VerifyLStar, NonBlockTailIsUnverifiable) {
  const auto r = verify_L_star(fixtures::ex4(), 2, 1, 0.5);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.reason, "unverifiable-tail");
}

TEST(VerifyLStar, LateStartSkipsABadPrefix) {
  // Delta_n covers steps n+1 .. n+l, so the positive second step only matters for n = 1.
  const auto m = RiskModel(PrefixThenTail{{Distribution::normal(-1.0, 1.0), Distribution::normal(3.0, 1.0)},
                                          Periodic{{Distribution::normal(-1, 1)}}});
  EXPECT_FALSE(verify_L_star(m, 1, 1, 1.0).ok);
  EXPECT_TRUE(verify_L_star(m, 1, 2, 1.0).ok);
}

TEST(VerifyLStar, PeriodRootPassesWithMEqualOne) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::classical(), fixtures::two_normals(-1.0, 0.4)}) {
    const auto l = block_structure(m)->period;
    const auto root_l = solve_period_root(m, l, kTol);
    ASSERT_TRUE(std::isfinite(root_l.value));
    EXPECT_TRUE(verify_L_star(m, l, 1, root_l.value).ok) << m.label();
  }
}

TEST(SolveKappa, Examples) {
  const auto n = solve_kappa(Distribution::normal(-0.5, 1.0), kTol);
  EXPECT_NEAR(n.value, 1.0, kTol);
  EXPECT_TRUE(kappa_exists(n));
  const auto d = solve_kappa(Distribution::degenerate(-1.0));
  EXPECT_FALSE(kappa_exists(d));
  EXPECT_EQ(d.status, "no-root: mgf stays below one");
  EXPECT_NEAR(solve_kappa(fixtures::classical_step(), kTol).value, 0.5, kTol);
  EXPECT_NEAR(solve_kappa(Distribution::two_point(1.0, 0.25, -1.0), kTol).value, std::log(3.0), kTol);
  const auto pos = solve_kappa(Distribution::normal(0.1, 1.0));
  EXPECT_FALSE(kappa_exists(pos));
  EXPECT_EQ(pos.value, 0.0);
}

TEST(SolveKappa, ShiftedExponentialAgainstBoost) {
  // e^{-2h} / (1 - h) = 1
  const double oracle = root([](double h) { return -2 * h - std::log1p(-h); }, 0.1, 0.99);
  EXPECT_NEAR(solve_kappa(Distribution::shifted_exponential(1.0, -2.0), kTol).value, oracle, 1e-9);
}

// Properties over an assorted set of models.

TEST(AdjustmentProperties, LYBelowLS) {
  for (const auto& m : assorted()) {
    const auto y = solve_L_Y(m, kTol);
    const auto s = solve_L_S(m, kTol);
    if (!y.certified || !s.certified) continue;
    EXPECT_LE(y.value, s.value + kTol) << m.label();
  }
}

TEST(AdjustmentProperties, BracketWidthAndFeasibility) {
  for (const auto& m : assorted()) {
    const auto s = solve_L_S(m, kTol);
    ASSERT_TRUE(s.certified) << m.label();
    EXPECT_GE(s.value, 0.0);
    if (!std::isfinite(s.value) || s.boundary) continue;
    EXPECT_LE(s.bracket_high - s.bracket_low, kTol);
    EXPECT_LE(s.bracket_low, s.value);
    // The scanned sup is an independent lower estimate of the criterion.
    if (s.value > 1e-6) EXPECT_LE(std::exp(scan_sup(m, s.value - 1e-6)), 1.0 + 1e-9) << m.label();
    EXPECT_GT(std::exp(sup_log_mgf(m, s.value + 1e-6).value), 1.0) << m.label();
  }
}

TEST(AdjustmentProperties, KappaMatchesLYForIid) {
  for (const auto& d : {Distribution::normal(-0.5, 1.0), Distribution::normal(-2.0, 3.0), fixtures::classical_step(),
                        Distribution::two_point(1.0, 0.25, -1.0), Distribution::shifted_exponential(1.0, -2.0),
                        Distribution::uniform(-1.0, 0.5)}) {
    const auto k = solve_kappa(d, kTol);
    ASSERT_TRUE(kappa_exists(k)) << d.family();
    EXPECT_NEAR(k.value, solve_L_Y(fixtures::iid(d), kTol).value, 2 * kTol) << d.family();
    EXPECT_NEAR(log_mgf_at(d, k.value), 0.0, 1e-8) << d.family();
  }
}

TEST(AdjustmentProperties, RejectsNonpositiveTolerance) {
  EXPECT_THROW(solve_L_S(fixtures::ex1(), 0.0), std::invalid_argument);
  EXPECT_THROW(solve_kappa(Distribution::normal(-1, 1), -1.0), std::invalid_argument);
}
