#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "ruinbound/model.hpp"

using namespace ruinbound;

namespace {

// Independent oracle: G_k(h) summed directly from materialized laws and v_{k-1}.
std::vector<double> brute_cumulative(const RiskModel& model, double h, std::int64_t K) {
  std::vector<double> out;
  double g = 0.0;
  for (std::int64_t k = 1; k <= K; ++k) {
    const Distribution d = distribution_at(model, k);
    const double v = discount_factor(model, k - 1);
    g += log_mgf_at(Distribution::scaled(v, d), h);
    out.push_back(g);
  }
  return out;
}

double brute_sup(const RiskModel& model, double h, std::int64_t K, std::int64_t* argmax = nullptr) {
  const auto g = brute_cumulative(model, h, K);
  double best = -kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > best) {
      best = g[i];
      if (argmax) *argmax = static_cast<std::int64_t>(i) + 1;
    }
  }
  return best;
}

// E e^{hY_n} for the two-point family, from the closed form 1 + (1-e^{-h})(e^h-n)/(n+1).
double two_point_term(double h, int n) {
  return std::log1p(-std::expm1(-h) * (std::exp(h) - n) / (n + 1.0));
}

}  // namespace

TEST(DistributionAt, PeriodicWraps) {
  const auto m = RiskModel(Periodic{{Distribution::degenerate(1), Distribution::degenerate(2),
                                     Distribution::degenerate(3)}});
  EXPECT_EQ(distribution_at(m, 5).get_if<Degenerate>()->value, 2.0);
  EXPECT_EQ(distribution_at(m, 3).get_if<Degenerate>()->value, 3.0);
}

TEST(DistributionAt, QuasiPeriodicScales) {
  const auto m = RiskModel(QuasiPeriodicScaled{{Distribution::uniform(0, 1)}, 0.5});
  const auto d = distribution_at(m, 3);
  const auto* s = d.get_if<Scaled>();
  ASSERT_NE(s, nullptr);
  EXPECT_NEAR(s->factor, 0.25, 1e-15);
  EXPECT_NE(s->inner->get_if<Uniform>(), nullptr);
  EXPECT_NE(distribution_at(m, 1).get_if<Uniform>(), nullptr);
}

TEST(DistributionAt, IndexedFamilies) {
  const auto* n = distribution_at(fixtures::ex3(), 1).get_if<Normal>();
  ASSERT_NE(n, nullptr);
  EXPECT_EQ(n->mean, -0.25);
  EXPECT_EQ(n->variance, 1.0);
  const auto* t = distribution_at(fixtures::ex4(), 3).get_if<TwoPoint>();
  ASSERT_NE(t, nullptr);
  EXPECT_NEAR(t->p1, 0.25, 1e-15);
}

TEST(DistributionAt, PrefixThenTailReindexes) {
  const auto m = RiskModel(PrefixThenTail{{Distribution::degenerate(9)},
                                          Periodic{{Distribution::degenerate(1), Distribution::degenerate(2)}}});
  EXPECT_EQ(distribution_at(m, 1).get_if<Degenerate>()->value, 9.0);
  EXPECT_EQ(distribution_at(m, 2).get_if<Degenerate>()->value, 1.0);
  EXPECT_EQ(distribution_at(m, 5).get_if<Degenerate>()->value, 2.0);
}

TEST(DistributionAt, ExplicitPrefixBoundary) {
  const auto m = RiskModel(ExplicitPrefix{{Distribution::degenerate(-1), Distribution::degenerate(-2)}});
  EXPECT_NO_THROW(distribution_at(m, 2));
  EXPECT_THROW(distribution_at(m, 3), IndexBeyondPrefix);
  EXPECT_THROW(cumulative_log_mgf(m, 1.0, 3), IndexBeyondPrefix);
  EXPECT_THROW(distribution_at(m, 0), std::invalid_argument);
}

TEST(RiskModelValidation, RejectsBadRules) {
  EXPECT_THROW(RiskModel(Periodic{{}}), std::invalid_argument);
  EXPECT_THROW(RiskModel(QuasiPeriodicScaled{{Distribution::degenerate(-1)}, 0.0}), std::invalid_argument);
  EXPECT_THROW(RiskModel(Periodic{{Distribution::degenerate(-1)}}, ConstantRate{-0.1}), std::invalid_argument);
  EXPECT_THROW(RiskModel(Periodic{{Distribution::degenerate(-1)}}, PeriodicRates{{0.1, -0.2}}),
               std::invalid_argument);
}

TEST(DiscountFactor, Examples) {
  EXPECT_EQ(discount_factor(fixtures::ex1(), 7), 1.0);
  EXPECT_NEAR(discount_factor(fixtures::iid(Distribution::degenerate(-1), 0.1), 2), 1.0 / 1.21, 1e-15);
  const auto m = RiskModel(Periodic{{Distribution::degenerate(-1)}}, PeriodicRates{{0.1, 0.2}});
  EXPECT_NEAR(discount_factor(m, 4), std::pow(1.0 / (1.1 * 1.2), 2), 1e-15);
  EXPECT_EQ(discount_factor(m, 0), 1.0);
}

TEST(DiscountFactor, MonotoneInUnitInterval) {
  const auto m = RiskModel(Periodic{{Distribution::degenerate(-1)}}, PeriodicRates{{0.0, 0.3, 0.05}});
  double prev = 1.0;
  for (std::int64_t k = 0; k <= 3000; ++k) {
    const double v = discount_factor(m, k);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, prev);
    prev = v;
  }
  // log-space keeps v_k representable long after linear products underflow
  EXPECT_LT(log_discount(m.rates(), 20000), -700.0);
  EXPECT_TRUE(std::isfinite(log_discount(m.rates(), 20000)));
}

TEST(DiscountFactor, ExplicitRatesEndAtTheirLength) {
  const auto m = RiskModel(Periodic{{Distribution::degenerate(-1)}}, ExplicitRates{{0.1, 0.1}});
  EXPECT_NEAR(discount_factor(m, 2), 1.0 / 1.21, 1e-15);
  EXPECT_THROW(discount_factor(m, 3), IndexBeyondPrefix);
}

TEST(CumulativeLogMgf, IndexedNormalClosedForm) {
  const auto g = cumulative_log_mgf(fixtures::ex3(), 1.0, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0].value(), 0.25, 1e-15);
  EXPECT_NEAR(g[1].value(), 0.0, 1e-15);
  EXPECT_NEAR(g[2].value(), -0.75, 1e-15);
  // -h n^2/4 + n h^2/2 at a second h
  const double h = 1.7;
  const auto g2 = cumulative_log_mgf(fixtures::ex3(), h, 40);
  for (int n = 1; n <= 40; ++n) EXPECT_NEAR(g2[n - 1].value(), -h * n * n / 4.0 + n * h * h / 2.0, 1e-10) << n;
}

TEST(CumulativeLogMgf, ZeroAtOrigin) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::ex3(), fixtures::ex4(), fixtures::classical()})
    for (const auto& g : cumulative_log_mgf(m, 0.0, 25)) EXPECT_EQ(g.value(), 0.0);
}

TEST(CumulativeLogMgf, Example2CycleBelowOne) {
  const auto g = cumulative_log_mgf(fixtures::ex2(), 2.0 / 3.0, 3);
  const double e = -std::expm1(-4.0 / 3.0);
  EXPECT_NEAR(g[2].value(), std::log(e * e / ((16.0 / 9.0) * (1.0 / 3.0))), 1e-13);
  EXPECT_LT(std::exp(g[2].value()), 0.92);
  EXPECT_GT(std::exp(g[2].value()), 0.91);
}

TEST(CumulativeLogMgf, InfinityPropagates) {
  const auto g = cumulative_log_mgf(fixtures::ex2(), 1.0, 7);
  EXPECT_FALSE(g[1].is_infinite());
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_TRUE(g[i].is_infinite()) << i;
}

TEST(CumulativeLogMgf, AgreesWithPerIndexEvaluation) {
  const std::vector<RiskModel> models{
      fixtures::ex1(),
      fixtures::ex2(),
      fixtures::ex3(),
      fixtures::ex4(),
      RiskModel(QuasiPeriodicScaled{{Distribution::normal(-1, 1), Distribution::uniform(-1, 0.5)}, 0.8},
                PeriodicRates{{0.02, 0.05}}),
      RiskModel(PrefixThenTail{{Distribution::normal(1, 2)}, Periodic{{Distribution::normal(-1, 1)}}},
                ConstantRate{0.03}),
  };
  for (const auto& m : models) {
    for (double h : {0.2, 0.6, 0.9}) {
      const auto g = cumulative_log_mgf(m, h, 60);
      const auto oracle = brute_cumulative(m, h, 60);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (oracle[i] == kInf) {
          EXPECT_TRUE(g[i].is_infinite());
        } else {
          EXPECT_NEAR(g[i].value(), oracle[i], 1e-12 * std::max(1.0, std::abs(oracle[i]))) << m.label() << i;
        }
      }
    }
  }
}

TEST(CumulativeLogMgf, PeriodicIncrementsAreConstant) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::classical()}) {
    const auto l = static_cast<std::size_t>(block_structure(m)->period);
    for (double h : {0.1, 0.3, 0.5}) {
      const auto g = cumulative_log_mgf(m, h, 90);
      for (std::size_t k = 0; k + l < g.size(); ++k)
        EXPECT_NEAR(g[k + l].value() - g[k].value(), g[l - 1].value(), 1e-10);
    }
  }
}

TEST(CumulativeLogMgf, ConvexInH) {
  const auto m = fixtures::ex4();
  for (int k : {1, 5, 20}) {
    auto G = [&](double h) { return cumulative_log_mgf(m, h, k).back().value(); };
    for (double h = 0.1; h < 4.0; h += 0.3)
      EXPECT_LE(G(h + 0.1), 0.5 * (G(h) + G(h + 0.2)) + 1e-12) << k << " " << h;
  }
}

TEST(BlockStructure, Shapes) {
  const auto a = block_structure(fixtures::ex2());
  ASSERT_TRUE(a);
  EXPECT_EQ(a->prefix_length, 0);
  EXPECT_EQ(a->period, 3);
  EXPECT_EQ(a->log_ratio, 0.0);
  const auto b = block_structure(RiskModel(QuasiPeriodicScaled{{Distribution::degenerate(-1)}, 0.5},
                                           ConstantRate{0.25}));
  ASSERT_TRUE(b);
  EXPECT_NEAR(b->log_ratio, std::log(0.5 / 1.25), 1e-15);
  const auto c = block_structure(RiskModel(PrefixThenTail{{Distribution::degenerate(1), Distribution::degenerate(2)},
                                                          Periodic{{Distribution::degenerate(-1)}}},
                                           PeriodicRates{{0.1, 0.2}}));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->prefix_length, 2);
  EXPECT_EQ(c->period, 2);  // lcm of tail length and rate period
  EXPECT_FALSE(block_structure(fixtures::ex4()));
  EXPECT_FALSE(block_structure(RiskModel(Periodic{{Distribution::degenerate(-1)}}, ExplicitRates{{0.1}})));
}

TEST(SupLogMgf, Example2AttainedAtFirstStep) {
  const auto s = sup_log_mgf(fixtures::ex2(), 2.0 / 3.0);
  EXPECT_EQ(s.status, SupStatus::attained);
  EXPECT_EQ(s.argmax, 1);
  EXPECT_NEAR(s.value, std::log(std::expm1(4.0 / 3.0) / (4.0 / 3.0)), 1e-13);
  EXPECT_NEAR(std::exp(s.value), 2.0953, 1e-4);
}

TEST(SupLogMgf, ZeroAtOrigin) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::ex3(), fixtures::ex4()}) {
    const auto s = sup_log_mgf(m, 0.0);
    EXPECT_EQ(s.value, 0.0);
    EXPECT_EQ(s.argmax, 1);
    EXPECT_TRUE(s.certified());
  }
}

TEST(SupLogMgf, TwoPointArgmaxBracketsExpH) {
  const double h = std::log(3.0);
  const auto s = sup_log_mgf(fixtures::ex4(), h);
  EXPECT_EQ(s.status, SupStatus::attained);
  EXPECT_TRUE(s.argmax == 2 || s.argmax == 3);
  EXPECT_GE(s.argmax + 1, std::exp(h) - 1e-12);
  double oracle = 0.0;
  for (int n = 1; n <= s.argmax; ++n) oracle += two_point_term(h, n);
  EXPECT_NEAR(s.value, oracle, 1e-13);
}

TEST(SupLogMgf, TwoPointArgmaxAcrossH) {
  for (int m : {1, 2, 5, 17, 60, 400}) {
    const double h = std::log(m + 0.5);  // e^h strictly inside (m, m+1)
    const auto s = sup_log_mgf(fixtures::ex4(), h);
    ASSERT_EQ(s.status, SupStatus::attained) << m;
    EXPECT_EQ(s.argmax, m);
  }
}

TEST(SupLogMgf, IndexedNormalMatchesQuadratic) {
  // max_n (-h n^2/4 + n h^2/2) for integer n.
  for (double h : {0.5, 1.0, 3.0, 9.0}) {
    const auto s = sup_log_mgf(fixtures::ex3(), h);
    ASSERT_EQ(s.status, SupStatus::attained);
    double best = -kInf;
    for (int n = 1; n < 1000; ++n) best = std::max(best, -h * n * n / 4.0 + n * h * h / 2.0);
    EXPECT_NEAR(s.value, best, 1e-9 * std::max(1.0, best)) << h;
  }
}

TEST(SupLogMgf, PeriodicAgreesWithScan) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::two_normals(0.3, -1.5)}) {
    for (double h : {0.2, 0.5, 0.7}) {
      const auto s = sup_log_mgf(m, h);
      ASSERT_EQ(s.status, SupStatus::attained);
      std::int64_t k = 0;
      EXPECT_NEAR(s.value, brute_sup(m, h, 300, &k), 1e-11);
      EXPECT_EQ(s.argmax, k);
    }
  }
}

TEST(SupLogMgf, ContractingQuasiPeriodicAgreesWithScan) {
  // An early positive block followed by geometrically shrinking steps.
  const auto m = RiskModel(PrefixThenTail{{Distribution::normal(0.5, 1.0)},
                                          QuasiPeriodicScaled{{Distribution::normal(0.4, 1.0),
                                                               Distribution::normal(-0.6, 0.5)},
                                                              0.9}},
                           ConstantRate{0.01});
  for (double h : {0.3, 0.8, 1.5}) {
    const auto s = sup_log_mgf(m, h);
    ASSERT_EQ(s.status, SupStatus::attained) << h;
    std::int64_t k = 0;
    EXPECT_NEAR(s.value, brute_sup(m, h, 4000, &k), 1e-10) << h;
    EXPECT_EQ(s.argmax, k);
  }
}

TEST(SupLogMgf, GrowingModelsAreUnbounded) {
  // Positive drift every period.
  const auto s = sup_log_mgf(fixtures::two_normals(0.1, 0.1), 0.5);
  EXPECT_EQ(s.status, SupStatus::unbounded);
  EXPECT_EQ(s.value, kInf);
  const auto t = sup_log_mgf(RiskModel(IndexedNormal{0.1, -1.0}), 0.5);
  EXPECT_EQ(t.status, SupStatus::unbounded);
  // Expanding scale with a nonpositive drift per block never certifies.
  const auto e = sup_log_mgf(RiskModel(QuasiPeriodicScaled{{Distribution::normal(-1, 1)}, 1.01}), 0.3,
                             TruncationPolicy{.k_max = 200});
  EXPECT_NE(e.status, SupStatus::attained);
}

TEST(SupLogMgf, ExplicitPrefixIsUndetermined) {
  const auto m = RiskModel(ExplicitPrefix{{Distribution::degenerate(-1), Distribution::degenerate(-1)}});
  const auto s = sup_log_mgf(m, 1.0);
  EXPECT_EQ(s.status, SupStatus::undetermined);
  EXPECT_FALSE(s.certified());
  EXPECT_EQ(s.value, -1.0);
}

TEST(SupLogMgf, AtLeastEveryScannedPrefix) {
  for (const auto& m : {fixtures::ex1(), fixtures::ex2(), fixtures::ex3(), fixtures::ex4()})
    for (double h : {0.1, 0.45, 0.95}) {
      const auto s = sup_log_mgf(m, h);
      EXPECT_GE(s.value + 1e-12, brute_sup(m, h, 200));
    }
}

TEST(JointDomain, Suprema) {
  EXPECT_EQ(joint_domain_sup(fixtures::ex2()), 1.0);
  EXPECT_EQ(joint_domain_sup(fixtures::ex1()), kInf);
  EXPECT_EQ(joint_domain_sup(fixtures::classical()), 1.0);
  // v_{k-1} shrinks the weight, so later steps tolerate larger h; the first step binds.
  EXPECT_EQ(joint_domain_sup(fixtures::iid(Distribution::exponential(2.0), 0.1)), 2.0);
}

TEST(ReduceEventModel, ClassicalRenewal) {
  const EventModel em(ConstantRate{1.0}, ConstantLaw{Distribution::exponential(1.0)},
                      ConstantLaw{Distribution::exponential(0.5)});
  const auto m = reduce_event_model(em);
  EXPECT_TRUE(rates_all_zero(m.rates()));
  for (double h : {0.1, 0.4, 0.8})
    EXPECT_NEAR(log_mgf_at(distribution_at(m, 4), h), log_mgf_at(fixtures::classical_step(), h), 1e-15);
}

TEST(ReduceEventModel, ReserveInterestScalesAndFloors) {
  const double r = 0.05;
  const EventModel em(ConstantRate{1.0}, ConstantLaw{Distribution::exponential(1.0)},
                      ConstantLaw{Distribution::exponential(0.5)}, ConstantRate{0.0}, ConstantRate{r});
  const auto m = reduce_event_model(em);
  EXPECT_EQ(rate_at(m.rates(), 3), r);
  const auto d = distribution_at(m, 2);
  const auto* s = d.get_if<Scaled>();
  ASSERT_NE(s, nullptr);
  EXPECT_NEAR(s->factor, 1.0 / (1.0 + r), 1e-15);
  for (double h : {0.2, 0.7})
    EXPECT_NEAR(log_mgf_at(d, h), log_mgf_at(fixtures::classical_step(), h / (1.0 + r)), 1e-14);
}

TEST(ReduceEventModel, PremiumInterestEntersCompound) {
  const EventModel em(ConstantRate{2.0}, ConstantLaw{Distribution::exponential(1.0)},
                      ConstantLaw{Distribution::exponential(1.0)}, ConstantRate{0.05});
  const auto* c = reduce_event_model(em).increments().index() == 1
                      ? distribution_at(reduce_event_model(em), 1).get_if<CompoundIncrement>()
                      : nullptr;
  ASSERT_NE(c, nullptr);
  EXPECT_NEAR(c->premium_rate, 2.1, 1e-15);
}

TEST(ReduceEventModel, PeriodAndLength) {
  const EventModel periodic(PeriodicRates{{1.0, 2.0}}, PeriodicLaws{{Distribution::exponential(1.0),
                                                                     Distribution::exponential(2.0),
                                                                     Distribution::exponential(3.0)}},
                            ConstantLaw{Distribution::exponential(1.0)});
  EXPECT_EQ(periodic.period(), 6);
  EXPECT_FALSE(periodic.length());
  const auto m = reduce_event_model(periodic);
  EXPECT_EQ(block_structure(m)->period, 6);
  const EventModel finite(ConstantRate{1.0}, ExplicitLaws{{Distribution::exponential(1.0)}},
                          ConstantLaw{Distribution::exponential(1.0)});
  EXPECT_EQ(finite.length(), 1);
  EXPECT_EQ(defined_length(reduce_event_model(finite)), 1);
}

TEST(ReduceEventModel, RejectsInvalidEvents) {
  EXPECT_THROW(EventModel(ConstantRate{0.0}, ConstantLaw{Distribution::exponential(1.0)},
                          ConstantLaw{Distribution::exponential(1.0)}),
               std::invalid_argument);
  EXPECT_THROW(EventModel(ConstantRate{1.0}, ConstantLaw{Distribution::normal(1.0, 1.0)},
                          ConstantLaw{Distribution::exponential(1.0)}),
               std::invalid_argument);
  EXPECT_THROW(EventModel(ConstantRate{1.0}, ConstantLaw{Distribution::exponential(1.0)},
                          ConstantLaw{Distribution::degenerate(0.0)}),
               std::invalid_argument);
}
