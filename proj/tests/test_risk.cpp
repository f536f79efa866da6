#include <gtest/gtest.h>

#include <random>

#include "cotlab/arithmetic.hpp"
#include "cotlab/constructions.hpp"
#include "cotlab/risk.hpp"

using namespace cotlab;

namespace {

Point R(double v) { return Point::real(v); }

double mass(const FiniteDistribution& d) {
  double m = 0;
  for (double w : d.weights()) m += w;
  return m;
}

}  // namespace

TEST(FiniteDistribution, Validation) {
  EXPECT_THROW(FiniteDistribution({}, {}), ParameterError);
  EXPECT_THROW(FiniteDistribution({R(0)}, {0.5}), ParameterError);
  EXPECT_THROW(FiniteDistribution({R(0), R(0)}, {0.5, 0.5}), ParameterError);
  EXPECT_THROW(FiniteDistribution({R(0), R(1)}, {1.0, 0.0}), ParameterError);
  EXPECT_THROW(FiniteDistribution({R(0)}, {1.0, 0.0}), ParameterError);
}

TEST(Pushforward, SpecExamples) {
  auto line = MetricSpace::real_line();
  auto d = pushforward([](const Point& x) { return Point::real(x.value() * 2 + 1); }, FiniteDistribution::dirac(R(3)),
                       line);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.support()[0], R(7));

  auto z = pushforward([](const Point&) { return Point::real(0); }, FiniteDistribution::uniform({R(0), R(1)}), line);
  ASSERT_EQ(z.size(), 1u);
  EXPECT_EQ(z.support()[0], R(0));
  EXPECT_DOUBLE_EQ(z.weights()[0], 1.0);

  auto s = tight_instance(4, 1, 0.5, 2);
  auto tau = oracle_pushforward(s.rule, s.g, s.nu);
  ASSERT_EQ(tau.size(), 1u);
  EXPECT_EQ(tau.support()[0], R(40));
}

TEST(Pushforward, ConservesMass) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cell(-3, 3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Point> pts;
    std::vector<double> w;
    double total = 0;
    for (int i = 0; i < 12; ++i) {
      pts.push_back(R(i + 0.25 * trial));
      total += w.emplace_back(std::uniform_real_distribution<double>(0.01, 1)(rng));
    }
    for (double& v : w) v /= total;
    FiniteDistribution nu(pts, w);
    auto out = pushforward([&](const Point& x) { return R(std::floor(x.value() / 3.0)); }, nu, MetricSpace::real_line());
    EXPECT_NEAR(mass(out), 1.0, 1e-12);
    EXPECT_LE(out.size(), nu.size());
  }
}

TEST(Pushforward, MergesWithinSpaceTolerance) {
  auto d = FiniteDistribution::merged({R(1), R(1 + 1e-13), R(2)}, {0.25, 0.25, 0.5}, MetricSpace::real_line());
  EXPECT_EQ(d.size(), 2u);
  auto e = FiniteDistribution::merged({Point::expr("1"), Point::expr("01")}, {0.5, 0.5},
                                      MetricSpace::discrete(PointKind::Expr));
  EXPECT_EQ(e.size(), 2u);
}

TEST(StatisticalRisk, SpecExamples) {
  auto line = MetricSpace::real_line();
  auto l = QuasimetricLoss::scaled_metric(line, 1);
  EXPECT_EQ(statistical_risk(AnswerMap::identity(), AnswerMap::identity(), FiniteDistribution::dirac(R(4)), l), 0.0);
  EXPECT_EQ(statistical_risk(AnswerMap::identity(), AnswerMap::constant(R(0)), FiniteDistribution::dirac(R(2)), l), 2.0);
}

TEST(ReasoningRisk, SpecExamples) {
  auto s = nfl_instance(3, 2, 1, 0.1);
  EXPECT_NEAR(reasoning_risk(s.rule, s.f, s.g, s.nu, s.loss), 1.0, 1e-9);
  auto t = tight_instance(3, 2, 1, 1);
  EXPECT_NEAR(reasoning_risk(t.rule, t.f, t.g, t.nu, t.loss), 2.0, 1e-9);
  auto a = arith_scenario();
  EXPECT_EQ(reasoning_risk(a.rule, a.g, a.g, a.nu, a.loss), 0.0);
}

TEST(Tmr, SpecExamples) {
  for (int v = 1; v <= 3; ++v)
    for (int K : {2, 4})
      for (double M : {1.0, 7.0}) {
        auto s = nfl_instance(v, K, M, 0.05);
        EXPECT_NEAR(tmr(s.rule, s.f, s.g, s.nu, s.loss), M, 1e-9) << "variant " << v << " K " << K;
        EXPECT_NEAR(otr(s.rule, s.f, s.g, s.nu, s.loss), 0.0, 1e-9);
        EXPECT_EQ(tmr(s.rule, s.f, s.f, s.nu, s.loss), 0.0);
      }
  auto o = omr_instance(3, 3, 10);
  EXPECT_NEAR(tmr(o.rule, o.f, o.g, o.nu, o.loss), 0.0, 1e-12);
}

TEST(Otr, EqualsStatisticalRiskUnderPushforward) {
  std::vector<Scenario> all{tight_instance(4, 1, 0.5, 2), omr_instance(2, 3, 10), arith_scenario()};
  for (int v = 1; v <= 3; ++v) all.push_back(nfl_instance(v, 3, 2, 0.1));
  for (std::uint64_t i = 0; i < 100; ++i) all.push_back(random_stable_instance(i));
  for (const auto& s : all) {
    auto tau = oracle_pushforward(s.rule, s.g, s.nu);
    EXPECT_NEAR(otr(s.rule, s.f, s.g, s.nu, s.loss), statistical_risk(s.f, s.g, tau, s.loss), 1e-12) << s.name;
  }
}

TEST(Omr, SpecExamples) {
  auto a = arith_scenario();
  EXPECT_EQ(omr(a.rule, a.g, a.nu, a.loss), 0.0);
  for (int K : {2, 5}) {
    auto o = omr_instance(K, 3, K == 2 ? 10 : 1);
    EXPECT_NEAR(omr(o.rule, o.g, o.nu, o.loss), 3.0, 1e-12);
  }
  auto o7 = omr_instance(3, 7.5, 4);
  EXPECT_NEAR(omr(o7.rule, o7.g, o7.nu, o7.loss), 7.5, 1e-12);
}

TEST(DecompositionCheck, SpecExamples) {
  auto a = arith_scenario();
  auto z = decomposition_check(a.rule, a.g, a.g, a.nu, a.loss);
  EXPECT_TRUE(z.recoverable);
  EXPECT_EQ(z.reasoning + z.tmr + z.otr + z.omr + z.decomposition_slack + z.three_term_slack, 0.0);

  auto s = nfl_instance(1, 2, 1, 0.1);
  auto r = decomposition_check(s.rule, s.f, s.g, s.nu, s.loss);
  EXPECT_NEAR(r.reasoning, 1, 1e-9);
  EXPECT_NEAR(r.tmr, 1, 1e-9);
  EXPECT_NEAR(r.otr, 0, 1e-9);
  EXPECT_NEAR(r.decomposition_slack, 0, 1e-9);
  EXPECT_TRUE(r.ok());

  auto o = omr_instance(2, 3, 10);
  auto q = decomposition_check(o.rule, o.f, o.g, o.nu, o.loss);
  EXPECT_NEAR(q.reasoning, 3, 1e-12);
  EXPECT_NEAR(q.omr, 3, 1e-12);
  EXPECT_NEAR(q.three_term_slack, 0, 1e-12);
  EXPECT_FALSE(q.recoverable);
  EXPECT_TRUE(q.ok());
}

TEST(DecompositionCheck, RandomRecoverableScenarios) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto s = random_stable_instance(seed + 5000);
    auto r = decomposition_check(s.rule, s.f, s.g, s.nu, s.loss);
    ASSERT_TRUE(r.recoverable) << s.name;
    EXPECT_GE(r.decomposition_slack, -1e-9) << s.name;
    EXPECT_GE(r.three_term_slack, -1e-9) << s.name;
    for (double v : {r.reasoning, r.tmr, r.otr, r.omr}) EXPECT_GE(v, -1e-12);
  }
}

TEST(DecompositionCheck, ThreeTermHoldsWithoutRecoverability) {
  // Random oracle g with no recoverability repair.
  std::mt19937_64 rng(4);
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto line = MetricSpace::real_line();
  for (int trial = 0; trial < 300; ++trial) {
    ChainRule rule(line, {ChainRuleStep::affine_coord(Coord::prompt(), u(-2, 2), u(-1, 1)),
                          ChainRuleStep::linear_combo(u(-1, 1), {{Coord::a_prev(), u(-1, 1)}, {Coord::prompt(), u(-1, 1)}})});
    auto f = AnswerMap::affine(u(-2, 2), u(-1, 1));
    auto g = AnswerMap::affine(u(-2, 2), u(-1, 1));
    auto nu = FiniteDistribution::uniform({R(u(-3, -1)), R(u(0, 1)), R(u(2, 3))});
    auto r = decomposition_check(rule, f, g, nu, QuasimetricLoss::capped_metric(line, u(0.1, 2), u(0.5, 3)));
    EXPECT_GE(r.three_term_slack, -1e-9);
  }
}
