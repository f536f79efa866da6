#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cotlab/arithmetic.hpp"
#include "cotlab/chain.hpp"
#include "cotlab/constructions.hpp"

using namespace cotlab;

namespace {

Point R(double v) { return Point::real(v); }
const std::string kDot = "\xC2\xB7";

ChainRule constant_rule(int K, double c) {
  std::vector<ChainRuleStep> steps(static_cast<std::size_t>(K), ChainRuleStep::constant(R(c)));
  return ChainRule(MetricSpace::real_line(), steps);
}

ChainRule prompt_rule(int K) {
  std::vector<ChainRuleStep> steps(static_cast<std::size_t>(K), ChainRuleStep::copy(Coord::prompt()));
  return ChainRule(MetricSpace::real_line(), steps);
}

}  // namespace

TEST(RunTrajectory, ArithmeticDisplay) {
  auto t = run_trajectory(build_multiplication_chain_rule(), AnswerMap::arith_eval(), Point::expr("7" + kDot + "26"));
  ASSERT_EQ(t.K(), 4);
  const std::vector<std::string> q{"7" + kDot + "2", "10" + kDot + "14", "7" + kDot + "6", "140+42"};
  const std::vector<std::string> a{"14", "140", "42", "182"};
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(t.questions[k].text(), q[k]);
    EXPECT_EQ(t.answers[k].text(), a[k]);
  }
  EXPECT_TRUE(t.consistent_with(AnswerMap::arith_eval()));
}

TEST(RunTrajectory, ConstantSteps) {
  auto t = run_trajectory(constant_rule(5, 2.5), AnswerMap::affine(3, 1), R(-7));
  for (const auto& q : t.questions) EXPECT_EQ(q, R(2.5));
  for (const auto& a : t.answers) EXPECT_EQ(a, R(8.5));
}

TEST(RunTrajectory, UnrolledGeometricAnswers) {
  // D1 = 1, Dk = L a_{k-1}, f = L z gives A^(k) = L^{2k-1}.
  const double L = 0.1;
  ChainRule rule(MetricSpace::real_interval(0, 1),
                 {ChainRuleStep::constant(R(1)), ChainRuleStep::affine_coord(Coord::a_prev(), L, 0)});
  auto t = run_trajectory(rule, AnswerMap::affine(L, 0), R(1));
  EXPECT_NEAR(t.final_answer().value(), 0.001, 1e-15);
}

TEST(RunTrajectory, LeavingTheSpaceNamesTheStep) {
  ChainRule rule(MetricSpace::real_interval(0, 1),
                 {ChainRuleStep::constant(R(0.5)), ChainRuleStep::affine_coord(Coord::q_prev(), 4, 0)});
  try {
    run_trajectory(rule, AnswerMap::identity(), R(0.5));
    FAIL() << "expected a trajectory error";
  } catch (const TrajectoryError& e) {
    EXPECT_EQ(e.step(), 2);
  }
  EXPECT_THROW(run_trajectory(rule, AnswerMap::identity(), R(3)), DomainError);
}

TEST(RunTrajectory, AnswerLeavingTheSpace) {
  ChainRule rule(MetricSpace::real_interval(0, 1), {ChainRuleStep::constant(R(0.5))});
  EXPECT_THROW(run_trajectory(rule, AnswerMap::affine(10, 0), R(0.5)), TrajectoryError);
}

TEST(RunTrajectory, KOneAllowed) {
  auto t = run_trajectory(prompt_rule(1), AnswerMap::affine(2, 0), R(3));
  EXPECT_EQ(t.final_answer(), R(6));
}

TEST(Coord, ParseAndPositions) {
  EXPECT_EQ(Coord::parse("x").position(3), 0u);
  EXPECT_EQ(Coord::parse("q1").position(3), 1u);
  EXPECT_EQ(Coord::parse("a2").position(3), 4u);
  EXPECT_EQ(Coord::parse("q_prev").position(3), 3u);
  EXPECT_EQ(Coord::parse("a_prev").position(3), 4u);
  EXPECT_THROW(Coord::parse("a3").position(3), ParameterError);
  EXPECT_THROW(Coord::parse("q_prev").position(1), ParameterError);
  EXPECT_THROW(Coord::parse("z"), ParseError);
  for (auto s : {"x", "q_prev", "a_prev", "q4", "a7"}) EXPECT_EQ(Coord::parse(s).to_string(), s);
}

TEST(ChainRule, ValidatesStepArity) {
  EXPECT_THROW(ChainRule(MetricSpace::real_line(), {ChainRuleStep::copy(Coord::a_prev())}), ParameterError);
  EXPECT_THROW(ChainRule(MetricSpace::real_line(),
                         {ChainRuleStep::constant(R(0)), ChainRuleStep::copy(Coord::q(2))}),
               ParameterError);
}

TEST(IsRecoverable, SpecExamples) {
  EXPECT_TRUE(is_recoverable(build_multiplication_chain_rule(), AnswerMap::arith_eval(),
                             Point::expr("7" + kDot + "26"), 0.0));
  for (double x : {-3.0, 0.0, 2.5})
    EXPECT_TRUE(is_recoverable(prompt_rule(4), AnswerMap::affine(-1.5, 2), R(x)));
  auto s = omr_instance(3, 3, 10);
  auto t = run_trajectory(s.rule, s.g, R(0.5));
  EXPECT_DOUBLE_EQ(t.final_answer().value(), 3.5);
  EXPECT_FALSE(is_recoverable(s.rule, s.g, R(0.5)));
}

TEST(TrajectoryDivergence, EqualMapsGiveZero) {
  auto s = random_stable_instance(17);
  auto d = trajectory_divergence(s.rule, s.f, s.f, s.nu.support()[0]);
  for (double v : d.delta) EXPECT_EQ(v, 0.0);
  for (double v : d.gamma) EXPECT_EQ(v, 0.0);
}

TEST(TrajectoryDivergence, SpikeInstance) {
  auto s = nfl_instance(1, 2, 1, 0.1);
  auto d = trajectory_divergence(s.rule, s.f, s.g, R(0));
  EXPECT_EQ(d.delta[0], 0.0);
  EXPECT_NEAR(d.delta[1], 0.005, 1e-15);
  EXPECT_NEAR(d.gamma[1], 20.0, 1e-12);
}

TEST(TrajectoryDivergence, TightInstance) {
  auto s = tight_instance(3, 2, 1, 1);
  auto d = trajectory_divergence(s.rule, s.f, s.g, R(30));
  EXPECT_NEAR(d.delta[2], 2.0, 1e-12);
}

TEST(Chain, PrefixProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = random_stable_instance(seed);
    const auto& x = s.nu.support()[0];
    auto full = run_trajectory(s.rule, s.f, x);
    for (int k = 1; k <= s.rule.K(); ++k) {
      auto part = run_trajectory(s.rule.truncated(k), s.f, x);
      for (int i = 0; i < k; ++i) {
        EXPECT_EQ(part.questions[i], full.questions[i]);
        EXPECT_EQ(part.answers[i], full.answers[i]);
      }
    }
  }
}

TEST(Chain, Deterministic) {
  auto s = random_stable_instance(99);
  for (const auto& x : s.nu.support()) {
    auto a = run_trajectory(s.rule, s.g, x), b = run_trajectory(s.rule, s.g, x);
    EXPECT_EQ(a.questions, b.questions);
    EXPECT_EQ(a.answers, b.answers);
  }
}

TEST(Chain, DivergenceRecursion) {
  // Gamma_k <= phi Delta_k + d(f,g) and Delta_k <= delta max_{i<k} max(Delta_i, Gamma_i).
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto s = random_stable_instance(seed);
    const double phi = s.parameter("phi"), delta = s.parameter("delta"), dfg = s.parameter("dfg");
    std::mt19937_64 rng(seed);
    std::vector<Point> prompts = s.nu.support();
    for (int i = 0; i < 5; ++i) prompts.push_back(R(std::uniform_real_distribution<double>(-3, 3)(rng)));
    for (const auto& x : prompts) {
      // Off the support g agrees with its base map, so d(f,g) is still the sup over the table.
      auto d = trajectory_divergence(s.rule, s.f, s.g, x);
      double running = 0;
      for (std::size_t k = 0; k < d.delta.size(); ++k) {
        const double tol = 1e-9 * (1 + std::abs(d.delta[k]) + std::abs(d.gamma[k]));
        EXPECT_LE(d.gamma[k], phi * d.delta[k] + dfg + tol);
        if (k > 0) EXPECT_LE(d.delta[k], delta * running + tol);
        running = std::max({running, d.delta[k], d.gamma[k]});
      }
    }
  }
}

TEST(Chain, FirstQuestionsAgree) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = random_stable_instance(seed);
    for (int i = 0; i < 50; ++i) {
      auto x = R(std::uniform_real_distribution<double>(-4, 4)(rng));
      EXPECT_EQ(trajectory_divergence(s.rule, s.f, s.g, x).delta[0], 0.0);
    }
  }
}

TEST(AnswerMap, PiecewiseAffine) {
  auto m = AnswerMap::piecewise_affine({{0, 1}, {1, 0}, {3, 4}});
  EXPECT_EQ(m(R(-5)), R(1));
  EXPECT_EQ(m(R(0.5)), R(0.5));
  EXPECT_EQ(m(R(2)), R(2));
  EXPECT_EQ(m(R(10)), R(4));
  EXPECT_DOUBLE_EQ(m.certificate()->total, 2.0);
  EXPECT_THROW(AnswerMap::piecewise_affine({{0, 0}, {0, 1}}), ParameterError);
}

TEST(AnswerMap, ExceptionsDropTheCertificate) {
  auto m = AnswerMap::affine(2, 0);
  EXPECT_TRUE(m.certificate());
  EXPECT_FALSE(m.with_exception(R(1), R(0)).certificate());
  EXPECT_EQ(m.with_exception(R(1), R(0))(R(1)), R(0));
  EXPECT_EQ(m.with_exception(R(1), R(0))(R(1.5)), R(3));
}

TEST(ChainRuleStep, BranchOnEqualIsExact) {
  auto st = ChainRuleStep::branch_on_equal(Coord::a_prev(), R(0), R(1), R(7));
  std::vector<Point> args{R(0), R(0), R(0)};
  EXPECT_EQ(st(args), R(1));
  args[2] = R(1e-300);
  EXPECT_EQ(st(args), R(7));
  EXPECT_FALSE(st.certificate(2));
}

TEST(ChainRuleStep, AffinePivotIsExactAtPivot) {
  auto st = ChainRuleStep::affine_coord(Coord::q_prev(), 3, 40, 0.1 + 0.2);
  std::vector<Point> args{R(0), R(0.1 + 0.2), R(0)};
  EXPECT_EQ(st(args), R(40));
}
