#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cotlab/spaces.hpp"

using namespace cotlab;

namespace {

Point R(double v) { return Point::real(v); }

std::vector<Point> reals(std::initializer_list<double> vs) {
  std::vector<Point> out;
  for (double v : vs) out.push_back(R(v));
  return out;
}

}  // namespace

TEST(Point, RejectsNonFinite) {
  EXPECT_THROW(Point::real(std::nan("")), DomainError);
  EXPECT_THROW(Point::real(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_NO_THROW(Point::real(-1e300));
}

TEST(Point, ExprGrammar) {
  EXPECT_NO_THROW(Point::expr("7\xC2\xB7" "26"));
  EXPECT_NO_THROW(Point::expr("140+42"));
  EXPECT_NO_THROW(Point::expr("182"));
  EXPECT_THROW(Point::expr("+42"), DomainError);
  EXPECT_THROW(Point::expr("1+2+3"), DomainError);
  EXPECT_THROW(Point::expr(""), DomainError);
  EXPECT_THROW(Point::expr("1*2"), DomainError);
}

TEST(Point, KindsAreDistinct) {
  EXPECT_NE(Point::expr("1"), Point::atom("1"));
  EXPECT_NE(Point::real(1), Point::expr("1"));
}

TEST(MetricSpace, DiscreteMetricOnStrings) {
  auto s = MetricSpace::discrete(PointKind::Expr);
  EXPECT_EQ(s.distance(Point::expr("12"), Point::expr("12")), 0.0);
  EXPECT_EQ(s.distance(Point::expr("12"), Point::expr("3+9")), 1.0);
  EXPECT_THROW(s.distance(R(1), Point::expr("1")), DomainError);
}

TEST(MetricSpace, IntervalMembership) {
  auto s = MetricSpace::real_interval(0, 2);
  EXPECT_TRUE(s.contains(R(2)));
  EXPECT_FALSE(s.contains(R(2.0000001)));
  EXPECT_THROW(MetricSpace::real_interval(1, 0), ParameterError);
}

TEST(LossEval, SpecExamples) {
  auto line = MetricSpace::real_line();
  EXPECT_EQ(QuasimetricLoss::scaled_metric(line, 2.0 / 2)(R(3), R(3)), 0.0);
  EXPECT_DOUBLE_EQ(QuasimetricLoss::capped_metric(line, 0.05, 1)(R(20), R(0)), 1.0);
  EXPECT_EQ(QuasimetricLoss::indicator(line, 5)(R(0.001), R(0)), 5.0);
  EXPECT_THROW(loss_eval(QuasimetricLoss::scaled_metric(line, 1), R(0), Point::expr("0")), DomainError);
}

TEST(LossFromMetricCapped, SpecExamples) {
  auto line = MetricSpace::real_line();
  auto l = loss_from_metric_capped(line, 0.05, 1);
  EXPECT_DOUBLE_EQ(l(R(20), R(0)), 1.0);
  EXPECT_EQ(l(R(7.5), R(7.5)), 0.0);
  auto l3 = loss_from_metric_capped(line, 1, 3);
  for (double x : {0.0, 0.5, 1.0, 17.0}) EXPECT_DOUBLE_EQ(l3(R(x + 3), R(x)), 3.0);
  EXPECT_THROW(loss_from_metric_capped(line, 1, 0), ParameterError);
  EXPECT_THROW(loss_from_metric_capped(line, 1, -1), ParameterError);
  EXPECT_THROW(loss_from_metric_capped(line, -1, 1), ParameterError);
}

TEST(LossFromMetricCapped, DominatedByScaleAndCap) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  auto line = MetricSpace::real_line();
  auto l = loss_from_metric_capped(line, 0.7, 4);
  for (int i = 0; i < 10000; ++i) {
    auto a = R(u(rng)), b = R(u(rng));
    EXPECT_LE(l(a, b), 0.7 * line.distance(a, b));
    EXPECT_LE(l(a, b), 4.0);
  }
}

TEST(CheckQuasimetric, SpecExamples) {
  auto line = MetricSpace::real_line();
  auto ok = check_quasimetric(QuasimetricLoss::scaled_metric(line, 1), reals({0, 1, 2}));
  EXPECT_TRUE(ok.pass);
  EXPECT_EQ(ok.max_triangle_violation, 0.0);
  EXPECT_EQ(ok.triples_checked, 27u);

  EXPECT_TRUE(check_quasimetric(QuasimetricLoss::indicator(line, 5), reals({0, 0.001, 1})).pass);

  auto bad = check_quasimetric(QuasimetricLoss::squared(line), reals({0, 1, 2}));
  EXPECT_FALSE(bad.pass);
  EXPECT_DOUBLE_EQ(bad.max_triangle_violation, 2.0);
  ASSERT_TRUE(bad.worst_triple);
  EXPECT_EQ((*bad.worst_triple)[0], 0u);
  EXPECT_EQ((*bad.worst_triple)[1], 2u);
  EXPECT_EQ((*bad.worst_triple)[2], 1u);

  EXPECT_THROW(check_quasimetric(QuasimetricLoss::scaled_metric(line, 1), {}), ParameterError);
}

TEST(CheckStability, SpecExamples) {
  auto line = MetricSpace::real_line();
  std::vector<std::pair<PointTuple, PointTuple>> pairs;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 1000; ++i) pairs.push_back({{R(u(rng))}, {R(u(rng))}});

  TupleMap constant = [](std::span<const Point>) { return Point::real(1); };
  EXPECT_TRUE(check_stability(constant, StabilityCertificate::from_coords({0.0}), pairs, line, line).pass);

  const double phi = 1.7;
  TupleMap lin = [phi](std::span<const Point> a) { return Point::real(phi * a[0].value()); };
  EXPECT_TRUE(check_stability(lin, StabilityCertificate::from_coords({phi}), pairs, line, line).pass);

  // Spike hypothesis: f(x*) = Y = 20 and 0 nearby, certified at eps = 0.1.
  const double x_star = 0.005;
  TupleMap spike = [x_star](std::span<const Point> a) { return Point::real(a[0].value() == x_star ? 20.0 : 0.0); };
  std::vector<std::pair<PointTuple, PointTuple>> one{{{R(x_star)}, {R(x_star + 1e-6)}}};
  auto v = check_stability(spike, StabilityCertificate::from_coords({0.1}), one, line, line);
  EXPECT_FALSE(v.pass);
  EXPECT_NEAR(v.worst_margin, 0.1 * 1e-6 - 20.0, 1e-9);
}

TEST(CheckStability, ArityMismatchThrows) {
  auto line = MetricSpace::real_line();
  TupleMap id = [](std::span<const Point> a) { return a[0]; };
  std::vector<std::pair<PointTuple, PointTuple>> pairs{{{R(0), R(1)}, {R(1), R(1)}}};
  EXPECT_THROW(check_stability(id, StabilityCertificate::from_coords({1.0}), pairs, line, line), ParameterError);
}

TEST(StabilityCertificate, CoordsBoundedByTotal) {
  EXPECT_THROW(StabilityCertificate::make(2, 0.5, {0.3, 0.3}), ParameterError);
  EXPECT_THROW(StabilityCertificate::make(2, 1.0, {0.3}), ParameterError);
  EXPECT_THROW(StabilityCertificate::make(1, 1.0, {-0.1}), ParameterError);
  auto c = StabilityCertificate::from_coords({0.25, 0.5});
  EXPECT_EQ(c.arity, 2u);
  EXPECT_DOUBLE_EQ(c.total, 0.75);
}

TEST(Loss, LambdaStableLossBoundedByHalfLambdaRho) {
  // A lambda-stable loss vanishing on the diagonal satisfies l(u,v) <= (lambda/2) rho(u,v).
  auto line = MetricSpace::real_line();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (auto l : {QuasimetricLoss::scaled_metric(line, 0.8), QuasimetricLoss::capped_metric(line, 1.3, 2.0)}) {
    const double lambda = l.certificate()->total;
    for (int i = 0; i < 2000; ++i) {
      auto a = R(u(rng)), b = R(u(rng));
      EXPECT_LE(l(a, b), lambda / 2 * line.distance(a, b) + 1e-12);
    }
  }
}
