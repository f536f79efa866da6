#pragma once

// One-digit-by-two-digit multiplication as a four-step chain rule over
// expression strings: d1·(10 d2 + d3) is reduced to d1·d2, 10·a1, d1·d3 and
// a2+a3.

#include <string>
#include <vector>

#include "cotlab/chain.hpp"
#include "cotlab/expr.hpp"
#include "cotlab/risk.hpp"
#include "cotlab/scenario.hpp"

namespace cotlab {

/// Exact decimal value of a number, sum or product; bare numbers are returned
/// unchanged. Throws ParseError on malformed input.
inline std::string ground_truth_eval(const std::string& e) { return expr::evaluate(e); }

inline ChainRule build_multiplication_chain_rule() {
  return ChainRule(MetricSpace::discrete(PointKind::Expr),
                   {ChainRuleStep::arith_tens_product(), ChainRuleStep::arith_scale_ten(),
                    ChainRuleStep::arith_units_product(), ChainRuleStep::arith_sum_answers()});
}

inline std::string family_expression(int d1, int d2, int d3) {
  return std::to_string(d1) + std::string(expr::kTimes) + std::to_string(10 * d2 + d3);
}

/// True for "d1·d2d3" with single digits d1, d3 and d2 in 1..9.
inline bool in_family(const std::string& text) {
  if (!expr::is_valid(text)) return false;
  return detail::mul_digits(Point::expr(text)).has_value();
}

struct ArithCase {
  std::string prompt;
  std::string expected;
  std::string final_answer;
  bool recoverable = false;
};

struct ArithReport {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::vector<ArithCase> cases;

  bool all_passed() const noexcept { return total > 0 && passed == total; }
};

/// Runs the g-trajectory of a family member and compares A^(4) with the
/// ground truth by exact string equality.
inline ArithCase check_family_member(const ChainRule& rule, const std::string& prompt) {
  auto t = run_trajectory(rule, AnswerMap::arith_eval(), Point::expr(prompt));
  ArithCase c{prompt, ground_truth_eval(prompt), t.final_answer().text(), false};
  c.recoverable = c.final_answer == c.expected;
  return c;
}

/// All 900 members d1 in 0..9, d2 in 1..9, d3 in 0..9.
inline ArithReport family_recoverability_report() {
  const auto rule = build_multiplication_chain_rule();
  ArithReport r;
  for (int d1 = 0; d1 <= 9; ++d1)
    for (int d2 = 1; d2 <= 9; ++d2)
      for (int d3 = 0; d3 <= 9; ++d3) {
        auto c = check_family_member(rule, family_expression(d1, d2, d3));
        ++r.total;
        r.passed += c.recoverable ? 1 : 0;
        r.cases.push_back(std::move(c));
      }
  return r;
}

/// Scenario form: f = g = the exact evaluator, 0-1 loss, nu uniform on the
/// family. Every risk is zero and every support point recoverable.
inline Scenario arith_scenario() {
  auto rule = build_multiplication_chain_rule();
  std::vector<Point> family;
  for (int d1 = 0; d1 <= 9; ++d1)
    for (int d2 = 1; d2 <= 9; ++d2)
      for (int d3 = 0; d3 <= 9; ++d3) family.push_back(Point::expr(family_expression(d1, d2, d3)));
  Expectations ex{0.0, 0.0, 0.0, 0.0, std::nullopt, true, true};
  return Scenario{"arith",
                  "arith",
                  {},
                  QuasimetricLoss::indicator(rule.space(), 1.0),
                  AnswerMap::arith_eval(),
                  AnswerMap::arith_eval(),
                  rule,
                  FiniteDistribution::uniform(std::move(family)),
                  {},
                  ex,
                  std::nullopt,
                  {},
                  {},
                  std::nullopt};
}

}  // namespace cotlab
