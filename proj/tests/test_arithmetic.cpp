#include <gtest/gtest.h>

#include "cotlab/arithmetic.hpp"
#include "cotlab/constructions.hpp"

using namespace cotlab;

namespace {

const std::string kDot = "\xC2\xB7";

std::vector<std::string> answers(const std::string& prompt) {
  auto t = run_trajectory(build_multiplication_chain_rule(), AnswerMap::arith_eval(), Point::expr(prompt));
  std::vector<std::string> out;
  for (const auto& a : t.answers) out.push_back(a.text());
  return out;
}

}  // namespace

TEST(GroundTruthEval, SpecExamples) {
  EXPECT_EQ(ground_truth_eval("140+42"), "182");
  EXPECT_EQ(ground_truth_eval("7"), "7");
  EXPECT_EQ(ground_truth_eval("10" + kDot + "14"), "140");
  EXPECT_THROW(ground_truth_eval("1++2"), ParseError);
  EXPECT_THROW(ground_truth_eval(""), ParseError);
}

TEST(GroundTruthEval, BigOperands) {
  EXPECT_EQ(ground_truth_eval("99999999999999999999+1"), "100000000000000000000");
  EXPECT_EQ(ground_truth_eval("123456789" + kDot + "987654321"), "121932631112635269");
  EXPECT_EQ(ground_truth_eval("0" + kDot + "000"), "0");
  EXPECT_EQ(ground_truth_eval("007+0"), "7");
}

TEST(GroundTruthEval, AgreesWithIntegerArithmetic) {
  for (int a = 0; a < 120; a += 7)
    for (int b = 0; b < 300; b += 13) {
      EXPECT_EQ(ground_truth_eval(std::to_string(a) + "+" + std::to_string(b)), std::to_string(a + b));
      EXPECT_EQ(ground_truth_eval(std::to_string(a) + kDot + std::to_string(b)), std::to_string(a * b));
    }
}

TEST(MultiplicationChainRule, SpecExamples) {
  EXPECT_EQ(answers("7" + kDot + "26"), (std::vector<std::string>{"14", "140", "42", "182"}));
  EXPECT_EQ(answers("4" + kDot + "23"), (std::vector<std::string>{"8", "80", "12", "92"}));
  EXPECT_EQ(answers("0" + kDot + "10").back(), "0");
}

TEST(MultiplicationChainRule, OffFamilyFallsBackToZero) {
  for (const std::string& p : std::vector<std::string>{"123+4", "12" + kDot + "34", "7" + kDot + "5", "7" + kDot + "05", "42"}) {
    auto t = run_trajectory(build_multiplication_chain_rule(), AnswerMap::arith_eval(), Point::expr(p));
    for (const auto& q : t.questions) EXPECT_EQ(q.text(), "0") << p;
  }
}

TEST(FamilyRecoverability, AllNineHundred) {
  auto r = family_recoverability_report();
  EXPECT_EQ(r.total, 900u);
  EXPECT_EQ(r.passed, 900u);
  EXPECT_TRUE(r.all_passed());
  for (const auto& c : r.cases) {
    EXPECT_TRUE(c.final_answer == "0" || c.final_answer.front() != '0') << c.prompt;
    auto t = run_trajectory(build_multiplication_chain_rule(), AnswerMap::arith_eval(), Point::expr(c.prompt));
    for (const auto& q : t.questions) EXPECT_NE(q.text(), "0") << c.prompt;
  }
}

TEST(FamilyRecoverability, Membership) {
  EXPECT_TRUE(in_family("7" + kDot + "26"));
  EXPECT_TRUE(in_family("0" + kDot + "10"));
  EXPECT_FALSE(in_family("123+4"));
  EXPECT_FALSE(in_family("7" + kDot + "5"));
  EXPECT_FALSE(in_family("7" + kDot + "100"));
  auto c = check_family_member(build_multiplication_chain_rule(), "7" + kDot + "26");
  EXPECT_TRUE(c.recoverable);
  EXPECT_EQ(c.final_answer, "182");
}

TEST(ArithScenario, VerifiesWithZeroRisks) {
  auto r = verify_scenario(arith_scenario());
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.risks.reasoning, 0.0);
  EXPECT_EQ(r.risks.omr, 0.0);
  EXPECT_TRUE(r.risks.recoverable);
}
