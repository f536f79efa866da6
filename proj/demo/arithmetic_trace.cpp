// Walks the multiplication chain rule on a few prompts.

#include <iostream>

#include "cotlab/arithmetic.hpp"

using namespace cotlab;

int main(int argc, char** argv) {
  std::vector<std::string> prompts{"7\xC2\xB7" "26", "4\xC2\xB7" "23", "9\xC2\xB7" "99"};
  if (argc > 1) prompts.assign(argv + 1, argv + argc);
  const auto rule = build_multiplication_chain_rule();
  for (const auto& p : prompts) {
    auto t = run_trajectory(rule, AnswerMap::arith_eval(), Point::expr(p));
    std::cout << "x=" << p << "\n";
    for (int k = 0; k < t.K(); ++k)
      std::cout << "  Q" << k + 1 << "=" << t.questions[k] << "  A" << k + 1 << "=" << t.answers[k] << "\n";
    std::cout << "  ground truth " << ground_truth_eval(p) << (is_recoverable(rule, AnswerMap::arith_eval(), t.prompt) ? ", recovered\n" : ", not recovered\n");
  }
  auto rep = family_recoverability_report();
  std::cout << "family " << rep.passed << "/" << rep.total << " recoverable\n";
}
