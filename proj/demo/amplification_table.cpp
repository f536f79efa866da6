// Prints alpha_K(phi, delta) for a few regimes, with the maximizing word.

#include <cstdio>

#include "cotlab/amplification.hpp"

using namespace cotlab;

int main() {
  const double settings[][2] = {{0.5, 1.0}, {1.0, 1.0}, {0.5, 2.0}, {0.25, 2.0}, {2.0, 1.5}};
  std::printf("%4s %6s %6s %14s %16s  %s\n", "K", "phi", "delta", "alpha", "regime", "word");
  for (const auto& s : settings)
    for (int K : {2, 4, 8, 12}) {
      auto cf = amplification_closed_form(K, s[0], s[1]);
      auto w = word_oracle(K, s[0], s[1]);
      std::printf("%4d %6.2f %6.2f %14.6g %16s  %s\n", K, s[0], s[1], cf.value, to_string(cf.regime),
                  w.word_string().c_str());
    }
}
