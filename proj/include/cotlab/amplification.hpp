#pragma once

// The amplification factor alpha_K(phi, delta) and the TMR / reasoning-risk
// bounds built on it.
//
// Three independent evaluators are provided:
//   * closed_form  - the four-branch piecewise definition,
//   * max_form     - max_{0<=m<=K-2} delta^{K-2-m} sum_{j<=m} (phi delta)^j,
//                    by direct summation (canonical, no removable singularity),
//   * word_oracle  - exhaustive search over words in {Q, A} of length <= K-1 of
//                    T_Q(z) = delta z, T_A(z) = delta (phi z + 1) from z = 0,
//                    whose maximum equals delta * alpha_K.
// All are templated on the scalar type so they can be evaluated in extended
// precision (e.g. boost::multiprecision) as well as in double.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/error.hpp"

namespace cotlab {

enum class Regime { Geometric, Linear, MixedGeometric, MixedLinear };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Geometric: return "geometric";
    case Regime::Linear: return "linear";
    case Regime::MixedGeometric: return "mixed-geometric";
    case Regime::MixedLinear: return "mixed-linear";
  }
  return "?";
}

inline constexpr double kUnitProductTol = 1e-12;
inline constexpr double kFloorSnapTol = 1e-12;
inline constexpr int kWordOracleMaxK = 22;

template <class Real = double>
struct AmplificationParams {
  int K = 2;
  Real phi = 0;
  Real delta = 0;
  Real lambda = 0;
  Real dfg = 0;
};

namespace detail {

// base^n with 0^0 = 1, by repeated multiplication.
template <class Real>
Real ipow(const Real& base, int n) {
  Real r = 1;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

template <class Real>
void check_amp_args(int K, const Real& phi, const Real& delta) {
  if (K < 2) throw ParameterError("amplification factor requires K >= 2, got " + std::to_string(K));
  if (!(phi >= 0) || !(delta >= 0)) throw ParameterError("phi and delta must be nonnegative");
}

template <class Real>
bool unit_product(const Real& phi, const Real& delta) {
  using std::abs;
  return abs(phi * delta - 1) <= Real(kUnitProductTol);
}

template <class Real>
bool mixed(const Real& phi, const Real& delta) {
  return phi < 1 && delta > 1;
}

// floor(v) with a snap to the nearest integer when within kFloorSnapTol.
inline long long snapped_floor(double v) {
  double r = std::round(v);
  if (std::abs(v - r) <= kFloorSnapTol) return static_cast<long long>(r);
  return static_cast<long long>(std::floor(v));
}

}  // namespace detail

template <class Real = double>
struct Breakpoints {
  std::optional<int> m;  // m_K, mixed regime with phi*delta != 1
  std::optional<int> n;  // n_K, mixed regime with phi*delta == 1
};

/// m_K / n_K of the mixed regime (phi < 1 < delta). Throws RegimeError
/// outside it.
template <class Real = double>
Breakpoints<Real> breakpoints(int K, const Real& phi, const Real& delta) {
  detail::check_amp_args(K, phi, delta);
  if (!detail::mixed(phi, delta)) throw RegimeError("breakpoints are defined only for phi < 1 < delta");
  Breakpoints<Real> b;
  const double p = static_cast<double>(phi), d = static_cast<double>(delta);
  if (detail::unit_product(phi, delta)) {
    long long fl = detail::snapped_floor(1.0 / (d - 1.0));
    b.n = static_cast<int>(std::min<long long>(K - 2, fl));
  } else if (phi == 0) {
    b.m = 0;
  } else {
    double arg = (d - 1.0) / (d * (1.0 - p));
    long long fl = detail::snapped_floor(std::log(arg) / std::log(p * d));
    b.m = static_cast<int>(std::min<long long>(K - 2, fl));
  }
  return b;
}

template <class Real = double>
struct ClosedForm {
  Real value;
  Regime regime;
};

template <class Real = double>
ClosedForm<Real> amplification_closed_form(int K, const Real& phi, const Real& delta) {
  detail::check_amp_args(K, phi, delta);
  const Real r = phi * delta;
  if (!detail::mixed(phi, delta)) {
    if (detail::unit_product(phi, delta)) return {Real(K - 1), Regime::Linear};
    return {(Real(1) - detail::ipow(r, K - 1)) / (Real(1) - r), Regime::Geometric};
  }
  auto b = breakpoints(K, phi, delta);
  if (b.n) return {detail::ipow(delta, K - 2 - *b.n) * Real(*b.n + 1), Regime::MixedLinear};
  return {detail::ipow(delta, K - 2 - *b.m) * (Real(1) - detail::ipow(r, *b.m + 1)) / (Real(1) - r),
          Regime::MixedGeometric};
}

template <class Real = double>
struct MaxForm {
  Real value;
  int argmax_m;
  std::vector<Real> candidates;  // b_m for m = 0..K-2
};

template <class Real = double>
MaxForm<Real> amplification_max_form(int K, const Real& phi, const Real& delta) {
  detail::check_amp_args(K, phi, delta);
  const Real r = phi * delta;
  MaxForm<Real> out{Real(0), 0, {}};
  for (int m = 0; m <= K - 2; ++m) {
    Real sum = 0;
    for (int j = 0; j <= m; ++j) sum += detail::ipow(r, j);
    Real b = detail::ipow(delta, K - 2 - m) * sum;
    out.candidates.push_back(b);
    if (m == 0 || b > out.value) {
      out.value = b;
      out.argmax_m = m;
    }
  }
  return out;
}

/// Canonical evaluator.
template <class Real = double>
Real amplification_factor(int K, const Real& phi, const Real& delta) {
  return amplification_max_form(K, phi, delta).value;
}

enum class Letter : char { Q = 'Q', A = 'A' };

template <class Real = double>
struct WordTrace {
  std::vector<Letter> word;
  Real value = 0;              // T_w(0)
  std::vector<Real> per_step;  // T_{w_1}(0), T_{w_2} T_{w_1}(0), ...
  std::uint64_t words_enumerated = 0;

  std::string word_string() const {
    std::string s;
    for (auto l : word) s.push_back(static_cast<char>(l));
    return s;
  }
};

template <class Real = double>
Real apply_letter(Letter l, const Real& z, const Real& phi, const Real& delta) {
  return l == Letter::Q ? delta * z : delta * (phi * z + Real(1));
}

/// Replays a word from z = 0; returns the intermediate values.
template <class Real = double>
std::vector<Real> replay_word(const std::vector<Letter>& word, const Real& phi, const Real& delta) {
  std::vector<Real> out;
  Real z = 0;
  for (auto l : word) {
    z = apply_letter(l, z, phi, delta);
    out.push_back(z);
  }
  return out;
}

/// C_{K-1} = max over all words w of length <= K-1 of T_w(0), by exhaustive
/// enumeration (including the empty word). Ties keep the first word found in
/// depth-first order with A explored before Q.
template <class Real = double>
WordTrace<Real> word_oracle(int K, const Real& phi, const Real& delta) {
  detail::check_amp_args(K, phi, delta);
  if (K > kWordOracleMaxK)
    throw ParameterError("word oracle enumeration is limited to K <= " + std::to_string(kWordOracleMaxK));
  const int max_len = K - 1;
  WordTrace<Real> best;
  best.words_enumerated = 1;  // empty word, value 0
  std::vector<Letter> word;
  std::vector<Real> values;

  auto visit = [&](auto&& self, const Real& z) -> void {
    if (static_cast<int>(word.size()) == max_len) return;
    for (Letter l : {Letter::A, Letter::Q}) {
      Real next = apply_letter(l, z, phi, delta);
      word.push_back(l);
      values.push_back(next);
      ++best.words_enumerated;
      if (next > best.value) {
        best.value = next;
        best.word = word;
        best.per_step = values;
      }
      self(self, next);
      word.pop_back();
      values.pop_back();
    }
  };
  visit(visit, Real(0));
  return best;
}

/// (lambda phi delta / 2) alpha_K(phi, delta) d(f, g).
template <class Real = double>
Real tmr_bound(const AmplificationParams<Real>& p) {
  if (!(p.lambda >= 0) || !(p.dfg >= 0)) throw ParameterError("lambda and d(f,g) must be nonnegative");
  return p.lambda * p.phi * p.delta / Real(2) * amplification_factor(p.K, p.phi, p.delta) * p.dfg;
}

template <class Real = double>
Real reasoning_risk_bound(const AmplificationParams<Real>& p, const Real& otr_value) {
  if (!(otr_value >= 0)) throw ParameterError("OTR must be nonnegative");
  return tmr_bound(p) + otr_value;
}

}  // namespace cotlab
