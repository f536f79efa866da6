#pragma once

// Finite-support distributions, push-forwards, and exact evaluation of the
// reasoning risk and its TMR / OTR / OMR decomposition.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "cotlab/chain.hpp"
#include "cotlab/error.hpp"
#include "cotlab/point.hpp"
#include "cotlab/spaces.hpp"

namespace cotlab {

inline constexpr double kMassTol = 1e-12;

/// A probability distribution with finitely many atoms. Support points are
/// pairwise distinct (exact equality) and weights strictly positive.
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<Point> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty()) throw ParameterError("distribution support must be nonempty");
    if (support_.size() != weights_.size()) throw ParameterError("support and weights differ in length");
    for (double w : weights_)
      if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("weights must be positive and finite");
    if (std::abs(total_mass() - 1.0) > kMassTol) throw ParameterError("weights must sum to 1");
    for (std::size_t i = 0; i < support_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (support_[i] == support_[j]) throw ParameterError("support points must be distinct");
  }

  static FiniteDistribution dirac(Point x) { return FiniteDistribution({std::move(x)}, {1.0}); }

  // Uniform over a list of distinct points.
  static FiniteDistribution uniform(std::vector<Point> points) {
    std::vector<double> w(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
    return FiniteDistribution(std::move(points), std::move(w));
  }

  // Empirical distribution of a sample: each draw carries mass 1/m and
  // draws equal under `space` are merged.
  static FiniteDistribution empirical(std::span<const Point> sample, const MetricSpace& space) {
    if (sample.empty()) throw ParameterError("empirical distribution needs a nonempty sample");
    const double w = 1.0 / static_cast<double>(sample.size());
    return merged(std::vector<Point>(sample.begin(), sample.end()), std::vector<double>(sample.size(), w), space);
  }

  // Merges points equal under `space` (within its equality tolerance),
  // summing their weights; first occurrence keeps its position.
  static FiniteDistribution merged(std::vector<Point> points, std::vector<double> weights, const MetricSpace& space) {
    std::vector<Point> support;
    std::vector<double> mass;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t j = 0;
      while (j < support.size() && !space.equal(support[j], points[i])) ++j;
      if (j == support.size()) {
        support.push_back(points[i]);
        mass.push_back(weights[i]);
      } else {
        mass[j] += weights[i];
      }
    }
    return FiniteDistribution(std::move(support), std::move(mass));
  }

  const std::vector<Point>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return support_.size(); }

  double total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

  // Weighted sum of `term` over the support, in support order.
  template <class Fn>
  double expect(Fn&& term) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) acc += weights_[i] * term(support_[i]);
    return acc;
  }

  friend bool operator==(const FiniteDistribution&, const FiniteDistribution&) = default;

 private:
  std::vector<Point> support_;
  std::vector<double> weights_;
};

inline FiniteDistribution pushforward(const std::function<Point(const Point&)>& q, const FiniteDistribution& nu,
                                      const MetricSpace& space) {
  std::vector<Point> images;
  images.reserve(nu.size());
  for (const auto& x : nu.support()) images.push_back(q(x));
  return FiniteDistribution::merged(std::move(images), nu.weights(), space);
}

/// Q^(K)_{D_K,g} # nu.
inline FiniteDistribution oracle_pushforward(const ChainRule& rule, const AnswerMap& g, const FiniteDistribution& nu) {
  return pushforward([&](const Point& x) { return run_trajectory(rule, g, x).final_question(); }, nu, rule.space());
}

/// R_{mu,l}(f, g) = E_mu l(f(X), g(X)).
inline double statistical_risk(const AnswerMap& f, const AnswerMap& g, const FiniteDistribution& mu,
                               const QuasimetricLoss& loss) {
  return mu.expect([&](const Point& x) { return loss(f(x), g(x)); });
}

/// E_nu l(A^(K)_f(X), g(X)).
inline double reasoning_risk(const ChainRule& rule, const AnswerMap& f, const AnswerMap& g,
                             const FiniteDistribution& nu, const QuasimetricLoss& loss) {
  return nu.expect([&](const Point& x) { return loss(run_trajectory(rule, f, x).final_answer(), g(x)); });
}

/// E_nu l(f(Q^(K)_f(X)), f(Q^(K)_g(X))).
inline double tmr(const ChainRule& rule, const AnswerMap& f, const AnswerMap& g, const FiniteDistribution& nu,
                  const QuasimetricLoss& loss) {
  return nu.expect([&](const Point& x) {
    auto qf = run_trajectory(rule, f, x).final_question();
    auto qg = run_trajectory(rule, g, x).final_question();
    return loss(f(qf), f(qg));
  });
}

/// E_nu l(f(Q^(K)_g(X)), g(Q^(K)_g(X))).
inline double otr(const ChainRule& rule, const AnswerMap& f, const AnswerMap& g, const FiniteDistribution& nu,
                  const QuasimetricLoss& loss) {
  return nu.expect([&](const Point& x) {
    auto qg = run_trajectory(rule, g, x).final_question();
    return loss(f(qg), g(qg));
  });
}

/// E_nu l(g(Q^(K)_g(X)), g(X)).
inline double omr(const ChainRule& rule, const AnswerMap& g, const FiniteDistribution& nu,
                  const QuasimetricLoss& loss) {
  return nu.expect([&](const Point& x) {
    auto qg = run_trajectory(rule, g, x).final_question();
    return loss(g(qg), g(x));
  });
}

struct RiskReport {
  double reasoning = 0.0;
  double tmr = 0.0;
  double otr = 0.0;
  double omr = 0.0;
  double decomposition_slack = 0.0;  // tmr + otr - reasoning
  double three_term_slack = 0.0;     // tmr + otr + omr - reasoning
  bool recoverable = false;          // every support point is (D_K, g)-recoverable
  bool two_term_holds = true;        // reasoning <= tmr + otr + 1e-9, required only when recoverable
  bool three_term_holds = true;      // reasoning <= tmr + otr + omr + 1e-9

  bool ok() const noexcept { return three_term_holds && (!recoverable || two_term_holds); }
};

inline bool support_recoverable(const ChainRule& rule, const AnswerMap& g, const FiniteDistribution& nu) {
  for (const auto& x : nu.support())
    if (!is_recoverable(rule, g, x)) return false;
  return true;
}

inline RiskReport decomposition_check(const ChainRule& rule, const AnswerMap& f, const AnswerMap& g,
                                      const FiniteDistribution& nu, const QuasimetricLoss& loss) {
  RiskReport r;
  r.reasoning = reasoning_risk(rule, f, g, nu, loss);
  r.tmr = tmr(rule, f, g, nu, loss);
  r.otr = otr(rule, f, g, nu, loss);
  r.omr = omr(rule, g, nu, loss);
  r.decomposition_slack = r.tmr + r.otr - r.reasoning;
  r.three_term_slack = r.tmr + r.otr + r.omr - r.reasoning;
  r.recoverable = support_recoverable(rule, g, nu);
  r.two_term_holds = r.decomposition_slack >= -kEqualityTol;
  r.three_term_holds = r.three_term_slack >= -kEqualityTol;
  return r;
}

}  // namespace cotlab
