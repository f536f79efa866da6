#pragma once

// Bounding the OTR by source-domain quantities: empirical Rademacher
// complexity, the d^l_H divergence, the approximation term beta, and a
// seeded coverage experiment for the resulting high-probability bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cotlab/chain.hpp"
#include "cotlab/error.hpp"
#include "cotlab/risk.hpp"
#include "cotlab/scenario.hpp"
#include "cotlab/spaces.hpp"

namespace cotlab {

inline constexpr int kExhaustiveRademacherMaxM = 20;

class HypothesisClass {
 public:
  explicit HypothesisClass(std::vector<AnswerMap> members) : members_(std::move(members)) {
    if (members_.empty()) throw ParameterError("hypothesis class must be nonempty");
  }
  const std::vector<AnswerMap>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(const AnswerMap& h) const { return std::find(members_.begin(), members_.end(), h) != members_.end(); }

 private:
  std::vector<AnswerMap> members_;
};

struct LabeledSample {
  std::vector<Point> points;
  std::vector<Point> labels;

  LabeledSample(std::vector<Point> x, std::vector<Point> y) : points(std::move(x)), labels(std::move(y)) {
    if (points.empty()) throw ParameterError("labeled sample must be nonempty");
    if (points.size() != labels.size()) throw ParameterError("points and labels differ in length");
  }
  std::size_t size() const noexcept { return points.size(); }
};

struct RademacherMode {
  enum class Kind { Exhaustive, MonteCarlo } kind = Kind::Exhaustive;
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;

  static RademacherMode exhaustive() { return {}; }
  static RademacherMode monte_carlo(std::size_t n_draws, std::uint64_t seed) {
    if (n_draws == 0) throw ParameterError("Monte Carlo Rademacher needs at least one draw");
    return {Kind::MonteCarlo, n_draws, seed};
  }
  // Exhaustive when 2^m is small, Monte Carlo otherwise.
  static RademacherMode automatic(std::size_t m, std::uint64_t seed, std::size_t n_draws = 20000) {
    return m <= static_cast<std::size_t>(kExhaustiveRademacherMaxM) ? exhaustive() : monte_carlo(n_draws, seed);
  }
};

struct RademacherEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 in exhaustive mode
  std::size_t draws = 0;   // sign vectors averaged
  std::uint64_t seed = 0;
  bool exhaustive = true;
};

/// Realized values of a function class on a sample: one row per function,
/// one column per sample point.
using RealizedMatrix = std::vector<std::vector<double>>;

/// 2 E_sigma sup_gamma |(1/m) sum_i sigma_i gamma(S_i)|.
inline RademacherEstimate empirical_rademacher(const RealizedMatrix& realized, const RademacherMode& mode) {
  if (realized.empty() || realized.front().empty()) throw ParameterError("realized matrix must be nonempty");
  const std::size_t m = realized.front().size();
  for (const auto& row : realized)
    if (row.size() != m) throw ParameterError("realized matrix rows differ in length");

  auto sup_for = [&](const std::vector<int>& sigma) {
    double best = 0.0;
    for (const auto& row : realized) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += sigma[i] * row[i];
      best = std::max(best, std::abs(acc) / static_cast<double>(m));
    }
    return best;
  };

  RademacherEstimate est;
  std::vector<int> sigma(m);
  if (mode.kind == RademacherMode::Kind::Exhaustive) {
    if (m > static_cast<std::size_t>(kExhaustiveRademacherMaxM))
      throw ParameterError("exhaustive Rademacher enumeration is limited to m <= " +
                           std::to_string(kExhaustiveRademacherMaxM));
    const std::uint64_t n = std::uint64_t{1} << m;
    double acc = 0.0;
    for (std::uint64_t bits = 0; bits < n; ++bits) {
      for (std::size_t i = 0; i < m; ++i) sigma[i] = (bits >> i) & 1 ? 1 : -1;
      acc += sup_for(sigma);
    }
    est.value = 2.0 * acc / static_cast<double>(n);
    est.draws = static_cast<std::size_t>(n);
    return est;
  }

  std::mt19937_64 rng(mode.seed);
  std::bernoulli_distribution coin(0.5);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t d = 0; d < mode.n_draws; ++d) {
    for (std::size_t i = 0; i < m; ++i) sigma[i] = coin(rng) ? 1 : -1;
    const double v = 2.0 * sup_for(sigma);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(mode.n_draws);
  est.value = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * est.value * est.value) / (n - 1)) : 0.0;
  est.std_error = std::sqrt(var / n);
  est.draws = mode.n_draws;
  est.seed = mode.seed;
  est.exhaustive = false;
  return est;
}

/// Rows x -> l(h(x), y_i) for h in H (the class F_H on a labeled sample).
inline RealizedMatrix realize_loss_class(const HypothesisClass& H, const QuasimetricLoss& loss, const LabeledSample& S) {
  RealizedMatrix out;
  for (const auto& h : H.members()) {
    std::vector<double> row;
    for (std::size_t i = 0; i < S.size(); ++i) row.push_back(loss(h(S.points[i]), S.labels[i]));
    out.push_back(std::move(row));
  }
  return out;
}

/// Rows x -> l(h(x), h'(x)) for ordered pairs (h, h') in H^2 (the class L_H).
inline RealizedMatrix realize_pair_class(const HypothesisClass& H, const QuasimetricLoss& loss,
                                         const std::vector<Point>& sample) {
  RealizedMatrix out;
  for (const auto& h : H.members())
    for (const auto& hp : H.members()) {
      std::vector<double> row;
      for (const auto& x : sample) row.push_back(loss(h(x), hp(x)));
      out.push_back(std::move(row));
    }
  return out;
}

/// sup over ordered pairs (h, h') of |E_mu l(h,h') - E_nu l(h,h')|, including h = h'.
inline double dH_divergence(const QuasimetricLoss& loss, const HypothesisClass& H, const FiniteDistribution& mu,
                            const FiniteDistribution& nu) {
  double sup = 0.0;
  for (const auto& h : H.members())
    for (const auto& hp : H.members())
      sup = std::max(sup, std::abs(statistical_risk(h, hp, mu, loss) - statistical_risk(h, hp, nu, loss)));
  return sup;
}

namespace detail {

// Empirical measure with mass 1/m per draw; repeated draws share an atom.
inline FiniteDistribution empirical_exact(const std::vector<Point>& sample) {
  std::vector<Point> support;
  std::vector<double> mass;
  const double w = 1.0 / static_cast<double>(sample.size());
  for (const auto& x : sample) {
    auto it = std::find(support.begin(), support.end(), x);
    if (it == support.end()) {
      support.push_back(x);
      mass.push_back(w);
    } else {
      mass[static_cast<std::size_t>(it - support.begin())] += w;
    }
  }
  // Renormalize away accumulated rounding so the mass check is exact.
  double total = 0.0;
  for (double v : mass) total += v;
  for (double& v : mass) v /= total;
  return FiniteDistribution(std::move(support), std::move(mass));
}

}  // namespace detail

inline double empirical_dH(const QuasimetricLoss& loss, const HypothesisClass& H, const std::vector<Point>& S,
                           const std::vector<Point>& T) {
  if (S.empty() || S.size() != T.size()) throw ParameterError("empirical divergence needs samples of equal size m >= 1");
  return dH_divergence(loss, H, detail::empirical_exact(S), detail::empirical_exact(T));
}

/// min_h R_mu(g, h) + R_tau(h, g); the argument order follows the asymmetric
/// loss.
inline double beta_term(const HypothesisClass& H, const QuasimetricLoss& loss, const FiniteDistribution& mu,
                        const FiniteDistribution& tau, const AnswerMap& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : H.members())
    best = std::min(best, statistical_risk(g, h, mu, loss) + statistical_risk(h, g, tau, loss));
  return best;
}

/// 9 M sqrt(log(6/eps) / (2m)).
inline double deviation_term(double M, double eps, std::size_t m) {
  return 9.0 * M * std::sqrt(std::log(6.0 / eps) / (2.0 * static_cast<double>(m)));
}

struct BoundBreakdown {
  double empirical_risk = 0.0;      // R_S(f, g)
  double empirical_divergence = 0.0;  // d_H on (U, T)
  double rademacher_source = 0.0;   // r_S(F_H)
  double rademacher_u = 0.0;        // r_U(L_H)
  double rademacher_t = 0.0;        // r_T(L_H)
  double deviation = 0.0;
  double beta = 0.0;
  std::string beta_source;  // "population" or "supplied"
  double total = 0.0;
};

/// Right-hand side of the OTR bound for f in H. Pass `beta` to supply the
/// approximation term; otherwise `mu` and `tau` (population distributions)
/// and `g` are required to compute it.
inline BoundBreakdown otr_bound_rhs(const AnswerMap& f, const HypothesisClass& H, const QuasimetricLoss& loss,
                                    const LabeledSample& S, const std::vector<Point>& U, const std::vector<Point>& T,
                                    double eps, const RademacherMode& mode, std::optional<double> beta,
                                    const FiniteDistribution* mu = nullptr, const FiniteDistribution* tau = nullptr,
                                    const AnswerMap* g = nullptr) {
  if (!loss.cap()) throw ParameterError("the OTR bound needs a loss bounded by a cap M");
  if (!H.contains(f)) throw ParameterError("f must belong to the hypothesis class");
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
  const std::size_t m = S.size();
  if (U.size() != m || T.size() != m) throw ParameterError("S, U and T must have the same size m");

  BoundBreakdown b;
  for (std::size_t i = 0; i < m; ++i) b.empirical_risk += loss(f(S.points[i]), S.labels[i]);
  b.empirical_risk /= static_cast<double>(m);
  b.empirical_divergence = empirical_dH(loss, H, U, T);
  b.rademacher_source = empirical_rademacher(realize_loss_class(H, loss, S), mode).value;
  b.rademacher_u = empirical_rademacher(realize_pair_class(H, loss, U), mode).value;
  b.rademacher_t = empirical_rademacher(realize_pair_class(H, loss, T), mode).value;
  b.deviation = deviation_term(*loss.cap(), eps, m);
  if (beta) {
    b.beta = *beta;
    b.beta_source = "supplied";
  } else {
    if (!mu || !tau || !g) throw ParameterError("beta must be supplied or computable from mu, tau and g");
    b.beta = beta_term(H, loss, *mu, *tau, *g);
    b.beta_source = "population";
  }
  b.total = b.empirical_risk + b.empirical_divergence + b.rademacher_source + b.rademacher_u + b.rademacher_t +
            b.deviation + b.beta;
  return b;
}

/// Population inequality OTR <= R_mu(f, g) + d_H(mu, tau) + beta; returns the
/// slack (right side minus OTR).
inline double population_otr_slack(const AnswerMap& f, const AnswerMap& g, const HypothesisClass& H,
                                   const QuasimetricLoss& loss, const FiniteDistribution& mu,
                                   const FiniteDistribution& tau) {
  const double lhs = statistical_risk(f, g, tau, loss);
  const double rhs = statistical_risk(f, g, mu, loss) + dH_divergence(loss, H, mu, tau) + beta_term(H, loss, mu, tau, g);
  return rhs - lhs;
}

struct CoverageReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double frequency = 0.0;
  double eps = 0.0;
  std::vector<std::pair<std::string, double>> per_addend_means;
  std::uint64_t seed = 0;
  std::size_t m = 0;

  bool covered() const noexcept { return frequency <= eps; }
};

namespace detail {

inline std::vector<Point> draw(const FiniteDistribution& d, std::size_t m, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> pick(d.weights().begin(), d.weights().end());
  std::vector<Point> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(d.support()[pick(rng)]);
  return out;
}

}  // namespace detail

/// Seeded coverage experiment. mu is the scenario's source distribution (nu
/// when absent) and tau the oracle push-forward of nu. Each trial draws S ~ mu
/// (labeled by g), U ~ mu and T ~ tau, and counts a violation when some f in
/// H has exact OTR above its bound.
inline CoverageReport bound_experiment(const Scenario& s, std::size_t m, std::size_t trials, double eps,
                                       std::uint64_t seed) {
  if (trials == 0) throw ParameterError("bound experiment needs at least one trial");
  if (m == 0) throw ParameterError("sample size m must be at least 1");
  if (s.hypotheses.empty()) throw ParameterError("scenario '" + s.name + "' has no hypothesis class");
  const HypothesisClass H(s.hypotheses);
  const FiniteDistribution& mu = s.source ? *s.source : s.nu;
  const FiniteDistribution tau = oracle_pushforward(s.rule, s.g, s.nu);
  const double beta = beta_term(H, s.loss, mu, tau, s.g);
  std::vector<double> otr_exact;
  for (const auto& f : H.members()) otr_exact.push_back(statistical_risk(f, s.g, tau, s.loss));

  CoverageReport rep;
  rep.trials = trials;
  rep.eps = eps;
  rep.seed = seed;
  rep.m = m;
  BoundBreakdown sums;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    auto xs = detail::draw(mu, m, rng);
    std::vector<Point> ys;
    for (const auto& x : xs) ys.push_back(s.g(x));
    LabeledSample S(xs, ys);
    auto U = detail::draw(mu, m, rng);
    auto T = detail::draw(tau, m, rng);
    const auto mode = RademacherMode::automatic(m, rng());
    bool violated = false;
    for (std::size_t i = 0; i < H.size(); ++i) {
      auto b = otr_bound_rhs(H.members()[i], H, s.loss, S, U, T, eps, mode, beta);
      violated = violated || otr_exact[i] > b.total;
      if (i == 0) {
        sums.empirical_risk += b.empirical_risk;
        sums.empirical_divergence += b.empirical_divergence;
        sums.rademacher_source += b.rademacher_source;
        sums.rademacher_u += b.rademacher_u;
        sums.rademacher_t += b.rademacher_t;
        sums.deviation += b.deviation;
        sums.beta += b.beta;
        sums.total += b.total;
      }
    }
    rep.violations += violated ? 1 : 0;
  }
  const double n = static_cast<double>(trials);
  rep.frequency = static_cast<double>(rep.violations) / n;
  rep.per_addend_means = {{"empirical_risk", sums.empirical_risk / n},
                          {"empirical_divergence", sums.empirical_divergence / n},
                          {"rademacher_source", sums.rademacher_source / n},
                          {"rademacher_u", sums.rademacher_u / n},
                          {"rademacher_t", sums.rademacher_t / n},
                          {"deviation", sums.deviation / n},
                          {"beta", sums.beta / n},
                          {"total", sums.total / n}};
  return rep;
}

/// Seeded random finite fixture for the population inequality: a real space
/// with 2-5 support points for mu and nu, a 1-4 member affine class that
/// contains f, a capped metric loss, and a one- or two-step oracle.
inline Scenario random_adaptation_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unif = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  auto space = MetricSpace::real_line();
  auto points = [&](int n) {
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < n) {
      auto p = Point::real(std::round(unif(-3.0, 3.0) * 8.0) / 8.0);
      if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    return pts;
  };
  auto weights = [&](std::size_t n) {
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w.emplace_back(unif(0.1, 1.0));
    for (double& v : w) v /= total;
    return w;
  };
  std::vector<AnswerMap> H;
  const int nh = pick(1, 4);
  for (int i = 0; i < nh; ++i) H.push_back(AnswerMap::affine(unif(-1.5, 1.5), unif(-1.0, 1.0)));
  auto g = AnswerMap::affine(unif(-1.5, 1.5), unif(-1.0, 1.0));
  std::vector<ChainRuleStep> steps{ChainRuleStep::affine_coord(Coord::prompt(), unif(-1.0, 1.0), unif(-1.0, 1.0))};
  if (pick(0, 1)) steps.push_back(ChainRuleStep::linear_combo(unif(-1.0, 1.0), {{Coord::a_prev(), unif(-1.0, 1.0)}}));
  ChainRule rule(space, std::move(steps));
  auto nu_pts = points(pick(2, 5));
  auto mu_pts = points(pick(2, 5));
  auto nu_w = weights(nu_pts.size());
  auto mu_w = weights(mu_pts.size());
  auto loss = QuasimetricLoss::capped_metric(space, unif(0.2, 2.0), unif(0.5, 3.0));
  return Scenario{"adaptation-random-" + std::to_string(seed),
                  "adaptation",
                  {},
                  loss,
                  H[static_cast<std::size_t>(pick(0, nh - 1))],
                  g,
                  rule,
                  FiniteDistribution(std::move(nu_pts), std::move(nu_w)),
                  {},
                  Expectations{},
                  std::nullopt,
                  {},
                  H,
                  FiniteDistribution(std::move(mu_pts), std::move(mu_w))};
}

}  // namespace cotlab
