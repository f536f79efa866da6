#pragma once

// Answer maps, chain rules and CoT trajectories.
//
// A K-step chain rule D_K is a list of steps; step k maps the argument tuple
// (x, q_1, a_1, ..., q_{k-1}, a_{k-1}) of arity 2k-1 to the next question.
// Steps and answer maps are drawn from closed registries of parametric
// families so that every construction can be serialized and replayed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cotlab/error.hpp"
#include "cotlab/expr.hpp"
#include "cotlab/point.hpp"
#include "cotlab/spaces.hpp"

namespace cotlab {

// ---------------------------------------------------------------------------
// Answer maps

enum class MapFamily { Identity, Affine, Constant, Abs, PiecewiseAffine, ArithEval };

inline const char* to_string(MapFamily f) {
  switch (f) {
    case MapFamily::Identity: return "identity";
    case MapFamily::Affine: return "affine";
    case MapFamily::Constant: return "constant";
    case MapFamily::Abs: return "abs";
    case MapFamily::PiecewiseAffine: return "piecewise_affine";
    case MapFamily::ArithEval: return "arith_eval";
  }
  return "?";
}

using ExceptionTable = std::map<Point, Point, PointLess>;
using Knot = std::pair<double, double>;

/// A deterministic map X -> X: a base family plus an optional finite table of
/// exceptional points (matched by exact equality) that override the base.
class AnswerMap {
 public:
  static AnswerMap identity() { return AnswerMap(MapFamily::Identity); }

  static AnswerMap affine(double slope, double offset = 0.0) {
    if (!std::isfinite(slope) || !std::isfinite(offset)) throw ParameterError("affine map parameters must be finite");
    AnswerMap m(MapFamily::Affine);
    m.slope_ = slope;
    m.offset_ = offset;
    return m;
  }

  static AnswerMap constant(Point value) {
    AnswerMap m(MapFamily::Constant);
    m.value_ = std::move(value);
    return m;
  }

  static AnswerMap abs() { return AnswerMap(MapFamily::Abs); }

  // Linear interpolation between knots (strictly increasing abscissae),
  // constant extension outside the first/last knot.
  static AnswerMap piecewise_affine(std::vector<Knot> knots) {
    if (knots.empty()) throw ParameterError("piecewise map needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second))
        throw ParameterError("knots must be finite");
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw ParameterError("knot abscissae must be strictly increasing");
    }
    AnswerMap m(MapFamily::PiecewiseAffine);
    m.knots_ = std::move(knots);
    return m;
  }

  static AnswerMap arith_eval() { return AnswerMap(MapFamily::ArithEval); }

  AnswerMap with_exception(Point at, Point value) const {
    AnswerMap m = *this;
    m.exceptions_.insert_or_assign(std::move(at), std::move(value));
    return m;
  }

  Point operator()(const Point& x) const {
    if (auto it = exceptions_.find(x); it != exceptions_.end()) return it->second;
    switch (family_) {
      case MapFamily::Identity: return x;
      case MapFamily::Constant: return *value_;
      case MapFamily::Affine: return Point::real(slope_ * x.value() + offset_);
      case MapFamily::Abs: return Point::real(std::abs(x.value()));
      case MapFamily::PiecewiseAffine: return Point::real(interpolate(x.value()));
      case MapFamily::ArithEval:
        if (x.kind() != PointKind::Expr) throw DomainError("arith_eval needs an expression point");
        return Point::expr(expr::evaluate(x.text()));
    }
    return x;
  }

  Point eval(const Point& x) const { return (*this)(x); }

  MapFamily family() const noexcept { return family_; }
  double slope() const noexcept { return slope_; }
  double offset() const noexcept { return offset_; }
  const std::optional<Point>& constant_value() const noexcept { return value_; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }
  const ExceptionTable& exceptions() const noexcept { return exceptions_; }

  // Lipschitz constant of the base family on the real line; none when an
  // exception table is present (isolated overrides are not Lipschitz) or the
  // family lives on a discrete space.
  std::optional<StabilityCertificate> certificate() const {
    if (!exceptions_.empty()) return std::nullopt;
    switch (family_) {
      case MapFamily::Identity:
      case MapFamily::Abs: return StabilityCertificate::from_coords({1.0});
      case MapFamily::Constant: return StabilityCertificate::from_coords({0.0});
      case MapFamily::Affine: return StabilityCertificate::from_coords({std::abs(slope_)});
      case MapFamily::PiecewiseAffine: {
        double worst = 0.0;
        for (std::size_t i = 1; i < knots_.size(); ++i)
          worst = std::max(worst, std::abs((knots_[i].second - knots_[i - 1].second) /
                                           (knots_[i].first - knots_[i - 1].first)));
        return StabilityCertificate::from_coords({worst});
      }
      case MapFamily::ArithEval: break;
    }
    return std::nullopt;
  }

  friend bool operator==(const AnswerMap&, const AnswerMap&) = default;

 private:
  explicit AnswerMap(MapFamily family) : family_(family) {}

  double interpolate(double x) const {
    if (x <= knots_.front().first) return knots_.front().second;
    if (x >= knots_.back().first) return knots_.back().second;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.first; });
    auto lo = hi - 1;
    if (x == lo->first) return lo->second;
    return lo->second + (hi->second - lo->second) * (x - lo->first) / (hi->first - lo->first);
  }

  MapFamily family_;
  double slope_ = 0.0;
  double offset_ = 0.0;
  std::optional<Point> value_;
  std::vector<Knot> knots_;
  ExceptionTable exceptions_;
};

// ---------------------------------------------------------------------------
// Coordinates of the step argument tuple (x, q_1, a_1, ..., q_{k-1}, a_{k-1})

struct Coord {
  enum class Role { Prompt, Question, Answer };
  Role role = Role::Prompt;
  int index = 0;  // 1-based step index, or 0 for "previous step"

  static Coord prompt() { return {Role::Prompt, 0}; }
  static Coord q_prev() { return {Role::Question, 0}; }
  static Coord a_prev() { return {Role::Answer, 0}; }
  static Coord q(int i) { return {Role::Question, i}; }
  static Coord a(int i) { return {Role::Answer, i}; }

  // "x", "q_prev", "a_prev", "q<i>", "a<i>"
  static Coord parse(const std::string& s) {
    if (s == "x") return prompt();
    if (s == "q_prev") return q_prev();
    if (s == "a_prev") return a_prev();
    if (s.size() >= 2 && (s[0] == 'q' || s[0] == 'a') && expr::is_number(std::string_view(s).substr(1))) {
      int i = std::stoi(s.substr(1));
      if (i >= 1) return {s[0] == 'q' ? Role::Question : Role::Answer, i};
    }
    throw ParseError("unknown coordinate '" + s + "'");
  }

  std::string to_string() const {
    if (role == Role::Prompt) return "x";
    std::string r = role == Role::Question ? "q" : "a";
    return index == 0 ? r + "_prev" : r + std::to_string(index);
  }

  // Position in the argument tuple of step k (1-based).
  std::size_t position(int k) const {
    if (role == Role::Prompt) return 0;
    int i = index == 0 ? k - 1 : index;
    if (i < 1 || i > k - 1)
      throw ParameterError("coordinate " + to_string() + " is not available at step " + std::to_string(k));
    return static_cast<std::size_t>(role == Role::Question ? 2 * i - 1 : 2 * i);
  }

  friend bool operator==(const Coord&, const Coord&) = default;
};

// ---------------------------------------------------------------------------
// Chain-rule steps

enum class StepFamily {
  Constant,
  Copy,
  AffineCoord,
  LinearCombo,
  BranchOnEqual,
  ArithTensProduct,
  ArithScaleTen,
  ArithUnitsProduct,
  ArithSumAnswers,
};

inline const char* to_string(StepFamily f) {
  switch (f) {
    case StepFamily::Constant: return "constant";
    case StepFamily::Copy: return "copy";
    case StepFamily::AffineCoord: return "affine_coord";
    case StepFamily::LinearCombo: return "linear_combo";
    case StepFamily::BranchOnEqual: return "branch_on_equal";
    case StepFamily::ArithTensProduct: return "arith_tens_product";
    case StepFamily::ArithScaleTen: return "arith_scale_ten";
    case StepFamily::ArithUnitsProduct: return "arith_units_product";
    case StepFamily::ArithSumAnswers: return "arith_sum_answers";
  }
  return "?";
}

namespace detail {

// Digits (d1, d2, d3) of a prompt "d1·(10 d2 + d3)" with d2 != 0.
struct MulDigits {
  char d1, d2, d3;
};

inline std::optional<MulDigits> mul_digits(const Point& x) {
  if (x.kind() != PointKind::Expr) return std::nullopt;
  auto p = expr::parse(x.text());
  if (!p || p->op != expr::Op::Mul || p->lhs.size() != 1 || p->rhs.size() != 2 || p->rhs[0] == '0')
    return std::nullopt;
  return MulDigits{p->lhs[0], p->rhs[0], p->rhs[1]};
}

inline bool is_number_point(const Point& p) { return p.kind() == PointKind::Expr && expr::is_number(p.text()); }

inline Point zero_expr() { return Point::expr("0"); }

}  // namespace detail

struct Term {
  Coord coord;
  double coef;
  friend bool operator==(const Term&, const Term&) = default;
};

class ChainRuleStep {
 public:
  static ChainRuleStep constant(Point value) {
    ChainRuleStep s(StepFamily::Constant);
    s.points_ = {std::move(value)};
    return s;
  }

  static ChainRuleStep copy(Coord c) {
    ChainRuleStep s(StepFamily::Copy);
    s.terms_ = {{c, 1.0}};
    return s;
  }

  // offset + slope * (coord - pivot). A nonzero pivot lets a step map a
  // designated point to `offset` exactly, without cancellation error.
  static ChainRuleStep affine_coord(Coord c, double slope, double offset, double pivot = 0.0) {
    if (!std::isfinite(slope) || !std::isfinite(offset) || !std::isfinite(pivot))
      throw ParameterError("affine step parameters must be finite");
    ChainRuleStep s(StepFamily::AffineCoord);
    s.terms_ = {{c, slope}};
    s.offset_ = offset;
    s.pivot_ = pivot;
    return s;
  }

  // offset + sum_j coef_j * coord_j
  static ChainRuleStep linear_combo(double offset, std::vector<Term> terms) {
    if (!std::isfinite(offset)) throw ParameterError("linear_combo offset must be finite");
    for (const auto& t : terms)
      if (!std::isfinite(t.coef)) throw ParameterError("linear_combo coefficients must be finite");
    ChainRuleStep s(StepFamily::LinearCombo);
    s.terms_ = std::move(terms);
    s.offset_ = offset;
    return s;
  }

  // if_equal when coord == match (exact), otherwise `otherwise`.
  static ChainRuleStep branch_on_equal(Coord c, Point match, Point if_equal, Point otherwise) {
    ChainRuleStep s(StepFamily::BranchOnEqual);
    s.terms_ = {{c, 0.0}};
    s.points_ = {std::move(match), std::move(if_equal), std::move(otherwise)};
    return s;
  }

  static ChainRuleStep arith_tens_product() { return ChainRuleStep(StepFamily::ArithTensProduct); }
  static ChainRuleStep arith_scale_ten() { return ChainRuleStep(StepFamily::ArithScaleTen); }
  static ChainRuleStep arith_units_product() { return ChainRuleStep(StepFamily::ArithUnitsProduct); }
  static ChainRuleStep arith_sum_answers() { return ChainRuleStep(StepFamily::ArithSumAnswers); }

  StepFamily family() const noexcept { return family_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  double offset() const noexcept { return offset_; }
  double pivot() const noexcept { return pivot_; }

  // Throws if the step cannot be placed at position k of a chain rule.
  void validate(int k) const {
    if (k < 1) throw ParameterError("step index must be positive");
    for (const auto& t : terms_) (void)t.coord.position(k);
    auto fixed = [&](int want) {
      if (k != want)
        throw ParameterError(std::string(to_string(family_)) + " is only defined at step " + std::to_string(want));
    };
    switch (family_) {
      case StepFamily::ArithTensProduct: fixed(1); break;
      case StepFamily::ArithScaleTen: fixed(2); break;
      case StepFamily::ArithUnitsProduct: fixed(3); break;
      case StepFamily::ArithSumAnswers: fixed(4); break;
      default: break;
    }
  }

  Point operator()(std::span<const Point> args) const {
    if (args.size() % 2 == 0) throw ParameterError("step argument tuple must have odd arity 2k-1");
    const int k = static_cast<int>((args.size() + 1) / 2);
    auto at = [&](const Coord& c) -> const Point& { return args[c.position(k)]; };
    switch (family_) {
      case StepFamily::Constant: return points_[0];
      case StepFamily::Copy: return at(terms_[0].coord);
      case StepFamily::AffineCoord:
        return Point::real(offset_ + terms_[0].coef * (at(terms_[0].coord).value() - pivot_));
      case StepFamily::LinearCombo: {
        double v = offset_;
        for (const auto& t : terms_) v += t.coef * at(t.coord).value();
        return Point::real(v);
      }
      case StepFamily::BranchOnEqual: return at(terms_[0].coord) == points_[0] ? points_[1] : points_[2];
      case StepFamily::ArithTensProduct:
      case StepFamily::ArithUnitsProduct: {
        auto d = detail::mul_digits(args[0]);
        if (!d) return detail::zero_expr();
        char other = family_ == StepFamily::ArithTensProduct ? d->d2 : d->d3;
        return Point::expr(expr::make(std::string(1, d->d1), expr::Op::Mul, std::string(1, other)));
      }
      case StepFamily::ArithScaleTen: {
        if (!detail::mul_digits(args[0]) || !detail::is_number_point(args[2])) return detail::zero_expr();
        return Point::expr(expr::make("10", expr::Op::Mul, args[2].text()));
      }
      case StepFamily::ArithSumAnswers: {
        if (!detail::mul_digits(args[0]) || !detail::is_number_point(args[4]) || !detail::is_number_point(args[6]))
          return detail::zero_expr();
        return Point::expr(expr::make(args[4].text(), expr::Op::Add, args[6].text()));
      }
    }
    return args[0];
  }

  Point eval(std::span<const Point> args) const { return (*this)(args); }

  // Natural coordinate-wise certificate at position k (arity 2k-1). None for
  // the discontinuous branch step and the string-manipulating steps.
  std::optional<StabilityCertificate> certificate(int k) const {
    std::vector<double> coords(static_cast<std::size_t>(2 * k - 1), 0.0);
    switch (family_) {
      case StepFamily::Constant: break;
      case StepFamily::Copy:
      case StepFamily::AffineCoord:
      case StepFamily::LinearCombo:
        for (const auto& t : terms_) coords[t.coord.position(k)] += std::abs(t.coef);
        break;
      default: return std::nullopt;
    }
    return StabilityCertificate::from_coords(std::move(coords));
  }

  friend bool operator==(const ChainRuleStep&, const ChainRuleStep&) = default;

 private:
  explicit ChainRuleStep(StepFamily family) : family_(family) {}

  StepFamily family_;
  std::vector<Term> terms_;
  std::vector<Point> points_;
  double offset_ = 0.0;
  double pivot_ = 0.0;
};

/// A K-step chain rule over a representation space.
class ChainRule {
 public:
  ChainRule(MetricSpace space, std::vector<ChainRuleStep> steps) : space_(std::move(space)), steps_(std::move(steps)) {
    if (steps_.empty()) throw ParameterError("a chain rule needs at least one step");
    for (std::size_t i = 0; i < steps_.size(); ++i) steps_[i].validate(static_cast<int>(i + 1));
  }

  int K() const noexcept { return static_cast<int>(steps_.size()); }
  const MetricSpace& space() const noexcept { return space_; }
  const std::vector<ChainRuleStep>& steps() const noexcept { return steps_; }
  // 1-based.
  const ChainRuleStep& step(int k) const { return steps_.at(static_cast<std::size_t>(k - 1)); }

  ChainRule truncated(int k) const {
    if (k < 1 || k > K()) throw ParameterError("truncation length out of range");
    return ChainRule(space_, std::vector<ChainRuleStep>(steps_.begin(), steps_.begin() + k));
  }

  friend bool operator==(const ChainRule&, const ChainRule&) = default;

 private:
  MetricSpace space_;
  std::vector<ChainRuleStep> steps_;
};

/// (x, Q^(1), A^(1), ..., Q^(K), A^(K)).
struct Trajectory {
  Point prompt;
  std::vector<Point> questions;
  std::vector<Point> answers;

  int K() const noexcept { return static_cast<int>(questions.size()); }
  const Point& final_question() const { return questions.back(); }
  const Point& final_answer() const { return answers.back(); }

  bool consistent_with(const AnswerMap& f) const {
    if (questions.size() != answers.size()) return false;
    for (std::size_t k = 0; k < questions.size(); ++k)
      if (!(f(questions[k]) == answers[k])) return false;
    return true;
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline Trajectory run_trajectory(const ChainRule& rule, const AnswerMap& f, const Point& x) {
  const auto& space = rule.space();
  if (!space.contains(x)) throw DomainError("prompt " + x.to_string() + " is not in the " + space.id() + " space");
  std::vector<Point> args{x};
  args.reserve(static_cast<std::size_t>(2 * rule.K() + 1));
  Trajectory t{x, {}, {}};
  for (int k = 1; k <= rule.K(); ++k) {
    Point q = [&] {
      try {
        return rule.step(k)(args);
      } catch (const DomainError& e) {
        throw TrajectoryError(k, std::string("question evaluation failed: ") + e.what());
      }
    }();
    if (!space.contains(q)) throw TrajectoryError(k, "question " + q.to_string() + " left the space");
    Point a = [&] {
      try {
        return f(q);
      } catch (const DomainError& e) {
        throw TrajectoryError(k, std::string("answer evaluation failed: ") + e.what());
      }
    }();
    if (!space.contains(a)) throw TrajectoryError(k, "answer " + a.to_string() + " left the space");
    args.push_back(q);
    args.push_back(a);
    t.questions.push_back(std::move(q));
    t.answers.push_back(std::move(a));
  }
  return t;
}

inline bool is_recoverable(const ChainRule& rule, const AnswerMap& f, const Point& x, double eq_tol) {
  if (!(eq_tol >= 0.0)) throw ParameterError("equality tolerance must be nonnegative");
  auto t = run_trajectory(rule, f, x);
  return rule.space().distance(f(x), t.final_answer()) <= eq_tol;
}

inline bool is_recoverable(const ChainRule& rule, const AnswerMap& f, const Point& x) {
  return is_recoverable(rule, f, x, rule.space().equality_tolerance());
}

/// Delta_k = rho(Q^(k)_f, Q^(k)_g) and Gamma_k = rho(A^(k)_f, A^(k)_g).
struct DivergenceRecord {
  std::vector<double> delta;
  std::vector<double> gamma;
};

inline DivergenceRecord trajectory_divergence(const ChainRule& rule, const AnswerMap& f, const AnswerMap& g,
                                              const Point& x) {
  auto tf = run_trajectory(rule, f, x);
  auto tg = run_trajectory(rule, g, x);
  DivergenceRecord r;
  for (int k = 0; k < rule.K(); ++k) {
    auto i = static_cast<std::size_t>(k);
    r.delta.push_back(rule.space().distance(tf.questions[i], tg.questions[i]));
    r.gamma.push_back(rule.space().distance(tf.answers[i], tg.answers[i]));
  }
  return r;
}

}  // namespace cotlab
