#pragma once

// Representation spaces, ground metrics, quasimetric losses and sampled
// stability (coordinate-wise Lipschitz) certification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cotlab/error.hpp"
#include "cotlab/point.hpp"

namespace cotlab {

inline constexpr double kEqualityTol = 1e-9;
inline constexpr double kAxiomTol = 1e-12;
inline constexpr double kRealMergeTol = 1e-12;

struct Interval {
  double lower;
  double upper;
  bool contains(double v) const noexcept { return v >= lower && v <= upper; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A representation space with its ground metric rho. Reals carry the
/// Euclidean metric, optionally restricted to a closed interval; expression
/// and atom spaces carry the discrete metric.
class MetricSpace {
 public:
  static MetricSpace real_line() { return MetricSpace(PointKind::Real, std::nullopt); }

  static MetricSpace real_interval(double lower, double upper) {
    if (!(std::isfinite(lower) && std::isfinite(upper)) || lower > upper)
      throw ParameterError("invalid interval bounds");
    return MetricSpace(PointKind::Real, Interval{lower, upper});
  }

  static MetricSpace discrete(PointKind kind) {
    if (kind == PointKind::Real) throw ParameterError("discrete metric is reserved for expr/atom spaces");
    return MetricSpace(kind, std::nullopt);
  }

  std::string id() const { return to_string(kind_); }
  PointKind point_kind() const noexcept { return kind_; }
  const std::optional<Interval>& interval() const noexcept { return interval_; }

  bool contains(const Point& p) const {
    if (p.kind() != kind_) return false;
    return !interval_ || interval_->contains(p.value());
  }

  void require(const Point& p) const {
    if (p.kind() != kind_)
      throw DomainError(std::string("point of kind ") + to_string(p.kind()) + " used in " + id() + " space");
  }

  double distance(const Point& x, const Point& y) const {
    require(x);
    require(y);
    if (kind_ == PointKind::Real) return std::abs(x.value() - y.value());
    return x == y ? 0.0 : 1.0;
  }

  double operator()(const Point& x, const Point& y) const { return distance(x, y); }

  // 0 for expr/atom (exact string identity), 1e-12 for reals.
  double equality_tolerance() const noexcept { return kind_ == PointKind::Real ? kRealMergeTol : 0.0; }

  bool equal(const Point& x, const Point& y) const { return distance(x, y) <= equality_tolerance(); }

  friend bool operator==(const MetricSpace&, const MetricSpace&) = default;

 private:
  MetricSpace(PointKind kind, std::optional<Interval> interval) : kind_(kind), interval_(interval) {}

  PointKind kind_;
  std::optional<Interval> interval_;
};

/// Coordinate-wise Lipschitz constants gamma_1..gamma_n with total gamma.
struct StabilityCertificate {
  std::size_t arity = 0;
  double total = 0.0;
  std::vector<double> coords;
  bool proven = false;

  static StabilityCertificate from_coords(std::vector<double> coords, bool proven = true) {
    const double sum = std::accumulate(coords.begin(), coords.end(), 0.0);
    const std::size_t n = coords.size();
    return make(n, sum, std::move(coords), proven);
  }

  static StabilityCertificate make(std::size_t arity, double total, std::vector<double> coords, bool proven = true) {
    if (arity == 0 || coords.size() != arity) throw ParameterError("certificate arity must match its coordinate list");
    for (double c : coords)
      if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("Lipschitz constants must be finite and nonnegative");
    double sum = std::accumulate(coords.begin(), coords.end(), 0.0);
    if (sum > total + kAxiomTol) throw ParameterError("coordinate constants exceed the certificate total");
    return StabilityCertificate{arity, total, std::move(coords), proven};
  }

  friend bool operator==(const StabilityCertificate&, const StabilityCertificate&) = default;
};

enum class LossFamily { ScaledMetric, CappedMetric, Indicator, Squared };

inline const char* to_string(LossFamily f) {
  switch (f) {
    case LossFamily::ScaledMetric: return "scaled_metric";
    case LossFamily::CappedMetric: return "capped_metric";
    case LossFamily::Indicator: return "indicator";
    case LossFamily::Squared: return "squared";
  }
  return "?";
}

/// A loss over a metric space. The shipped families are quasimetrics except
/// `squared`, which exists as a negative control for the axiom checker.
class QuasimetricLoss {
 public:
  // l(x,y) = scale * rho(x,y)
  static QuasimetricLoss scaled_metric(MetricSpace space, double scale) {
    check_scale(scale);
    return QuasimetricLoss(std::move(space), LossFamily::ScaledMetric, scale, std::nullopt);
  }

  // l(x,y) = min{scale * rho(x,y), cap}
  static QuasimetricLoss capped_metric(MetricSpace space, double scale, double cap) {
    check_scale(scale);
    if (!(cap > 0.0) || !std::isfinite(cap)) throw ParameterError("loss cap must be positive and finite");
    return QuasimetricLoss(std::move(space), LossFamily::CappedMetric, scale, cap);
  }

  // l(x,y) = M * 1[x != y], exact inequality.
  static QuasimetricLoss indicator(MetricSpace space, double magnitude) {
    if (!(magnitude > 0.0) || !std::isfinite(magnitude)) throw ParameterError("indicator magnitude must be positive");
    return QuasimetricLoss(std::move(space), LossFamily::Indicator, 0.0, magnitude);
  }

  // l(u,v) = (u - v)^2 on reals. Not a quasimetric.
  static QuasimetricLoss squared(MetricSpace space) {
    if (space.point_kind() != PointKind::Real) throw ParameterError("squared loss needs a real space");
    return QuasimetricLoss(std::move(space), LossFamily::Squared, 1.0, std::nullopt);
  }

  double operator()(const Point& x, const Point& y) const {
    switch (family_) {
      case LossFamily::ScaledMetric: return scale_ * space_.distance(x, y);
      case LossFamily::CappedMetric: return std::min(scale_ * space_.distance(x, y), *cap_);
      case LossFamily::Indicator:
        space_.require(x);
        space_.require(y);
        return x == y ? 0.0 : *cap_;
      case LossFamily::Squared: {
        double d = space_.distance(x, y);
        return d * d;
      }
    }
    return 0.0;
  }

  double eval(const Point& x, const Point& y) const { return (*this)(x, y); }

  LossFamily family() const noexcept { return family_; }
  const MetricSpace& space() const noexcept { return space_; }
  double scale() const noexcept { return scale_; }
  std::optional<double> cap() const noexcept { return cap_; }

  // Analytic certificate: (scale, scale) for metric-derived losses since
  // t -> min{t, M} is 1-Lipschitz. None for the indicator and squared losses.
  std::optional<StabilityCertificate> certificate() const {
    if (family_ == LossFamily::ScaledMetric || family_ == LossFamily::CappedMetric)
      return StabilityCertificate::from_coords({scale_, scale_});
    return std::nullopt;
  }

  friend bool operator==(const QuasimetricLoss&, const QuasimetricLoss&) = default;

 private:
  QuasimetricLoss(MetricSpace space, LossFamily family, double scale, std::optional<double> cap)
      : space_(std::move(space)), family_(family), scale_(scale), cap_(cap) {}

  static void check_scale(double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw ParameterError("loss scale must be finite and nonnegative");
  }

  MetricSpace space_;
  LossFamily family_;
  double scale_;
  std::optional<double> cap_;
};

inline double loss_eval(const QuasimetricLoss& loss, const Point& x, const Point& y) { return loss(x, y); }

inline QuasimetricLoss loss_from_metric_capped(const MetricSpace& space, double scale, double cap) {
  return QuasimetricLoss::capped_metric(space, scale, cap);
}

struct AxiomReport {
  double max_diagonal_violation = 0.0;
  double max_triangle_violation = 0.0;
  // Ordered triple (x, y, z) attaining the triangle violation l(x,y) - l(x,z) - l(z,y).
  std::optional<std::array<std::size_t, 3>> worst_triple;
  std::size_t triples_checked = 0;
  bool pass = true;
};

/// Checks l(x,x) = 0 and l(x,y) <= l(x,z) + l(z,y) over every ordered triple
/// of the sample. The triangle tolerance is 1e-12 relative to
/// max(1, l(x,z) + l(z,y)) so rounding at large magnitudes is not flagged.
inline AxiomReport check_quasimetric(const QuasimetricLoss& loss, std::span<const Point> sample) {
  if (sample.empty()) throw ParameterError("axiom check needs a nonempty sample");
  AxiomReport r;
  bool triangle_ok = true;
  const std::size_t n = sample.size();
  std::vector<double> table(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) table[i * n + j] = loss(sample[i], sample[j]);
  for (std::size_t i = 0; i < n; ++i) r.max_diagonal_violation = std::max(r.max_diagonal_violation, std::abs(table[i * n + i]));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        const double rhs = table[x * n + z] + table[z * n + y];
        const double v = table[x * n + y] - rhs;
        if (v > kAxiomTol * std::max(1.0, rhs)) triangle_ok = false;
        if (v > r.max_triangle_violation) {
          r.max_triangle_violation = v;
          r.worst_triple = std::array<std::size_t, 3>{x, y, z};
        }
        ++r.triples_checked;
      }
  r.pass = r.max_diagonal_violation <= kAxiomTol && triangle_ok;
  return r;
}

using PointTuple = std::vector<Point>;
using TupleMap = std::function<Point(std::span<const Point>)>;

struct StabilityVerdict {
  bool pass = true;
  // min over pairs of  sum_i gamma_i rho_in(x_i, x'_i) - rho_out(h(x), h(x')).
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> worst_pair;
  std::size_t pairs_checked = 0;
};

/// Sampled necessary-condition check of a stability certificate:
/// rho_out(h(x), h(x')) <= sum_i gamma_i rho_in(x_i, x'_i) on every pair.
/// Tolerance is 1e-12 relative to max(1, rhs, |h(x)|, |h(x')|).
inline StabilityVerdict check_stability(const TupleMap& fn, const StabilityCertificate& cert,
                                        std::span<const std::pair<PointTuple, PointTuple>> pairs,
                                        const MetricSpace& out_metric, const MetricSpace& in_metric) {
  if (cert.coords.size() != cert.arity) throw ParameterError("certificate arity mismatch");
  StabilityVerdict v;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [a, b] = pairs[p];
    if (a.size() != cert.arity || b.size() != cert.arity)
      throw ParameterError("input tuple arity " + std::to_string(a.size()) + " does not match certificate arity " +
                           std::to_string(cert.arity));
    double rhs = 0.0;
    for (std::size_t i = 0; i < cert.arity; ++i)
      if (cert.coords[i] != 0.0) rhs += cert.coords[i] * in_metric.distance(a[i], b[i]);
    const Point fa = fn(a), fb = fn(b);
    double lhs = out_metric.distance(fa, fb);
    double scale = std::max(1.0, rhs);
    if (fa.is_real() && fb.is_real()) scale = std::max({scale, std::abs(fa.value()), std::abs(fb.value())});
    double margin = rhs - lhs;
    if (margin < v.worst_margin) {
      v.worst_margin = margin;
      v.worst_pair = p;
    }
    if (lhs > rhs + kAxiomTol * scale) v.pass = false;
    ++v.pairs_checked;
  }
  return v;
}

}  // namespace cotlab
