#pragma once

#include <cmath>
#include <compare>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>

#include "cotlab/error.hpp"
#include "cotlab/expr.hpp"

namespace cotlab {

enum class PointKind { Real, Expr, Atom };

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::Real: return "real";
    case PointKind::Expr: return "expr";
    case PointKind::Atom: return "atom";
  }
  return "?";
}

/// An element of a representation space: a finite real, an arithmetic
/// expression string, or a labeled discrete atom. Immutable.
class Point {
 public:
  static Point real(double v) {
    if (!std::isfinite(v)) throw DomainError("real point must be finite");
    return Point(Real{v});
  }

  static Point expr(std::string text) {
    if (!expr::is_valid(text)) throw DomainError("'" + text + "' is not a valid arithmetic expression");
    return Point(Expr{std::move(text)});
  }

  static Point atom(std::string label) {
    if (label.empty()) throw DomainError("atom label must be nonempty");
    return Point(Atom{std::move(label)});
  }

  PointKind kind() const noexcept { return static_cast<PointKind>(value_.index()); }
  bool is_real() const noexcept { return kind() == PointKind::Real; }

  double value() const {
    if (auto* r = std::get_if<Real>(&value_)) return r->v;
    throw DomainError("point is not real-valued");
  }

  const std::string& text() const {
    if (auto* e = std::get_if<Expr>(&value_)) return e->text;
    if (auto* a = std::get_if<Atom>(&value_)) return a->label;
    throw DomainError("real point has no text");
  }

  std::string to_string() const {
    if (is_real()) {
      std::ostringstream os;
      os.precision(17);
      os << value();
      return os.str();
    }
    return text();
  }

  friend bool operator==(const Point&, const Point&) = default;
  friend std::partial_ordering operator<=>(const Point&, const Point&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Point& p) { return os << p.to_string(); }

 private:
  struct Real {
    double v;
    friend bool operator==(const Real&, const Real&) = default;
    friend std::partial_ordering operator<=>(const Real&, const Real&) = default;
  };
  struct Expr {
    std::string text;
    friend bool operator==(const Expr&, const Expr&) = default;
    friend std::strong_ordering operator<=>(const Expr&, const Expr&) = default;
  };
  struct Atom {
    std::string label;
    friend bool operator==(const Atom&, const Atom&) = default;
    friend std::strong_ordering operator<=>(const Atom&, const Atom&) = default;
  };

  explicit Point(std::variant<Real, Expr, Atom> v) : value_(std::move(v)) {}

  std::variant<Real, Expr, Atom> value_;
};

// Total order for use as a map key (no NaN can be constructed).
struct PointLess {
  bool operator()(const Point& a, const Point& b) const { return (a <=> b) < 0; }
};

}  // namespace cotlab
