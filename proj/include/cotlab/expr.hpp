#pragma once

// Expression strings over {0-9, +, ·}: a bare decimal number, a sum, or a
// product of two decimal numbers. Arithmetic is done on decimal strings so
// operands of any length evaluate exactly.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

#include "cotlab/error.hpp"

namespace cotlab::expr {

// U+00B7 MIDDLE DOT, UTF-8 encoded.
inline constexpr std::string_view kTimes = "\xC2\xB7";
inline constexpr std::string_view kPlus = "+";

enum class Op { None, Add, Mul };

struct Parsed {
  std::string lhs;
  Op op = Op::None;
  std::string rhs;
};

inline bool is_number(std::string_view s) noexcept {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::optional<Parsed> parse(std::string_view s) noexcept {
  if (is_number(s)) return Parsed{std::string(s), Op::None, {}};
  if (auto p = s.find(kPlus); p != std::string_view::npos) {
    auto lhs = s.substr(0, p), rhs = s.substr(p + kPlus.size());
    if (is_number(lhs) && is_number(rhs)) return Parsed{std::string(lhs), Op::Add, std::string(rhs)};
    return std::nullopt;
  }
  if (auto p = s.find(kTimes); p != std::string_view::npos) {
    auto lhs = s.substr(0, p), rhs = s.substr(p + kTimes.size());
    if (is_number(lhs) && is_number(rhs)) return Parsed{std::string(lhs), Op::Mul, std::string(rhs)};
  }
  return std::nullopt;
}

inline bool is_valid(std::string_view s) noexcept { return parse(s).has_value(); }

// Strips leading zeros; "000" becomes "0".
inline std::string canonical(std::string_view digits) {
  auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return "0";
  return std::string(digits.substr(first));
}

inline std::string add(std::string_view a, std::string_view b) {
  std::string out;
  int carry = 0;
  auto i = static_cast<long>(a.size()) - 1, j = static_cast<long>(b.size()) - 1;
  while (i >= 0 || j >= 0 || carry) {
    int s = carry;
    if (i >= 0) s += a[static_cast<std::size_t>(i--)] - '0';
    if (j >= 0) s += b[static_cast<std::size_t>(j--)] - '0';
    out.push_back(static_cast<char>('0' + s % 10));
    carry = s / 10;
  }
  std::reverse(out.begin(), out.end());
  return canonical(out);
}

inline std::string multiply(std::string_view a, std::string_view b) {
  std::string digits(a.size() + b.size(), '\0');
  for (std::size_t i = a.size(); i-- > 0;) {
    int carry = 0;
    for (std::size_t j = b.size(); j-- > 0;) {
      int cur = digits[i + j + 1] + (a[i] - '0') * (b[j] - '0') + carry;
      digits[i + j + 1] = static_cast<char>(cur % 10);
      carry = cur / 10;
    }
    digits[i] = static_cast<char>(digits[i] + carry);
  }
  for (auto& c : digits) c = static_cast<char>(c + '0');
  return canonical(digits);
}

inline std::string make(std::string_view lhs, Op op, std::string_view rhs) {
  switch (op) {
    case Op::Add: return std::string(lhs) + std::string(kPlus) + std::string(rhs);
    case Op::Mul: return std::string(lhs) + std::string(kTimes) + std::string(rhs);
    case Op::None: break;
  }
  return std::string(lhs);
}

// Ideal evaluator: sums and products are computed, a bare number is returned
// unchanged.
inline std::string evaluate(std::string_view s) {
  auto p = parse(s);
  if (!p) throw ParseError("malformed arithmetic expression '" + std::string(s) + "'");
  switch (p->op) {
    case Op::Add: return add(p->lhs, p->rhs);
    case Op::Mul: return multiply(p->lhs, p->rhs);
    case Op::None: break;
  }
  return std::string(s);
}

}  // namespace cotlab::expr
