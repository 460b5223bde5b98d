#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hpl/dual.hpp"

namespace hpl {

using ParamMap = std::map<std::string, double, std::less<>>;
using NameSet = std::set<std::string, std::less<>>;

/// Syntax, identifier, or range error raised while parsing; carries the
/// 0-based character offset where the problem was detected.
class ParseError : public std::invalid_argument {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

/// Raised when evaluation leaves the real domain of an expression: division
/// by zero, 0^negative, non-integer power of a non-positive base, an unbound
/// parameter, or a non-finite intermediate. Never returned silently as inf/nan.
class EvalDomainError : public std::domain_error {
 public:
  EvalDomainError(const std::string& subexpression, const std::string& reason);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Op { Constant, Variable, Parameter, Neg, Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Constant;
  double value = 0.0;  // Constant
  int index = 0;       // Variable, 0-based
  std::string name;    // Parameter
  NodePtr lhs;         // unary operand / left operand / base
  NodePtr rhs;         // right operand / exponent
};

/// Immutable expression tree over variables x1..xn and named parameters.
/// Copies share the tree.
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, int dimension) : root_(std::move(root)), dimension_(dimension) {}

  static Expression constant(double v, int dimension);
  static Expression variable(int index0, int dimension);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  int dimension() const { return dimension_; }
  bool empty() const { return !root_; }

  /// Parameter names referenced anywhere in the tree.
  NameSet parameters() const;
  /// True if no variable appears in the tree.
  bool is_constant() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  NodePtr root_;
  int dimension_ = 0;
};

Expression operator-(const Expression& a);
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression pow(const Expression& base, const Expression& exponent);

bool structurally_equal(const Node& a, const Node& b);

/// Parse `source` against dimension n and the declared parameter names.
/// Precedence: ^ (right-assoc) over unary minus over * / over + - (left-assoc).
Expression parse(std::string_view source, int n, const NameSet& parameters = {});

/// Minimal-parenthesis rendering that parses back to an identical tree.
std::string to_string(const Expression& e);
std::string to_string(const Node& node);

namespace detail {

bool contains_variable(const Node& node);

template <typename Scalar>
Scalar checked(const Node& node, Scalar v) {
  if (!is_finite(v)) throw EvalDomainError(to_string(node), "non-finite result");
  return v;
}

template <typename Scalar>
Scalar integer_power(const Node& node, Scalar base, long long k) {
  const bool negative = k < 0;
  if (negative && value_of(base) == 0.0) throw EvalDomainError(to_string(node), "zero raised to a negative power");
  unsigned long long m = negative ? static_cast<unsigned long long>(-k) : static_cast<unsigned long long>(k);
  Scalar result(1.0);
  Scalar b = base;
  while (m != 0) {
    if (m & 1ULL) result = result * b;
    m >>= 1U;
    if (m != 0) b = b * b;
  }
  if (negative) result = Scalar(1.0) / result;
  return result;
}

template <typename Scalar>
Scalar evaluate(const Node& node, std::span<const Scalar> x, const ParamMap& params) {
  switch (node.op) {
    case Op::Constant:
      return Scalar(node.value);
    case Op::Variable:
      return x[static_cast<std::size_t>(node.index)];
    case Op::Parameter: {
      auto it = params.find(node.name);
      if (it == params.end()) throw EvalDomainError(node.name, "unbound parameter");
      return Scalar(it->second);
    }
    case Op::Neg:
      return -evaluate(*node.lhs, x, params);
    case Op::Add:
      return checked(node, evaluate(*node.lhs, x, params) + evaluate(*node.rhs, x, params));
    case Op::Sub:
      return checked(node, evaluate(*node.lhs, x, params) - evaluate(*node.rhs, x, params));
    case Op::Mul:
      return checked(node, evaluate(*node.lhs, x, params) * evaluate(*node.rhs, x, params));
    case Op::Div: {
      const Scalar num = evaluate(*node.lhs, x, params);
      const Scalar den = evaluate(*node.rhs, x, params);
      if (value_of(den) == 0.0) throw EvalDomainError(to_string(node), "division by zero");
      return checked(node, num / den);
    }
    case Op::Pow: {
      const Scalar base = evaluate(*node.lhs, x, params);
      const Scalar expo = evaluate(*node.rhs, x, params);
      const double ev = value_of(expo);
      if (!contains_variable(*node.rhs) && std::trunc(ev) == ev && std::abs(ev) < 9.0e15) {
        return checked(node, integer_power(node, base, static_cast<long long>(ev)));
      }
      if (!(value_of(base) > 0.0)) throw EvalDomainError(to_string(node), "non-integer power of a non-positive base");
      using std::exp;
      using std::log;
      return checked(node, exp(expo * log(base)));
    }
  }
  throw EvalDomainError(to_string(node), "unknown node");
}

}  // namespace detail

/// Real evaluation at x (length n).
double eval(const Expression& e, std::span<const double> x, const ParamMap& params = {});

/// Forward-mode evaluation seeded with direction e_{direction} (0-based);
/// the derivative part is the exact partial derivative.
Dual<double> eval_dual(const Expression& e, std::span<const double> x, int direction,
                       const ParamMap& params = {});

/// Evaluation on double or Dual<double>.
template <typename Scalar>
Scalar eval_as(const Expression& e, std::span<const Scalar> x, const ParamMap& params = {}) {
  return detail::evaluate(e.root(), x, params);
}

}  // namespace hpl
