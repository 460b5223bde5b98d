#include "hpl/expr.hpp"

#include <cctype>
#include <charconv>
#include <system_error>

namespace hpl {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::invalid_argument("parse error at offset " + std::to_string(position) + ": " + message),
      position_(position),
      detail_(message) {}

EvalDomainError::EvalDomainError(const std::string& subexpression, const std::string& reason)
    : std::domain_error(reason + " in '" + subexpression + "'"), subexpression_(subexpression) {}

namespace {

NodePtr make_leaf_constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = v;
  return n;
}

NodePtr make_leaf_variable(int index0) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->index = index0;
  return n;
}

NodePtr make_leaf_parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Parameter;
  n->name = std::move(name);
  return n;
}

NodePtr make_unary(Op op, NodePtr a) {
  // a negated literal is stored as a negative constant, so printing and parsing agree
  if (op == Op::Neg && a->op == Op::Constant) return make_leaf_constant(-a->value);
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

int common_dimension(const Expression& a, const Expression& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("expression dimension mismatch");
  return a.dimension();
}

void collect_parameters(const Node& node, NameSet& out) {
  if (node.op == Op::Parameter) out.insert(node.name);
  if (node.lhs) collect_parameters(*node.lhs, out);
  if (node.rhs) collect_parameters(*node.rhs, out);
}

// Recursive-descent parser following the grammar
//   expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
//   factor := '-' factor | power ; power := atom ('^' factor)? ;
//   atom := NUMBER | IDENT | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, int n, const NameSet& params) : src_(src), n_(n), params_(params) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression");
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size()) throw ParseError(pos_, std::string("unexpected character '") + src_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_binary(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    if (accept('-')) return make_unary(Op::Neg, factor());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make_binary(Op::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError(pos_, "expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t k = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++k;
      }
      return k;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError(mark, "malformed exponent");
    }
    double v = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError(start, "number out of range");
    return make_leaf_constant(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view id = src_.substr(start, pos_ - start);
    if (id.size() >= 2 && id[0] == 'x') {
      bool all_digits = true;
      for (char d : id.substr(1)) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(d));
      if (all_digits) {
        int index = 0;
        auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), index);
        if (ec != std::errc() || index < 1 || index > n_) {
          throw ParseError(start, "variable index out of range: " + std::string(id) + " (n = " + std::to_string(n_) + ")");
        }
        return make_leaf_variable(index - 1);
      }
    }
    if (params_.find(id) == params_.end()) throw ParseError(start, "unknown identifier '" + std::string(id) + "'");
    return make_leaf_parameter(std::string(id));
  }

  std::string_view src_;
  int n_;
  const NameSet& params_;
  std::size_t pos_ = 0;
};

int precedence(const Node& node) {
  switch (node.op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (std::signbit(v)) s = "(" + s + ")";
  return s;
}

void render(const Node& node, std::string& out);

void render_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  render(child, out);
  if (parens) out += ')';
}

void render(const Node& node, std::string& out) {
  switch (node.op) {
    case Op::Constant:
      out += format_number(node.value);
      return;
    case Op::Variable:
      out += 'x';
      out += std::to_string(node.index + 1);
      return;
    case Op::Parameter:
      out += node.name;
      return;
    case Op::Neg:
      out += '-';
      render_child(*node.lhs, precedence(*node.lhs) < 3, out);
      return;
    case Op::Pow:
      render_child(*node.lhs, precedence(*node.lhs) < 5, out);
      out += '^';
      render_child(*node.rhs, precedence(*node.rhs) < 3, out);
      return;
    default: {
      const int p = precedence(node);
      const char sym = node.op == Op::Add ? '+' : node.op == Op::Sub ? '-' : node.op == Op::Mul ? '*' : '/';
      // Left-associative: an equal-precedence right operand needs parentheses.
      render_child(*node.lhs, precedence(*node.lhs) < p, out);
      out += sym;
      render_child(*node.rhs, precedence(*node.rhs) <= p, out);
      return;
    }
  }
}

}  // namespace

namespace detail {

bool contains_variable(const Node& node) {
  if (node.op == Op::Variable) return true;
  return (node.lhs && contains_variable(*node.lhs)) || (node.rhs && contains_variable(*node.rhs));
}

}  // namespace detail

Expression Expression::constant(double v, int dimension) { return {make_leaf_constant(v), dimension}; }

Expression Expression::variable(int index0, int dimension) {
  if (index0 < 0 || index0 >= dimension) throw std::out_of_range("variable index out of range");
  return {make_leaf_variable(index0), dimension};
}

NameSet Expression::parameters() const {
  NameSet out;
  if (root_) collect_parameters(*root_, out);
  return out;
}

bool Expression::is_constant() const { return !root_ || !detail::contains_variable(*root_); }

bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Constant:
      return a.value == b.value;
    case Op::Variable:
      return a.index == b.index;
    case Op::Parameter:
      return a.name == b.name;
    case Op::Neg:
      return structurally_equal(*a.lhs, *b.lhs);
    default:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.dimension_ != b.dimension_) return false;
  if (!a.root_ || !b.root_) return !a.root_ && !b.root_;
  return structurally_equal(*a.root_, *b.root_);
}

Expression operator-(const Expression& a) { return {make_unary(Op::Neg, a.root_ptr()), a.dimension()}; }
Expression operator+(const Expression& a, const Expression& b) {
  return {make_binary(Op::Add, a.root_ptr(), b.root_ptr()), common_dimension(a, b)};
}
Expression operator-(const Expression& a, const Expression& b) {
  return {make_binary(Op::Sub, a.root_ptr(), b.root_ptr()), common_dimension(a, b)};
}
Expression operator*(const Expression& a, const Expression& b) {
  return {make_binary(Op::Mul, a.root_ptr(), b.root_ptr()), common_dimension(a, b)};
}
Expression operator/(const Expression& a, const Expression& b) {
  return {make_binary(Op::Div, a.root_ptr(), b.root_ptr()), common_dimension(a, b)};
}

Expression pow(const Expression& base, const Expression& exponent) {
  return {make_binary(Op::Pow, base.root_ptr(), exponent.root_ptr()), common_dimension(base, exponent)};
}

Expression parse(std::string_view source, int n, const NameSet& parameters) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  return {Parser(source, n, parameters).run(), n};
}

std::string to_string(const Node& node) {
  std::string out;
  render(node, out);
  return out;
}

std::string to_string(const Expression& e) { return e.empty() ? std::string() : to_string(e.root()); }

double eval(const Expression& e, std::span<const double> x, const ParamMap& params) {
  if (static_cast<int>(x.size()) != e.dimension()) throw std::invalid_argument("point dimension mismatch");
  return detail::evaluate<double>(e.root(), x, params);
}

Dual<double> eval_dual(const Expression& e, std::span<const double> x, int direction, const ParamMap& params) {
  if (static_cast<int>(x.size()) != e.dimension()) throw std::invalid_argument("point dimension mismatch");
  if (direction < 0 || direction >= e.dimension()) throw std::out_of_range("direction index out of range");
  std::vector<Dual<double>> seeded(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    seeded[i] = Dual<double>(x[i], static_cast<int>(i) == direction ? 1.0 : 0.0);
  }
  return detail::evaluate<Dual<double>>(e.root(), seeded, params);
}

}  // namespace hpl
