#include "hpl/calculus.hpp"

#include <stdexcept>

namespace hpl {

namespace {

std::shared_ptr<const ParamMap> merged(const ScalarField& a, const ScalarField& b) {
  ParamMap out = a.parameters();
  for (const auto& [k, v] : b.parameters()) {
    auto [it, inserted] = out.emplace(k, v);
    if (!inserted && it->second != v) throw std::invalid_argument("conflicting values for parameter '" + k + "'");
  }
  return std::make_shared<const ParamMap>(std::move(out));
}

void require_same_dimension(const ScalarField& a, const ScalarField& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("scalar field dimension mismatch");
}

template <typename ExprOp, typename ValueOp>
ScalarField combine(const ScalarField& a, const ScalarField& b, ExprOp expr_op, ValueOp value_op) {
  require_same_dimension(a, b);
  if (a.has_expression() && b.has_expression()) {
    return ScalarField(expr_op(a.expression(), b.expression()), *merged(a, b));
  }
  return ScalarField(
      a.dimension(), [a, b, value_op](const Point& x) { return value_op(a(x), b(x)); },
      std::max(a.step_factor(), b.step_factor()));
}

double central_difference(const ScalarField& f, const Point& x, int i) {
  const double scale = std::max(1.0, std::abs(x[i]));
  const double h_nominal = f.step_factor() * scale;
  Point xp = x;
  Point xm = x;
  xp[i] = x[i] + h_nominal;
  xm[i] = x[i] - h_nominal;
  const double span = xp[i] - xm[i];
  return (f(xp) - f(xm)) / span;
}

}  // namespace

ScalarField::ScalarField(Expression e, ParamMap params)
    : n_(e.dimension()), expr_(std::move(e)), params_(std::make_shared<const ParamMap>(std::move(params))) {
  if (expr_.empty()) throw std::invalid_argument("empty expression");
}

ScalarField::ScalarField(int n, Closure f, double step_factor) : n_(n), closure_(std::move(f)), step_(step_factor) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  if (!closure_) throw std::invalid_argument("empty closure");
  if (!(step_factor > 0.0)) throw std::invalid_argument("step factor must be positive");
}

ScalarField ScalarField::parse(std::string_view source, int n, const ParamMap& params) {
  NameSet names;
  for (const auto& [k, v] : params) names.insert(k);
  return ScalarField(hpl::parse(source, n, names), params);
}

ScalarField ScalarField::constant(double v, int n) { return ScalarField(Expression::constant(v, n)); }

ScalarField ScalarField::coordinate(int index0, int n) { return ScalarField(Expression::variable(index0, n)); }

double ScalarField::operator()(const Point& x) const {
  if (x.size() != n_) throw std::invalid_argument("point dimension mismatch");
  if (has_expression()) return eval(expr_, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), *params_);
  const double v = closure_(x);
  if (!std::isfinite(v)) throw EvalDomainError("<closure>", "non-finite result");
  return v;
}

double ScalarField::exact_partial(const Point& x, int i) const {
  if (!has_expression()) throw std::logic_error("exact partial derivative requires an expression body");
  if (x.size() != n_) throw std::invalid_argument("point dimension mismatch");
  return eval_dual(expr_, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), i, *params_).deriv;
}

std::string ScalarField::to_string() const { return has_expression() ? hpl::to_string(expr_) : "<closure>"; }

ScalarField operator-(const ScalarField& a) {
  if (a.has_expression()) return ScalarField(-a.expression(), a.parameters());
  return ScalarField(a.dimension(), [a](const Point& x) { return -a(x); }, a.step_factor());
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Expression& p, const Expression& q) { return p + q; },
                 [](double p, double q) { return p + q; });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Expression& p, const Expression& q) { return p - q; },
                 [](double p, double q) { return p - q; });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Expression& p, const Expression& q) { return p * q; },
                 [](double p, double q) { return p * q; });
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](const Expression& p, const Expression& q) { return p / q; },
                 [](double p, double q) {
                   if (q == 0.0) throw EvalDomainError("<closure>", "division by zero");
                   return p / q;
                 });
}

Point VectorField::operator()(const Point& x) const {
  Point out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) out[static_cast<Eigen::Index>(i)] = components[i](x);
  return out;
}

VectorField scale(const ScalarField& s, const VectorField& field) {
  VectorField out;
  out.components.reserve(field.components.size());
  for (const auto& c : field.components) out.components.push_back(s * c);
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("vector field dimension mismatch");
  VectorField out;
  for (std::size_t i = 0; i < a.components.size(); ++i) out.components.push_back(a.components[i] + b.components[i]);
  return out;
}

Eigen::VectorXd gradient(const ScalarField& f, const Point& x) { return gradient(f, x, f.default_mode()); }

Eigen::VectorXd gradient(const ScalarField& f, const Point& x, GradientMode mode) {
  if (x.size() != f.dimension()) throw std::invalid_argument("point dimension mismatch");
  Eigen::VectorXd g(f.dimension());
  const bool exact = mode == GradientMode::ExactDual && f.has_expression();
  for (int i = 0; i < f.dimension(); ++i) g[i] = exact ? f.exact_partial(x, i) : central_difference(f, x, i);
  return g;
}

namespace {

Eigen::MatrixXd rows_of(std::span<const ScalarField> fs, const Point& x, const GradientMode* mode) {
  const auto n = static_cast<Eigen::Index>(fs.size());
  if (x.size() != n) throw std::invalid_argument("jacobian needs exactly n functions of n variables");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = fs[static_cast<std::size_t>(i)];
    m.row(i) = (mode ? gradient(f, x, *mode) : gradient(f, x)).transpose();
  }
  return m;
}

}  // namespace

Eigen::MatrixXd jacobian_matrix(std::span<const ScalarField> fs, const Point& x) { return rows_of(fs, x, nullptr); }

double jacobian_determinant(std::span<const ScalarField> fs, const Point& x) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(rows_of(fs, x, nullptr)).determinant();
}

double jacobian_determinant(std::span<const ScalarField> fs, const Point& x, GradientMode mode) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(rows_of(fs, x, &mode)).determinant();
}

double divergence(const VectorField& field, const Point& x) {
  double acc = 0.0;
  for (int i = 0; i < field.dimension(); ++i) {
    const auto& c = field.components[static_cast<std::size_t>(i)];
    acc += c.has_expression() ? c.exact_partial(x, i) : central_difference(c, x, i);
  }
  return acc;
}

double divergence(const VectorField& field, const Point& x, GradientMode mode) {
  double acc = 0.0;
  for (int i = 0; i < field.dimension(); ++i) {
    const auto& c = field.components[static_cast<std::size_t>(i)];
    acc += mode == GradientMode::ExactDual && c.has_expression() ? c.exact_partial(x, i) : central_difference(c, x, i);
  }
  return acc;
}

double lie_derivative(const ScalarField& f, const VectorField& field, const Point& x) {
  return gradient(f, x).dot(field(x));
}

}  // namespace hpl
