#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hpl/expr.hpp"

namespace hpl {

using Point = Eigen::VectorXd;

enum class GradientMode { ExactDual, CentralDifference };

/// Step factors for central differences: h = factor * max(1, |x_i|).
inline double first_derivative_step() { return std::cbrt(std::numeric_limits<double>::epsilon()); }
inline double second_derivative_step() { return std::sqrt(std::numeric_limits<double>::epsilon()); }

/// A real-valued function of n variables. Either an expression with bound
/// parameters (differentiated exactly with duals) or an opaque closure
/// (differentiated by central differences).
class ScalarField {
 public:
  using Closure = std::function<double(const Point&)>;

  ScalarField() = default;
  explicit ScalarField(Expression e, ParamMap params = {});
  ScalarField(int n, Closure f, double step_factor = first_derivative_step());

  static ScalarField parse(std::string_view source, int n, const ParamMap& params = {});
  static ScalarField constant(double v, int n);
  static ScalarField coordinate(int index0, int n);

  int dimension() const { return n_; }
  bool has_expression() const { return !expr_.empty(); }
  const Expression& expression() const { return expr_; }
  const ParamMap& parameters() const { return *params_; }
  double step_factor() const { return step_; }
  GradientMode default_mode() const {
    return has_expression() ? GradientMode::ExactDual : GradientMode::CentralDifference;
  }

  double operator()(const Point& x) const;
  /// Partial derivative along axis `i` (0-based) using exact duals.
  /// Requires an expression body.
  double exact_partial(const Point& x, int i) const;

  std::string to_string() const;

 private:
  int n_ = 0;
  Expression expr_;
  std::shared_ptr<const ParamMap> params_ = std::make_shared<const ParamMap>();
  Closure closure_;
  double step_ = first_derivative_step();
};

ScalarField operator-(const ScalarField& a);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);

struct VectorField {
  std::vector<ScalarField> components;

  int dimension() const { return static_cast<int>(components.size()); }
  Point operator()(const Point& x) const;
};

/// Componentwise product s * X.
VectorField scale(const ScalarField& s, const VectorField& field);
VectorField operator+(const VectorField& a, const VectorField& b);

Eigen::VectorXd gradient(const ScalarField& f, const Point& x);
Eigen::VectorXd gradient(const ScalarField& f, const Point& x, GradientMode mode);

/// Matrix whose row i is gradient(fs[i], x).
Eigen::MatrixXd jacobian_matrix(std::span<const ScalarField> fs, const Point& x);

/// det d(f_1..f_n)/d(x_1..x_n) by LU with partial pivoting.
double jacobian_determinant(std::span<const ScalarField> fs, const Point& x);
double jacobian_determinant(std::span<const ScalarField> fs, const Point& x, GradientMode mode);

double divergence(const VectorField& field, const Point& x);
double divergence(const VectorField& field, const Point& x, GradientMode mode);

/// Directional derivative <grad f, v>.
double lie_derivative(const ScalarField& f, const VectorField& field, const Point& x);

}  // namespace hpl
