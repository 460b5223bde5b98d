#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace hpl {

/// Zero bands and thresholds shared by the verification and domain checks.
struct Tolerances {
  /// A quantity q is treated as zero at x iff |q| <= zero * (1 + scale(x)).
  double zero = 1e-9;
  /// Pass threshold for the linearization certificate.
  double defect = 1e-6;
  /// Denominator floor in the relative defect.
  double defect_floor = 1e-300;
  /// Sample variance below which a field is considered constant.
  double constant_variance = 1e-12;

  /// Natural magnitude of degree <= 2 polynomials at x: max(1, |x|^2).
  static double scale(const Eigen::VectorXd& x) { return std::max(1.0, x.squaredNorm()); }
  double band(const Eigen::VectorXd& x) const { return zero * (1.0 + scale(x)); }
  bool is_zero(double q, const Eigen::VectorXd& x) const { return std::abs(q) <= band(x); }
};

/// Residual statistics for one identity over a point sample.
struct VerificationReport {
  std::string check;
  double tolerance = 0.0;
  double max_residual = 0.0;
  double sum_residual = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  Eigen::VectorXd worst_point;

  VerificationReport() = default;
  VerificationReport(std::string name, double tol) : check(std::move(name)), tolerance(tol) {}

  void record(double residual, const Eigen::VectorXd& x) {
    if (evaluated == 0 || residual > max_residual) {
      max_residual = residual;
      worst_point = x;
    }
    sum_residual += residual;
    ++evaluated;
  }
  void skip() { ++skipped; }

  double mean_residual() const { return evaluated ? sum_residual / static_cast<double>(evaluated) : 0.0; }
  bool passed() const { return evaluated > 0 && max_residual <= tolerance; }
};

}  // namespace hpl
