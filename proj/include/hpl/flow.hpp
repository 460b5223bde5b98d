#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "hpl/model.hpp"

namespace hpl {

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
  Method method = Method::Rk45Adaptive;
  double step = 1e-3;  // fixed-step size (rk4)
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 1'000'000;
  double t0 = 0.0;
  double t1 = 1.0;

  /// Throws std::invalid_argument. A zero-length span is allowed and yields
  /// the initial sample only.
  void validate() const;
};

std::string to_string(Method m);
Method parse_method(std::string_view name);

struct TrajectorySample {
  double t = 0.0;
  Point x;
  double s = 0.0;  // accumulated reparametrized time, s' = -div(X)
};

enum class TrajectoryStatus { Completed, DomainError, MaxStepsExceeded, StepSizeUnderflow };
std::string to_string(TrajectoryStatus s);

struct Trajectory {
  std::string system;
  IntegratorConfig config;
  bool rescaled = false;
  std::vector<TrajectorySample> samples;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::string reason;

  bool complete() const { return status == TrajectoryStatus::Completed; }
};

/// Augmented right-hand side (X(x), -div X(x)) of the (n+1)-dimensional system.
Eigen::VectorXd augmented_rhs(const IntegrableSystem& sys, const Point& x);

/// Integrates x' = X(x) together with s' = -div(X)(x) on the same step
/// sequence. Throws EvalDomainError if x0 itself is not evaluable; later
/// failures truncate the trajectory and set `status` and `reason`.
Trajectory integrate(const IntegrableSystem& sys, const Point& x0, const IntegratorConfig& cfg);

/// Same, for dx/dt' = mu(x) X(x) with s' = -div(mu X). Requires sys.mu.
Trajectory integrate_rescaled(const IntegrableSystem& sys, const Point& x0, const IntegratorConfig& cfg);

struct DriftReport {
  std::vector<std::string> quantities;  // "C1", ..., "H"
  std::vector<double> max_drift;

  double max() const;
};

/// max over samples of |Q(x(t)) - Q(x0)| for each conserved quantity.
DriftReport conservation_drift(const IntegrableSystem& sys, const Trajectory& traj);

/// Header "t,x1,..,xn,s[,u1,..,un]"; numbers with 17 significant digits.
/// `chart` (optional) maps a sample state to u, or returns an empty vector
/// when the chart is undefined there (written as "nan").
void write_csv(std::ostream& out, const Trajectory& traj,
               const std::function<Eigen::VectorXd(const Point&)>& chart = {});

}  // namespace hpl
