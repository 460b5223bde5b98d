#include "hpl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace hpl {

void IntegratorConfig::validate() const {
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0) throw std::invalid_argument("t-span must satisfy t0 <= t1");
  if (method == Method::Rk4Fixed && !(step > 0.0)) throw std::invalid_argument("fixed step must be positive");
  if (method == Method::Rk45Adaptive && (!(rtol > 0.0) || !(atol > 0.0))) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (max_steps == 0) throw std::invalid_argument("max steps must be positive");
}

std::string to_string(Method m) { return m == Method::Rk4Fixed ? "rk4" : "rk45"; }

Method parse_method(std::string_view name) {
  if (name == "rk4") return Method::Rk4Fixed;
  if (name == "rk45") return Method::Rk45Adaptive;
  throw std::invalid_argument("unknown integration method '" + std::string(name) + "'");
}

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed:
      return "completed";
    case TrajectoryStatus::DomainError:
      return "domain-error";
    case TrajectoryStatus::MaxStepsExceeded:
      return "max-steps-exceeded";
    case TrajectoryStatus::StepSizeUnderflow:
      return "step-size-underflow";
  }
  return "unknown";
}

Eigen::VectorXd augmented_rhs(const IntegrableSystem& sys, const Point& x) {
  Eigen::VectorXd out(sys.n + 1);
  out.head(sys.n) = sys.field(x);
  out[sys.n] = -divergence(sys.field, x);
  return out;
}

namespace {

using State = Eigen::VectorXd;

struct Rhs {
  const IntegrableSystem& sys;
  State operator()(const State& y) const { return augmented_rhs(sys, y.head(sys.n)); }
};

void push(Trajectory& traj, double t, const State& y, int n) {
  traj.samples.push_back({t, y.head(n), y[n]});
}

void run_rk4(const Rhs& f, State y, Trajectory& traj) {
  const auto& cfg = traj.config;
  const int n = f.sys.n;
  const double span = cfg.t1 - cfg.t0;
  if (span == 0.0) return;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / cfg.step - 1e-9)));
  if (steps > cfg.max_steps) {
    traj.status = TrajectoryStatus::MaxStepsExceeded;
    traj.reason = "fixed step needs " + std::to_string(steps) + " steps, limit " + std::to_string(cfg.max_steps);
    return;
  }
  const double h = span / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      const State k1 = f(y);
      const State k2 = f(y + 0.5 * h * k1);
      const State k3 = f(y + 0.5 * h * k2);
      const State k4 = f(y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const EvalDomainError& e) {
      traj.status = TrajectoryStatus::DomainError;
      traj.reason = e.what();
      return;
    }
    const double t = k + 1 == steps ? cfg.t1 : cfg.t0 + static_cast<double>(k + 1) * h;
    push(traj, t, y, n);
  }
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(const Rhs& f, const State& y0, const State& f0, const IntegratorConfig& cfg) {
  auto norm = [&](const State& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = cfg.atol + cfg.rtol * std::abs(y0[i]);
      acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double span = cfg.t1 - cfg.t0;
  const double dy = norm(y0);
  const double df = norm(f0);
  double h0 = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
  h0 = std::min(h0, span);
  double h1 = h0;
  try {
    const State f1 = f(y0 + h0 * f0);
    const double d2 = norm(f1 - f0) / h0;
    const double dmax = std::max(df, d2);
    h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  } catch (const EvalDomainError&) {
    h1 = h0 * 1e-3;
  }
  return std::min({100.0 * h0, h1, span});
}

void run_rk45(const Rhs& f, State y, Trajectory& traj) {
  const auto& cfg = traj.config;
  const int n = f.sys.n;
  if (cfg.t1 == cfg.t0) return;

  constexpr double safe = 0.9;
  constexpr double beta = 0.04;
  constexpr double expo = 0.2 - beta * 0.75;
  constexpr double fac_max = 10.0;  // growth limit
  constexpr double fac_min = 0.2;   // shrink limit

  double t = cfg.t0;
  State k1 = f(y);
  double h = initial_step(f, y, k1, cfg);
  double err_old = 1e-4;
  std::size_t attempts = 0;

  while (t < cfg.t1) {
    if (++attempts > cfg.max_steps) {
      traj.status = TrajectoryStatus::MaxStepsExceeded;
      traj.reason = "exceeded " + std::to_string(cfg.max_steps) + " step attempts at t = " + std::to_string(t);
      return;
    }
    const bool last = t + h >= cfg.t1;
    if (last) h = cfg.t1 - t;
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      traj.status = TrajectoryStatus::StepSizeUnderflow;
      traj.reason = "step size underflow at t = " + std::to_string(t);
      return;
    }

    State y_new;
    State k7;
    double err = 0.0;
    try {
      const State k2 = f(y + h * (a21 * k1));
      const State k3 = f(y + h * (a31 * k1 + a32 * k2));
      const State k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      k7 = f(y_new);
      const State e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      err = error_norm(e, y, y_new, cfg.rtol, cfg.atol);
    } catch (const EvalDomainError& ex) {
      // A stage left the domain; retry with a smaller step until it underflows.
      h *= 0.25;
      if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        traj.status = TrajectoryStatus::DomainError;
        traj.reason = ex.what();
        return;
      }
      continue;
    }

    const double fac11 = std::pow(err, expo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      err_old = std::max(err, 1e-4);
      t = last ? cfg.t1 : t + h;
      y = y_new;
      k1 = k7;
      push(traj, t, y, n);
      h /= fac;
    } else {
      h /= std::min(1.0 / fac_min, fac11 / safe);
    }
  }
}

}  // namespace

Trajectory integrate(const IntegrableSystem& sys, const Point& x0, const IntegratorConfig& cfg) {
  cfg.validate();
  if (x0.size() != sys.n) throw std::invalid_argument("x0 dimension mismatch");
  Trajectory traj;
  traj.system = sys.name;
  traj.config = cfg;
  const Rhs f{sys};
  State y(sys.n + 1);
  y.head(sys.n) = x0;
  y[sys.n] = 0.0;
  (void)f(y);  // evaluation-domain errors at x0 propagate to the caller
  push(traj, cfg.t0, y, sys.n);
  if (cfg.method == Method::Rk4Fixed) {
    run_rk4(f, y, traj);
  } else {
    run_rk45(f, y, traj);
  }
  return traj;
}

Trajectory integrate_rescaled(const IntegrableSystem& sys, const Point& x0, const IntegratorConfig& cfg) {
  Trajectory traj = integrate(apply_rescaling(sys), x0, cfg);
  traj.rescaled = true;
  return traj;
}

double DriftReport::max() const {
  double m = 0.0;
  for (double d : max_drift) m = std::max(m, d);
  return m;
}

DriftReport conservation_drift(const IntegrableSystem& sys, const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  DriftReport out;
  const auto quantities = sys.conserved();
  for (std::size_t k = 0; k < quantities.size(); ++k) {
    out.quantities.push_back(k + 1 == quantities.size() ? "H" : "C" + std::to_string(k + 1));
    const double q0 = quantities[k](traj.samples.front().x);
    double worst = 0.0;
    for (const auto& sample : traj.samples) worst = std::max(worst, std::abs(quantities[k](sample.x) - q0));
    out.max_drift.push_back(worst);
  }
  return out;
}

void write_csv(std::ostream& out, const Trajectory& traj, const std::function<Eigen::VectorXd(const Point&)>& chart) {
  const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  out << ",s";
  if (chart) {
    for (Eigen::Index i = 1; i <= n; ++i) out << ",u" << i;
  }
  out << '\n';
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& sample : traj.samples) {
    out << num(sample.t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << num(sample.x[i]);
    out << ',' << num(sample.s);
    if (chart) {
      const Eigen::VectorXd u = chart(sample.x);
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << (u.size() == n ? num(u[i]) : "nan");
    }
    out << '\n';
  }
}

}  // namespace hpl
