#include "hpl/linearize.hpp"

#include <cmath>

namespace hpl {

namespace {

ScalarField reciprocal(const ScalarField& f) { return ScalarField::constant(1.0, f.dimension()) / f; }

std::vector<ScalarField> chart_jacobian_rows(const IntegrableSystem& sys) {
  std::vector<ScalarField> rows;
  rows.push_back(reciprocal(sys.nu));
  for (const auto& c : sys.casimirs) rows.push_back(c);
  rows.push_back(sys.hamiltonian);
  return rows;
}

SampleBox default_box(int n) { return SampleBox::cube(n, -2.0, 2.0, 256, 42); }

}  // namespace

std::vector<ScalarField> chart_fields(const IntegrableSystem& sys) {
  std::vector<ScalarField> out;
  out.push_back(reciprocal(sys.nu));
  for (const auto& c : sys.casimirs) out.push_back(c / sys.nu);
  out.push_back(sys.hamiltonian / sys.nu);
  return out;
}

Eigen::VectorXd chart(const IntegrableSystem& sys, const Point& x, const Tolerances& tol) {
  double nu = 0.0;
  try {
    nu = sys.nu(x);
  } catch (const EvalDomainError& e) {
    throw DomainRejection(std::string("chart undefined: nu not evaluable (") + e.what() + ")");
  }
  if (tol.is_zero(nu, x)) throw DomainRejection("chart undefined: nu(x) is in the zero band (x near Z(nu))");
  Eigen::VectorXd u(sys.n);
  u[0] = 1.0 / nu;
  for (std::size_t k = 0; k < sys.casimirs.size(); ++k) u[static_cast<Eigen::Index>(k) + 1] = sys.casimirs[k](x) / nu;
  u[sys.n - 1] = sys.hamiltonian(x) / nu;
  return u;
}

DomainVerdict classify(const IntegrableSystem& sys, const Point& x, const Tolerances& tol) {
  DomainVerdict v;
  v.band = tol.band(x);
  try {
    v.nu = sys.nu(x);
  } catch (const EvalDomainError& e) {
    v.reason = std::string("x ∉ Ω₀: nu not evaluable (") + e.what() + ")";
    return v;
  }
  if (std::abs(v.nu) <= v.band) {
    v.evaluable = true;
    v.reason = "x ∉ Ω₀: nu(x) is in the zero band";
    return v;
  }
  try {
    v.divergence = divergence(sys.field, x);
    v.chart_jacobian = jacobian_determinant(chart_jacobian_rows(sys), x);
  } catch (const EvalDomainError& e) {
    v.reason = std::string("x ∉ Ω₀: system not evaluable (") + e.what() + ")";
    return v;
  }
  v.evaluable = true;
  v.in_omega0 = true;
  v.product = v.divergence * v.chart_jacobian;
  v.in_E = std::abs(v.chart_jacobian) <= v.band;
  v.in_O = v.in_E || std::abs(v.divergence) <= v.band;
  v.in_omega00 = !v.in_O;
  if (v.in_E) {
    v.reason = "x ∉ Ω₀₀: chart Jacobian vanishes (x in E)";
  } else if (v.in_O) {
    v.reason = "x ∉ Ω₀₀: div(X) vanishes (x in O)";
  }
  return v;
}

bool has_constant_nu(const IntegrableSystem& sys, const SampleBox& box, const Tolerances& tol) {
  if (sys.nu.has_expression() && sys.nu.expression().is_constant()) return true;
  const auto pts = sample_points(box);
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (const auto& x : pts.points) {
    try {
      const double v = sys.nu(x);
      ++k;
      const double delta = v - mean;
      mean += delta / static_cast<double>(k);
      m2 += delta * (v - mean);
    } catch (const EvalDomainError&) {
    }
  }
  if (k < 2) return false;
  return m2 / static_cast<double>(k - 1) < tol.constant_variance;
}

AdmissibilityReport check_mu_admissibility(const IntegrableSystem& sys, const SampleBox& box, const Tolerances& tol) {
  if (!sys.mu) throw SystemError("mu", "admissibility check needs a rescaling function mu");
  if (!has_constant_nu(sys, box, tol)) {
    throw DomainRejection("nu is not constant; the rescaling path does not apply (use the direct chart)");
  }
  const IntegrableSystem rescaled = apply_rescaling(sys);
  const auto rows = chart_jacobian_rows(rescaled);
  const auto pts = sample_points(box);

  AdmissibilityReport r;
  std::size_t div_nonzero = 0;
  std::size_t jac_nonzero = 0;
  bool div_free = true;
  for (const auto& x : pts.points) {
    try {
      const double div_x = divergence(sys.field, x);
      r.max_abs_divergence = std::max(r.max_abs_divergence, std::abs(div_x));
      div_free = div_free && tol.is_zero(div_x, x);
      const double div_mu = divergence(rescaled.field, x);
      if (tol.is_zero(rescaled.nu(x), x)) {
        ++r.skipped;
        continue;
      }
      const double jac = jacobian_determinant(rows, x);
      ++r.sampled;
      if (!tol.is_zero(div_mu, x)) ++div_nonzero;
      if (!tol.is_zero(jac, x)) ++jac_nonzero;
    } catch (const EvalDomainError&) {
      ++r.skipped;
    }
  }
  r.divergence_free = div_free;
  if (r.sampled > 0) {
    r.fraction_div_nonzero = static_cast<double>(div_nonzero) / static_cast<double>(r.sampled);
    r.fraction_jacobian_nonzero = static_cast<double>(jac_nonzero) / static_cast<double>(r.sampled);
  }
  if (!r.divergence_free) {
    r.reason = "div(X) does not vanish although nu is constant";
  } else if (r.sampled == 0) {
    r.reason = "no sample point with mu*nu outside the zero band";
  } else if (div_nonzero == 0) {
    r.reason = "div(mu X) vanishes at every sampled point";
  } else if (jac_nonzero == 0) {
    r.reason = "chart Jacobian d(1/(mu nu), C.., H)/dx vanishes at every sampled point";
  } else {
    r.admissible = true;
  }
  return r;
}

LinearizationTarget linearization_target(const IntegrableSystem& sys, const Tolerances& tol) {
  const SampleBox box = default_box(sys.n);
  if (!has_constant_nu(sys, box, tol)) return {sys, false};
  if (!sys.mu) {
    throw DomainRejection("nu is constant, so div(X) = 0 and Ω₀₀ is empty; supply a rescaling function mu");
  }
  const AdmissibilityReport adm = check_mu_admissibility(sys, box, tol);
  if (!adm.admissible) throw DomainRejection("mu is not admissible: " + adm.reason);
  return {apply_rescaling(sys), true};
}

LinearizationCertificate certify_linearization(const IntegrableSystem& sys, const Point& x0,
                                               const IntegratorConfig& cfg, const Tolerances& tol) {
  const LinearizationTarget target = linearization_target(sys, tol);
  const IntegrableSystem& work = target.system;

  const DomainVerdict v0 = classify(work, x0, tol);
  if (!v0.in_omega00) throw DomainRejection("x0 ∉ Ω₀₀ (" + v0.reason + ")");

  LinearizationCertificate cert;
  cert.system = sys.name;
  cert.x0 = x0;
  cert.t0 = cfg.t0;
  cert.t1 = cfg.t1;
  cert.rescaled = target.rescaled;
  cert.tolerances = tol;
  cert.trajectory = integrate(work, x0, cfg);
  cert.trajectory.rescaled = target.rescaled;
  cert.u0 = chart(work, x0, tol);

  double sum = 0.0;
  std::size_t terms = 0;
  for (const auto& sample : cert.trajectory.samples) {
    const DomainVerdict v = classify(work, sample.x, tol);
    if (!v.in_omega00) {
      ++cert.excluded_samples;
      cert.u.emplace_back();
      continue;
    }
    const Eigen::VectorXd u = chart(work, sample.x, tol);
    const double growth = std::exp(sample.s);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double expected = cert.u0[i] * growth;
      const double diff = std::abs(u[i] - expected);
      const double d = cert.u0[i] == 0.0 ? diff : diff / (std::abs(expected) + tol.defect_floor);
      cert.max_defect = std::max(cert.max_defect, d);
      sum += d;
      ++terms;
    }
    ++cert.checked_samples;
    cert.u.push_back(u);
  }
  if (cert.checked_samples == 0) throw DomainRejection("every trajectory sample lies outside Ω₀₀");
  cert.mean_defect = terms ? sum / static_cast<double>(terms) : 0.0;
  cert.pass = cert.max_defect <= tol.defect;
  return cert;
}

bool IdentityReport::passed() const {
  if (!inverse_nu.passed()) return false;
  for (const auto& r : transport) {
    if (!r.passed()) return false;
  }
  return true;
}

IdentityReport identity_residuals(const IntegrableSystem& sys, const std::vector<Point>& pts, double tol,
                                  const Tolerances& zero) {
  IdentityReport out;
  out.inverse_nu = VerificationReport("<grad(1/nu), X> + (1/nu) div X", tol);
  const auto u = chart_fields(sys);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.transport.emplace_back("<grad u" + std::to_string(i + 1) + ", X> + div(X) u" + std::to_string(i + 1), tol);
  }
  const ScalarField inv_nu = u.front();
  for (const auto& x : pts) {
    try {
      if (zero.is_zero(sys.nu(x), x)) {
        out.inverse_nu.skip();
        for (auto& r : out.transport) r.skip();
        continue;
      }
      const Point field = sys.field(x);
      const double div = divergence(sys.field, x);
      const double a = gradient(inv_nu, x).dot(field);
      const double b = inv_nu(x) * div;
      out.inverse_nu.record(std::abs(a + b) / (1.0 + std::abs(a) + std::abs(b)), x);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double ai = gradient(u[i], x).dot(field);
        const double bi = div * u[i](x);
        out.transport[i].record(std::abs(ai + bi) / (1.0 + std::abs(ai) + std::abs(bi)), x);
      }
    } catch (const EvalDomainError&) {
      out.inverse_nu.skip();
      for (auto& r : out.transport) r.skip();
    }
  }
  return out;
}

}  // namespace hpl
