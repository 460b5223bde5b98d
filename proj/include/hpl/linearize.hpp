#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpl/flow.hpp"
#include "hpl/model.hpp"
#include "hpl/report.hpp"

namespace hpl {

/// A point or trajectory falls outside the set an operation requires
/// (near the zero set of nu, outside Omega_00, inadmissible mu, ...).
class DomainRejection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Membership of a point in the sets that govern the linearizing chart.
/// Omega_0: nu evaluable and nonzero. E: chart Jacobian
/// d(1/nu, C_1.., H)/dx vanishes. O: div(X) * chart Jacobian vanishes.
/// Omega_00 = Omega_0 minus O.
struct DomainVerdict {
  bool evaluable = false;
  bool in_omega0 = false;
  bool in_E = false;
  bool in_O = false;
  bool in_omega00 = false;
  double nu = 0.0;
  double divergence = 0.0;
  double chart_jacobian = 0.0;
  double product = 0.0;  // divergence * chart_jacobian
  double band = 0.0;     // zero band used at this point
  std::string reason;    // first violated condition, empty if in Omega_00
};

/// u_i as scalar fields: (1/nu, C_1/nu, ..., C_{n-2}/nu, H/nu).
std::vector<ScalarField> chart_fields(const IntegrableSystem& sys);

/// u(x); throws DomainRejection when nu(x) is in the zero band.
Eigen::VectorXd chart(const IntegrableSystem& sys, const Point& x, const Tolerances& tol = {});

DomainVerdict classify(const IntegrableSystem& sys, const Point& x, const Tolerances& tol = {});

/// True if nu's sampled values over `box` have variance below
/// tol.constant_variance (or nu has no variable at all).
bool has_constant_nu(const IntegrableSystem& sys, const SampleBox& box, const Tolerances& tol = {});

struct AdmissibilityReport {
  double max_abs_divergence = 0.0;  // |div X| over the sample (should vanish)
  bool divergence_free = false;
  double fraction_div_nonzero = 0.0;       // div(mu X) beyond the zero band
  double fraction_jacobian_nonzero = 0.0;  // d(1/(mu nu), C.., H)/dx beyond the zero band
  std::size_t sampled = 0;
  std::size_t skipped = 0;
  bool admissible = false;
  std::string reason;
};

/// The two conditions a time rescaling mu must meet when nu is constant:
/// div(mu X) = <grad mu, X> and the rescaled chart Jacobian are each nonzero
/// somewhere in the sample. Throws SystemError if mu is missing and
/// DomainRejection if nu is not constant.
AdmissibilityReport check_mu_admissibility(const IntegrableSystem& sys, const SampleBox& box,
                                           const Tolerances& tol = {});

/// The system the linearization theorem is applied to: `sys` itself when nu is
/// non-constant, otherwise the mu-rescaled system (after the admissibility
/// check passes).
struct LinearizationTarget {
  IntegrableSystem system;
  bool rescaled = false;
};
LinearizationTarget linearization_target(const IntegrableSystem& sys, const Tolerances& tol = {});

struct LinearizationCertificate {
  std::string system;
  Point x0;
  double t0 = 0.0;
  double t1 = 0.0;
  bool rescaled = false;
  Trajectory trajectory;
  std::vector<Eigen::VectorXd> u;  // per sample; empty where excluded
  Eigen::VectorXd u0;
  double max_defect = 0.0;
  double mean_defect = 0.0;
  std::size_t checked_samples = 0;
  std::size_t excluded_samples = 0;
  Tolerances tolerances;
  bool pass = false;
};

/// Integrates from x0, maps each retained sample through the chart and
/// measures |u_i(t) - u_i(0) e^{s(t)}| relative to |u_i(0) e^{s(t)}|
/// (absolute where u_i(0) = 0). Throws DomainRejection if x0 is outside
/// Omega_00 or no sample survives.
LinearizationCertificate certify_linearization(const IntegrableSystem& sys, const Point& x0,
                                               const IntegratorConfig& cfg, const Tolerances& tol = {});

struct IdentityReport {
  VerificationReport inverse_nu;               // <grad(1/nu), X> + (1/nu) div X
  std::vector<VerificationReport> transport;  // <grad u_i, X> + div(X) u_i
  bool passed() const;
};

/// Residuals of the two identities behind the chart, each normalised by
/// 1 + |first term| + |second term|. Points outside Omega_0 are skipped.
IdentityReport identity_residuals(const IntegrableSystem& sys, const std::vector<Point>& pts, double tol = 1e-7,
                                  const Tolerances& zero = {});

}  // namespace hpl
