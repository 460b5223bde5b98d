#include "hpl/io.hpp"

#include <fstream>
#include <stdexcept>
#include <system_error>

namespace hpl {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Tolerances& tol) {
  return {{"zero", tol.zero},
          {"zero_band", "zero * (1 + max(1, |x|^2))"},
          {"defect", tol.defect},
          {"defect_floor", tol.defect_floor},
          {"constant_variance", tol.constant_variance}};
}

json to_json(const VerificationReport& r) {
  json out = {{"check", r.check},
              {"tolerance", r.tolerance},
              {"max_residual", r.max_residual},
              {"mean_residual", r.mean_residual()},
              {"evaluated", r.evaluated},
              {"skipped", r.skipped},
              {"pass", r.passed()}};
  if (r.worst_point.size() > 0) out["worst_point"] = to_json(r.worst_point);
  return out;
}

json to_json(const DomainVerdict& v) {
  json out = {{"evaluable", v.evaluable},   {"in_omega0", v.in_omega0},
              {"in_E", v.in_E},             {"in_O", v.in_O},
              {"in_omega00", v.in_omega00}, {"nu", v.nu},
              {"divergence", v.divergence}, {"chart_jacobian", v.chart_jacobian},
              {"product", v.product},       {"zero_band", v.band}};
  if (!v.reason.empty()) out["reason"] = v.reason;
  return out;
}

json to_json(const AdmissibilityReport& r) {
  return {{"admissible", r.admissible},
          {"divergence_free", r.divergence_free},
          {"max_abs_divergence", r.max_abs_divergence},
          {"fraction_div_mu_x_nonzero", r.fraction_div_nonzero},
          {"fraction_chart_jacobian_nonzero", r.fraction_jacobian_nonzero},
          {"sampled", r.sampled},
          {"skipped", r.skipped},
          {"reason", r.reason}};
}

json to_json(const DriftReport& r) {
  json out = json::object();
  for (std::size_t k = 0; k < r.quantities.size(); ++k) out[r.quantities[k]] = r.max_drift[k];
  return out;
}

json to_json(const LinearizationCertificate& cert) {
  const auto& cfg = cert.trajectory.config;
  return {{"system", cert.system},
          {"x0", to_json(cert.x0)},
          {"tspan", {cert.t0, cert.t1}},
          {"rescaled", cert.rescaled},
          {"u0", to_json(cert.u0)},
          {"max_defect", cert.max_defect},
          {"mean_defect", cert.mean_defect},
          {"checked_samples", cert.checked_samples},
          {"excluded_samples", cert.excluded_samples},
          {"trajectory_status", to_string(cert.trajectory.status)},
          {"integrator",
           {{"method", to_string(cfg.method)}, {"step", cfg.step}, {"rtol", cfg.rtol}, {"atol", cfg.atol}}},
          {"pass", cert.pass},
          {"tolerances", to_json(cert.tolerances)}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

}  // namespace hpl
