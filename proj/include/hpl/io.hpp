#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hpl/flow.hpp"
#include "hpl/linearize.hpp"
#include "hpl/poisson.hpp"

namespace hpl {

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Tolerances& tol);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const DomainVerdict& v);
nlohmann::json to_json(const AdmissibilityReport& r);
nlohmann::json to_json(const DriftReport& r);

/// { "system", "x0", "tspan", "max_defect", "mean_defect",
///   "excluded_samples", "pass", "tolerances", ... }
nlohmann::json to_json(const LinearizationCertificate& cert);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hpl
