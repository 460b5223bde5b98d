#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hpl/calculus.hpp"
#include "hpl/report.hpp"

namespace hpl {

/// Malformed or inconsistent system description. `path` names the offending
/// document field (e.g. "equations[1]").
class SystemError : public std::invalid_argument {
 public:
  SystemError(std::string path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An n-dimensional vector field X with n-1 conserved quantities
/// (casimirs C_1..C_{n-2} plus the Hamiltonian H) and a rescaling function nu
/// such that X_i = nu * d(C_1..C_{n-2}, x_i, H)/d(x_1..x_n). `mu` is an optional
/// time-rescaling used when nu is constant.
struct IntegrableSystem {
  std::string name;
  int n = 0;
  ParamMap parameters;
  VectorField field;
  std::vector<ScalarField> casimirs;
  ScalarField hamiltonian;
  ScalarField nu;
  std::optional<ScalarField> mu;
  std::vector<std::string> warnings;

  /// C_1, ..., C_{n-2}, H.
  std::vector<ScalarField> conserved() const;
};

/// Checks dimensions and conserved-quantity counts; throws SystemError.
void check_shape(const IntegrableSystem& sys);

/// Parses a JSON system document.
IntegrableSystem load_system(std::string_view document);
IntegrableSystem load_system_file(const std::filesystem::path& path);

/// JSON document for an expression-backed system; load_system inverts it.
std::string to_document(const IntegrableSystem& sys);

/// FNV-1a hash of the canonical document, hex encoded.
std::string system_hash(const IntegrableSystem& sys);

IntegrableSystem builtin_lotka_volterra();
IntegrableSystem builtin_euler(double i1, double i2, double i3);
/// Look up a built-in by name ("lotka-volterra", "euler"); Euler reads I1..I3
/// from `params` (defaulting to 1, 2, 3).
IntegrableSystem builtin(std::string_view name, const ParamMap& params = {});

/// The system generated by mu * X in the time t' with dt = mu dt'. Its
/// rescaling function is nu * mu; the conserved quantities are unchanged.
IntegrableSystem apply_rescaling(const IntegrableSystem& sys);

struct SampleBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t count = 1000;
  std::uint64_t seed = 42;

  static SampleBox cube(int n, double lo, double hi, std::size_t count, std::uint64_t seed);
  int dimension() const { return static_cast<int>(lower.size()); }
  void validate() const;
};

struct SampleSet {
  std::vector<Point> points;
  std::size_t rejected = 0;
};

/// `box.count` seeded uniform draws, keeping those accepted by `predicate`.
SampleSet sample_points(const SampleBox& box, const std::function<bool(const Point&)>& predicate = {});

/// max_i |<grad C_i, X>| over the points, one report per conserved quantity.
std::vector<VerificationReport> verify_conservation(const IntegrableSystem& sys, const std::vector<Point>& pts,
                                                    double tol = 1e-8);

}  // namespace hpl
