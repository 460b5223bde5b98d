#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hpl/calculus.hpp"
#include "hpl/model.hpp"
#include "hpl/report.hpp"

namespace hpl {

/// Data defining {f,g} = nu * d(C_1..C_{n-2}, f, g)/d(x_1..x_n).
struct BracketContext {
  std::vector<ScalarField> casimirs;
  ScalarField nu;
  int n = 0;

  static BracketContext of(const IntegrableSystem& sys);
};

double bracket(const BracketContext& ctx, const ScalarField& f, const ScalarField& g, const Point& x);

/// x -> {f,g}(x) as a closure field whose gradient uses central differences
/// with the second-derivative step, so it can sit inside an outer bracket.
ScalarField bracket_field(const BracketContext& ctx, const ScalarField& f, const ScalarField& g);

/// Component i is {x_i, H}(x).
Point hamiltonian_vector_field(const BracketContext& ctx, const ScalarField& hamiltonian, const Point& x);

/// |nu(x)| at or below the zero band approximates the zero set of nu.
bool near_nu_zero(const IntegrableSystem& sys, const Point& x, const Tolerances& tol = {});

/// max_i |X_i - nu * d(C.., x_i, H)/dx| / (1 + |X_i|) per point.
VerificationReport verify_realization(const IntegrableSystem& sys, const std::vector<Point>& pts, double tol = 1e-8,
                                      const Tolerances& zero = {});

/// |div((1/nu) X)| per point.
VerificationReport verify_divergence_free(const IntegrableSystem& sys, const std::vector<Point>& pts,
                                          double tol = 1e-6, const Tolerances& zero = {});

/// Random polynomial of total degree <= `degree` with coefficients in [-1, 1].
ScalarField random_polynomial(int n, int degree, std::mt19937_64& rng);

/// Bracket axioms over a point sample with random polynomial test functions.
struct BracketAxiomReport {
  VerificationReport antisymmetry{"antisymmetry {f,g} + {g,f}", 1e-12};
  VerificationReport leibniz{"leibniz {fg,h} - f{g,h} - g{f,h}", 1e-8};
  VerificationReport casimir{"casimir {C_k, g}", 1e-10};
  VerificationReport jacobi{"jacobi cyclic sum", 1e-4};
  VerificationReport hamiltonian{"<grad H, X_H>", 1e-10};

  bool passed() const {
    return antisymmetry.passed() && leibniz.passed() && casimir.passed() && jacobi.passed() && hamiltonian.passed();
  }
};

/// Each residual is normalised by 1 + (sum of magnitudes of the terms it
/// compares), so tolerances read as relative-to-scale.
BracketAxiomReport check_bracket_axioms(const IntegrableSystem& sys, const std::vector<Point>& pts,
                                        std::uint64_t seed, int casimir_probes = 20, const Tolerances& zero = {});

}  // namespace hpl
