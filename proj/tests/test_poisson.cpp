#include <doctest.h>

#include <cmath>
#include <random>

#include "documents.hpp"
#include "helpers.hpp"
#include "hpl/linearize.hpp"
#include "hpl/model.hpp"
#include "hpl/poisson.hpp"

using namespace hpl;
using testing::pt;

namespace {

std::vector<Point> omega00_points(const IntegrableSystem& sys, std::size_t count, std::uint64_t seed) {
  return sample_points(SampleBox::cube(3, -2, 2, count, seed), [&](const Point& x) {
           return classify(sys, x).in_omega00;
         }).points;
}

}  // namespace

TEST_CASE("bracket examples") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const BracketContext ctx = BracketContext::of(lv);
  const Point x = pt(1, 1, 2);
  const ScalarField x2 = ScalarField::coordinate(1, 3);
  CHECK(bracket(ctx, x2, lv.hamiltonian, x) == doctest::Approx(1.0).epsilon(1e-14));
  const ScalarField f = ScalarField::parse("x1*x2^2-x3", 3);
  CHECK(bracket(ctx, f, f, x) == 0.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const ScalarField g = random_polynomial(3, 3, rng);
    CHECK(std::abs(bracket(ctx, lv.casimirs[0], g, x)) <= 1e-12);
  }
}

TEST_CASE("bracket matches the closed-form determinant") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const BracketContext ctx = BracketContext::of(lv);
  const ScalarField f = ScalarField::parse("x1*x3", 3);
  for (const auto& v : oracle::uniform_points(100, 77, 0.3, 2.0)) {
    const oracle::Vec3 gf{v[2], 0.0, v[0]};
    const double ref = oracle::lv::nu(v) * oracle::det3({oracle::lv::grad_casimir(v), gf, {1, 1, 1}});
    CHECK(bracket(ctx, f, lv.hamiltonian, pt(v)) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("Hamiltonian vector field reproduces X") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const Point a = hamiltonian_vector_field(BracketContext::of(lv), lv.hamiltonian, pt(1, 1, 2));
  CHECK(a.isApprox(Eigen::Vector3d(3, 1, -4), 1e-14));

  const IntegrableSystem eu = builtin_euler(1, 2, 3);
  const Point b = hamiltonian_vector_field(BracketContext::of(eu), eu.hamiltonian, pt(1, 1, 1));
  CHECK(b.isApprox(Eigen::Vector3d(-1.0 / 6.0, 2.0 / 3.0, -0.5), 1e-14));

  const Point z = hamiltonian_vector_field(BracketContext::of(eu), eu.casimirs[0], pt(0.3, -1, 2));
  CHECK(z.isZero(1e-15));
}

TEST_CASE("realization residual for both built-ins") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const auto pts = omega00_points(lv, 1000, 42);
  const VerificationReport r = verify_realization(lv, pts);
  CHECK(r.passed());
  CHECK(r.max_residual <= 1e-8);
  CHECK(r.evaluated == pts.size());

  // the same residual computed from the hand-derived gradients
  double worst = 0.0;
  for (const auto& x : pts) {
    const oracle::Vec3 v = testing::vec(x);
    const oracle::Vec3 built =
        oracle::realized(oracle::lv::nu(v), oracle::lv::grad_casimir(v), oracle::lv::grad_hamiltonian(v));
    const oracle::Vec3 f = oracle::lv::field(v);
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(f[i] - built[i]) / (1.0 + std::abs(f[i])));
  }
  CHECK(worst <= 1e-8);

  const IntegrableSystem eu = builtin_euler(1, 2, 3);
  const VerificationReport e = verify_realization(eu, sample_points(SampleBox::cube(3, -2, 2, 1000, 42)).points);
  CHECK(e.passed());
  CHECK(e.evaluated == 1000);
}

TEST_CASE("a corrupted field fails the realization check") {
  const IntegrableSystem bad = load_system(documents::kCorrupted);
  const VerificationReport r = verify_realization(bad, omega00_points(bad, 1000, 42));
  CHECK_FALSE(r.passed());
  CHECK(r.max_residual >= 1e-3);
}

TEST_CASE("points near the zero set of nu are skipped") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  std::vector<Point> pts{pt(0, 1, 1), pt(1, 1, 2), pt(1, -1, 0)};
  const VerificationReport r = verify_realization(lv, pts);
  CHECK(r.evaluated == 1);
  CHECK(r.skipped == 2);
  CHECK(near_nu_zero(lv, pt(1e-6, 1, 1)));
  CHECK_FALSE(near_nu_zero(lv, pt(1, 1, 2)));
}

TEST_CASE("(1/nu) X is divergence free") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const VerificationReport r = verify_divergence_free(lv, omega00_points(lv, 1000, 42));
  CHECK(r.passed());
  CHECK(r.max_residual <= 1e-6);

  const IntegrableSystem eu = apply_rescaling(builtin_euler(1, 2, 3));
  const VerificationReport e = verify_divergence_free(eu, sample_points(SampleBox::cube(3, -2, 2, 1000, 42)).points);
  CHECK(e.passed());
  CHECK(e.max_residual <= 1e-6);
}

TEST_CASE("with nu identically one the residual is the plain divergence") {
  IntegrableSystem sys = builtin_lotka_volterra();
  sys.nu = ScalarField::constant(1.0, 3);
  const auto pts = sample_points(SampleBox::cube(3, -2, 2, 200, 6)).points;
  const VerificationReport r = verify_divergence_free(sys, pts);
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, std::abs(oracle::lv::divergence(testing::vec(x))));
  CHECK(r.max_residual == doctest::Approx(worst).epsilon(1e-12));
  CHECK_FALSE(r.passed());
}

TEST_CASE("bracket axioms hold for both built-ins") {
  for (const auto& sys : {builtin_lotka_volterra(), builtin_euler(1, 2, 3)}) {
    CAPTURE(sys.name);
    const auto pts = omega00_points(sys.mu ? apply_rescaling(sys) : sys, 50, 42);
    const BracketAxiomReport r = check_bracket_axioms(sys, pts, 42);
    CHECK(r.antisymmetry.max_residual <= 1e-12);
    CHECK(r.leibniz.max_residual <= 1e-8);
    CHECK(r.casimir.max_residual <= 1e-10);
    CHECK(r.jacobi.max_residual <= 1e-4);
    CHECK(r.passed());
    CHECK(r.jacobi.evaluated > 0);
  }
}

TEST_CASE("bracket axiom checks are seed-deterministic") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const auto pts = omega00_points(lv, 20, 9);
  const BracketAxiomReport a = check_bracket_axioms(lv, pts, 1);
  const BracketAxiomReport b = check_bracket_axioms(lv, pts, 1);
  CHECK(a.jacobi.max_residual == b.jacobi.max_residual);
  CHECK(a.leibniz.max_residual == b.leibniz.max_residual);
}
