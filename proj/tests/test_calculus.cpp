#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "hpl/calculus.hpp"
#include "hpl/model.hpp"
#include "hpl/poisson.hpp"

using namespace hpl;
using testing::pt;

TEST_CASE("gradients of the example functions") {
  const ScalarField h = ScalarField::parse("x1+x2+x3", 3);
  for (const auto& x : {pt(1, 1, 2), pt(-3, 0.5, 7)}) {
    CHECK(gradient(h, x) == Eigen::Vector3d(1, 1, 1));
  }
  CHECK(gradient(ScalarField::constant(4.0, 3), pt(1, 2, 3)).isZero(0.0));
  const ScalarField c = ScalarField::parse("(x1^2+x2^2+x3^2)/2", 3);
  CHECK(gradient(c, pt(1, 1, 1)) == Eigen::Vector3d(1, 1, 1));
  CHECK(gradient(c, pt(1, 1, 1), GradientMode::CentralDifference).isApprox(Eigen::Vector3d(1, 1, 1), 1e-9));
}

TEST_CASE("Jacobian determinants") {
  std::vector<ScalarField> coords{ScalarField::coordinate(0, 3), ScalarField::coordinate(1, 3),
                                  ScalarField::coordinate(2, 3)};
  CHECK(jacobian_determinant(coords, pt(0.3, -2, 5)) == 1.0);
  const ScalarField f = ScalarField::parse("x1*x2+x3^2", 3);
  std::vector<ScalarField> repeated{f, f, ScalarField::coordinate(2, 3)};
  CHECK(jacobian_determinant(repeated, pt(1, 2, 3)) == doctest::Approx(0.0));

  // nu * d(C, x2, H)/dx = X2 at (1,1,2); X2 = x2(x3 - x1) = 1
  const IntegrableSystem lv = builtin_lotka_volterra();
  std::vector<ScalarField> rows{lv.casimirs[0], ScalarField::coordinate(1, 3), lv.hamiltonian};
  const Point x = pt(1, 1, 2);
  const double v = jacobian_determinant(rows, x);
  const oracle::Vec3 xv{1, 1, 2};
  const double ref = oracle::det3({oracle::lv::grad_casimir(xv), oracle::unit(1), oracle::lv::grad_hamiltonian(xv)});
  CHECK(v == doctest::Approx(ref).epsilon(1e-14));
  CHECK(lv.nu(x) * v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("divergence examples") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  CHECK(divergence(lv.field, pt(1, 1, 2)) == doctest::Approx(2.0).epsilon(1e-15));
  const IntegrableSystem eu = builtin_euler(1, 2, 3);
  for (const auto& x : testing::points(oracle::uniform_points(20, 3))) CHECK(divergence(eu.field, x) == 0.0);
  VectorField constant{{ScalarField::constant(1, 3), ScalarField::constant(-2, 3), ScalarField::constant(5, 3)}};
  CHECK(divergence(constant, pt(1, 2, 3)) == 0.0);
}

TEST_CASE("determinant is alternating and multilinear in its rows") {
  std::mt19937_64 rng(99);
  const auto pts = testing::points(oracle::uniform_points(100, 17));
  for (const auto& x : pts) {
    const ScalarField f = random_polynomial(3, 3, rng);
    const ScalarField g = random_polynomial(3, 3, rng);
    const ScalarField h = random_polynomial(3, 2, rng);
    const ScalarField k = random_polynomial(3, 2, rng);
    std::vector<ScalarField> fgh{f, g, h};
    std::vector<ScalarField> gfh{g, f, h};
    std::vector<ScalarField> hgf{h, g, f};
    const double d = jacobian_determinant(fgh, x);
    const double scale = 1.0 + std::abs(d);
    CHECK(std::abs(d + jacobian_determinant(gfh, x)) <= 1e-12 * scale);
    CHECK(std::abs(d + jacobian_determinant(hgf, x)) <= 1e-12 * scale);

    std::vector<ScalarField> sum_row{f + k, g, h};
    std::vector<ScalarField> k_row{k, g, h};
    const double dk = jacobian_determinant(k_row, x);
    CHECK(std::abs(jacobian_determinant(sum_row, x) - d - dk) <= 1e-10 * (scale + std::abs(dk)));

    std::vector<ScalarField> scaled{ScalarField::constant(2.5, 3) * f, g, h};
    CHECK(std::abs(jacobian_determinant(scaled, x) - 2.5 * d) <= 1e-12 * (1.0 + 2.5 * std::abs(d)));
  }
}

TEST_CASE("divergence is additive") {
  std::mt19937_64 rng(5);
  const auto pts = testing::points(oracle::uniform_points(50, 21));
  for (const auto& x : pts) {
    VectorField a;
    VectorField b;
    for (int i = 0; i < 3; ++i) {
      a.components.push_back(random_polynomial(3, 3, rng));
      b.components.push_back(random_polynomial(3, 3, rng));
    }
    const double lhs = divergence(a + b, x);
    const double rhs = divergence(a, x) + divergence(b, x);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("exact and central-difference gradients agree at 200 points") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  std::vector<ScalarField> fields{lv.casimirs[0], lv.nu, lv.hamiltonian, lv.field.components[0]};
  const auto pts = testing::points(oracle::uniform_points(200, 8, 0.5, 2.0));
  for (const auto& x : pts) {
    for (const auto& f : fields) {
      const Eigen::VectorXd exact = gradient(f, x, GradientMode::ExactDual);
      const Eigen::VectorXd fd = gradient(f, x, GradientMode::CentralDifference);
      CHECK((exact - fd).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + exact.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("exact gradient matches the hand-derived Casimir gradient") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  for (const auto& v : oracle::uniform_points(100, 31, 0.2, 2.0)) {
    const Eigen::VectorXd g = gradient(lv.casimirs[0], pt(v));
    const oracle::Vec3 ref = oracle::lv::grad_casimir(v);
    for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-13));
  }
}

TEST_CASE("closure-backed fields fall back to central differences") {
  ScalarField f(3, [](const Point& x) { return x[0] * x[0] * x[1] + x[2]; });
  CHECK(f.default_mode() == GradientMode::CentralDifference);
  CHECK_FALSE(f.has_expression());
  const Eigen::VectorXd g = gradient(f, pt(1, 2, 3));
  CHECK(g.isApprox(Eigen::Vector3d(4, 1, 1), 1e-8));
  const ScalarField mixed = f * ScalarField::parse("x1", 3);
  CHECK(mixed(pt(1, 2, 3)) == 5.0);
  CHECK(lie_derivative(ScalarField::parse("x1+x2+x3", 3), builtin_lotka_volterra().field, pt(1, 1, 2)) ==
        doctest::Approx(0.0));
}

TEST_CASE("field arithmetic keeps expressions and merges parameters") {
  const ScalarField a = ScalarField::parse("a*x1", 3, {{"a", 2.0}});
  const ScalarField b = ScalarField::parse("b*x2", 3, {{"b", 3.0}});
  const ScalarField s = a + b;
  CHECK(s.has_expression());
  CHECK(s(pt(1, 1, 0)) == 5.0);
  const ScalarField clash = ScalarField::parse("a*x2", 3, {{"a", 4.0}});
  CHECK_THROWS(a + clash);
}
