#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "hpl/flow.hpp"
#include "hpl/model.hpp"

using namespace hpl;
using testing::pt;

namespace {

// Classical RK4 on the closed-form field, augmented with s' = -div.
template <typename Field, typename Div>
std::array<double, 4> reference_rk4(Field f, Div div, oracle::Vec3 x, double t1, int steps) {
  using S = std::array<double, 4>;
  auto rhs = [&](const S& y) {
    const oracle::Vec3 p{y[0], y[1], y[2]};
    const oracle::Vec3 v = f(p);
    return S{v[0], v[1], v[2], -div(p)};
  };
  auto axpy = [](const S& y, double a, const S& k) {
    S out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + a * k[i];
    return out;
  };
  S y{x[0], x[1], x[2], 0.0};
  const double h = t1 / steps;
  for (int k = 0; k < steps; ++k) {
    const S k1 = rhs(y);
    const S k2 = rhs(axpy(y, h / 2, k1));
    const S k3 = rhs(axpy(y, h / 2, k2));
    const S k4 = rhs(axpy(y, h, k3));
    for (std::size_t i = 0; i < 4; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

IntegratorConfig adaptive(double t1) {
  IntegratorConfig cfg;
  cfg.t1 = t1;
  return cfg;
}

IntegratorConfig fixed(double t1, double step) {
  IntegratorConfig cfg;
  cfg.method = Method::Rk4Fixed;
  cfg.step = step;
  cfg.t1 = t1;
  return cfg;
}

}  // namespace

TEST_CASE("augmented right-hand side") {
  const Eigen::VectorXd lv = augmented_rhs(builtin_lotka_volterra(), pt(1, 1, 2));
  CHECK(lv.size() == 4);
  CHECK(lv.isApprox(Eigen::Vector4d(3, 1, -4, -2), 1e-15));

  const Eigen::VectorXd eu = augmented_rhs(apply_rescaling(builtin_euler(1, 2, 3)), pt(1, 1, 1));
  CHECK(eu[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(eu[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(eu[2] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(eu[3] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("adaptive integration matches an independent RK4 reference") {
  const Trajectory lv = integrate(builtin_lotka_volterra(), pt(1, 1, 2), adaptive(0.3));
  REQUIRE(lv.complete());
  CHECK(lv.samples.front().t == 0.0);
  CHECK(lv.samples.back().t == 0.3);
  const auto ref = reference_rk4(oracle::lv::field, oracle::lv::divergence, {1, 1, 2}, 0.3, 3000);
  const auto& end = lv.samples.back();
  for (int i = 0; i < 3; ++i) CHECK(std::abs(end.x[i] - ref[static_cast<std::size_t>(i)]) <= 1e-9);
  CHECK(std::abs(end.s - ref[3]) <= 1e-9);

  const oracle::Euler eref{1, 2, 3, true};
  const Trajectory eu = integrate_rescaled(builtin_euler(1, 2, 3), pt(1, 1, 1), adaptive(1.0));
  REQUIRE(eu.complete());
  CHECK(eu.rescaled);
  const auto r2 = reference_rk4([&](const oracle::Vec3& x) { return eref.field(x); },
                                [&](const oracle::Vec3& x) { return eref.divergence(x); }, {1, 1, 1}, 1.0, 4000);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(eu.samples.back().x[i] - r2[static_cast<std::size_t>(i)]) <= 1e-9);
  CHECK(std::abs(eu.samples.back().s - r2[3]) <= 1e-9);
}

TEST_CASE("fixed-step RK4 agrees with the adaptive run") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const Trajectory a = integrate(lv, pt(1, 1, 2), adaptive(0.3));
  const Trajectory b = integrate(lv, pt(1, 1, 2), fixed(0.3, 1e-3));
  REQUIRE(b.complete());
  CHECK(b.samples.back().t == doctest::Approx(0.3).epsilon(1e-15));
  CHECK((a.samples.back().x - b.samples.back().x).lpNorm<Eigen::Infinity>() <= 1e-7);
  CHECK(std::abs(a.samples.back().s - b.samples.back().s) <= 1e-7);
}

TEST_CASE("rescaling by mu = 1 leaves the trajectory unchanged") {
  IntegrableSystem lv = builtin_lotka_volterra();
  lv.mu = ScalarField::constant(1.0, 3);
  const Trajectory plain = integrate(lv, pt(1, 1, 2), adaptive(0.3));
  const Trajectory scaled = integrate_rescaled(lv, pt(1, 1, 2), adaptive(0.3));
  REQUIRE(plain.samples.size() == scaled.samples.size());
  for (std::size_t k = 0; k < plain.samples.size(); ++k) {
    CHECK((plain.samples[k].x - scaled.samples[k].x).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(std::abs(plain.samples[k].s - scaled.samples[k].s) <= 1e-12);
  }
}

TEST_CASE("conserved quantities stay put along trajectories") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const DriftReport d1 = conservation_drift(lv, integrate(lv, pt(1, 1, 2), adaptive(0.3)));
  CHECK(d1.quantities == std::vector<std::string>{"C1", "H"});
  CHECK(d1.max() <= 1e-8);

  const IntegrableSystem eu = builtin_euler(1, 2, 3);
  const DriftReport d2 = conservation_drift(eu, integrate_rescaled(eu, pt(1, 1, 1), adaptive(1.0)));
  CHECK(d2.max() <= 1e-8);

  const Trajectory single = integrate(lv, pt(1, 1, 2), adaptive(0.0));
  REQUIRE(single.samples.size() == 1);
  CHECK(conservation_drift(lv, single).max() == 0.0);
}

TEST_CASE("unrescaled Euler flow has s identically zero") {
  const Trajectory t = integrate(builtin_euler(1, 2, 3), pt(1, 1, 1), adaptive(2.0));
  REQUIRE(t.complete());
  for (const auto& s : t.samples) CHECK(s.s == 0.0);
}

TEST_CASE("integration is bit-for-bit reproducible") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const Trajectory a = integrate(lv, pt(1, 1, 2), adaptive(0.3));
  const Trajectory b = integrate(lv, pt(1, 1, 2), adaptive(0.3));
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].t == b.samples[k].t);
    CHECK(a.samples[k].x == b.samples[k].x);
    CHECK(a.samples[k].s == b.samples[k].s);
  }
}

TEST_CASE("RK4 halving shows fourth-order convergence") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  IntegratorConfig ref_cfg = adaptive(0.3);
  ref_cfg.rtol = 1e-13;
  ref_cfg.atol = 1e-15;
  const Point ref = integrate(lv, pt(1, 1, 2), ref_cfg).samples.back().x;
  const double e1 = (integrate(lv, pt(1, 1, 2), fixed(0.3, 0.05)).samples.back().x - ref).norm();
  const double e2 = (integrate(lv, pt(1, 1, 2), fixed(0.3, 0.025)).samples.back().x - ref).norm();
  CHECK(e1 / e2 >= 8.0);
  CHECK(e1 / e2 <= 32.0);
}

TEST_CASE("integrator failures are reported as status, not thrown") {
  // x1' = x1^2 from x1 = 1 blows up at t = 1
  IntegrableSystem sys = builtin_lotka_volterra();
  sys.field.components[0] = ScalarField::parse("x1^2", 3);
  IntegratorConfig cfg = adaptive(2.0);
  cfg.max_steps = 2000;
  const Trajectory t = integrate(sys, pt(1, 1, 2), cfg);
  CHECK_FALSE(t.complete());
  CHECK_FALSE(t.reason.empty());

  IntegrableSystem sing = builtin_lotka_volterra();
  sing.field.components[0] = ScalarField::parse("-1/(x1-0.5)", 3);
  const Trajectory d = integrate(sing, pt(1, 1, 2), adaptive(2.0));
  CHECK_FALSE(d.complete());
}

TEST_CASE("configuration validation") {
  IntegratorConfig cfg;
  cfg.t1 = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = IntegratorConfig{};
  cfg.rtol = 0.0;
  cfg.atol = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = IntegratorConfig{};
  cfg.method = Method::Rk4Fixed;
  cfg.step = 0.0;
  CHECK_THROWS(cfg.validate());
  CHECK(parse_method("rk4") == Method::Rk4Fixed);
  CHECK(parse_method("rk45") == Method::Rk45Adaptive);
  CHECK_THROWS(parse_method("euler"));
  CHECK_THROWS(integrate(builtin_lotka_volterra(), Eigen::VectorXd::Ones(2), adaptive(1.0)));
}

TEST_CASE("CSV output") {
  const IntegrableSystem lv = builtin_lotka_volterra();
  const Trajectory t = integrate(lv, pt(1, 1, 2), fixed(0.002, 0.001));
  std::ostringstream plain;
  write_csv(plain, t);
  std::istringstream lines(plain.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "t,x1,x2,x3,s");
  CHECK(first == "0,1,1,2,0");

  std::ostringstream charted;
  write_csv(charted, t, [](const Point& x) { return x.size() == 3 && x[0] > 0 ? Eigen::VectorXd(x * 2) : Eigen::VectorXd(); });
  CHECK(charted.str().rfind("t,x1,x2,x3,s,u1,u2,u3\n0,1,1,2,0,2,2,4\n", 0) == 0);
}
