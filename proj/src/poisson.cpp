#include "hpl/poisson.hpp"

#include <stdexcept>

namespace hpl {

BracketContext BracketContext::of(const IntegrableSystem& sys) { return {sys.casimirs, sys.nu, sys.n}; }

double bracket(const BracketContext& ctx, const ScalarField& f, const ScalarField& g, const Point& x) {
  if (static_cast<int>(ctx.casimirs.size()) != ctx.n - 2) throw std::invalid_argument("bracket context needs n-2 casimirs");
  std::vector<ScalarField> rows = ctx.casimirs;
  rows.push_back(f);
  rows.push_back(g);
  return ctx.nu(x) * jacobian_determinant(rows, x);
}

ScalarField bracket_field(const BracketContext& ctx, const ScalarField& f, const ScalarField& g) {
  return ScalarField(
      ctx.n, [ctx, f, g](const Point& x) { return bracket(ctx, f, g, x); }, second_derivative_step());
}

Point hamiltonian_vector_field(const BracketContext& ctx, const ScalarField& hamiltonian, const Point& x) {
  const double nu = ctx.nu(x);
  std::vector<ScalarField> rows = ctx.casimirs;
  rows.push_back(ScalarField::coordinate(0, ctx.n));
  rows.push_back(hamiltonian);
  Eigen::MatrixXd m = jacobian_matrix(rows, x);
  const auto slot = static_cast<Eigen::Index>(ctx.n - 2);
  Point out(ctx.n);
  for (Eigen::Index i = 0; i < ctx.n; ++i) {
    m.row(slot).setZero();
    m(slot, i) = 1.0;
    out[i] = nu * Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
  }
  return out;
}

bool near_nu_zero(const IntegrableSystem& sys, const Point& x, const Tolerances& tol) {
  return tol.is_zero(sys.nu(x), x);
}

VerificationReport verify_realization(const IntegrableSystem& sys, const std::vector<Point>& pts, double tol,
                                      const Tolerances& zero) {
  VerificationReport report("realization X_i = nu * d(C.., x_i, H)/dx", tol);
  const BracketContext ctx = BracketContext::of(sys);
  for (const auto& x : pts) {
    try {
      if (near_nu_zero(sys, x, zero)) {
        report.skip();
        continue;
      }
      const Point field = sys.field(x);
      const Point built = hamiltonian_vector_field(ctx, sys.hamiltonian, x);
      double worst = 0.0;
      for (Eigen::Index i = 0; i < field.size(); ++i) {
        worst = std::max(worst, std::abs(field[i] - built[i]) / (1.0 + std::abs(field[i])));
      }
      report.record(worst, x);
    } catch (const EvalDomainError&) {
      report.skip();
    }
  }
  return report;
}

VerificationReport verify_divergence_free(const IntegrableSystem& sys, const std::vector<Point>& pts, double tol,
                                          const Tolerances& zero) {
  VerificationReport report("divergence free div((1/nu) X)", tol);
  const VectorField rescaled = scale(ScalarField::constant(1.0, sys.n) / sys.nu, sys.field);
  for (const auto& x : pts) {
    try {
      if (near_nu_zero(sys, x, zero)) {
        report.skip();
        continue;
      }
      report.record(std::abs(divergence(rescaled, x)), x);
    } catch (const EvalDomainError&) {
      report.skip();
    }
  }
  return report;
}

ScalarField random_polynomial(int n, int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  Expression acc = Expression::constant(coeff(rng), n);
  // One term per exponent vector with total degree in [1, degree].
  std::vector<int> exps(static_cast<std::size_t>(n), 0);
  auto emit = [&](auto&& self, int var, int remaining, bool any) -> void {
    if (var == n) {
      if (!any) return;
      Expression term = Expression::constant(coeff(rng), n);
      for (int i = 0; i < n; ++i) {
        const int e = exps[static_cast<std::size_t>(i)];
        if (e == 0) continue;
        Expression v = Expression::variable(i, n);
        term = term * (e == 1 ? v : pow(v, Expression::constant(e, n)));
      }
      acc = acc + term;
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      exps[static_cast<std::size_t>(var)] = e;
      self(self, var + 1, remaining - e, any || e > 0);
    }
    exps[static_cast<std::size_t>(var)] = 0;
  };
  emit(emit, 0, degree, false);
  return ScalarField(acc);
}

BracketAxiomReport check_bracket_axioms(const IntegrableSystem& sys, const std::vector<Point>& pts,
                                        std::uint64_t seed, int casimir_probes, const Tolerances& zero) {
  BracketAxiomReport out;
  const BracketContext ctx = BracketContext::of(sys);
  std::mt19937_64 rng(seed);

  for (const auto& x : pts) {
    const ScalarField f = random_polynomial(sys.n, 2, rng);
    const ScalarField g = random_polynomial(sys.n, 2, rng);
    const ScalarField h = random_polynomial(sys.n, 2, rng);
    std::vector<ScalarField> probes;
    for (int k = 0; k < casimir_probes; ++k) probes.push_back(random_polynomial(sys.n, 2, rng));

    try {
      if (near_nu_zero(sys, x, zero)) {
        out.antisymmetry.skip();
        out.leibniz.skip();
        out.casimir.skip();
        out.jacobi.skip();
        out.hamiltonian.skip();
        continue;
      }

      const double fg = bracket(ctx, f, g, x);
      const double gf = bracket(ctx, g, f, x);
      out.antisymmetry.record(std::abs(fg + gf) / (1.0 + std::abs(fg)), x);

      const double lhs = bracket(ctx, f * g, h, x);
      const double t1 = f(x) * bracket(ctx, g, h, x);
      const double t2 = g(x) * bracket(ctx, f, h, x);
      out.leibniz.record(std::abs(lhs - t1 - t2) / (1.0 + std::abs(lhs) + std::abs(t1) + std::abs(t2)), x);

      double casimir_worst = 0.0;
      for (const auto& c : sys.casimirs) {
        for (const auto& p : probes) {
          casimir_worst = std::max(casimir_worst, std::abs(bracket(ctx, c, p, x)) / (1.0 + Tolerances::scale(x)));
        }
      }
      out.casimir.record(casimir_worst, x);

      const double j1 = bracket(ctx, f, bracket_field(ctx, g, h), x);
      const double j2 = bracket(ctx, g, bracket_field(ctx, h, f), x);
      const double j3 = bracket(ctx, h, bracket_field(ctx, f, g), x);
      out.jacobi.record(std::abs(j1 + j2 + j3) / (1.0 + std::abs(j1) + std::abs(j2) + std::abs(j3)), x);

      const Eigen::VectorXd grad_h = gradient(sys.hamiltonian, x);
      const Point xh = hamiltonian_vector_field(ctx, sys.hamiltonian, x);
      const double scale = 1.0 + (grad_h.cwiseAbs().array() * xh.cwiseAbs().array()).sum();
      out.hamiltonian.record(std::abs(grad_h.dot(xh)) / scale, x);
    } catch (const EvalDomainError&) {
      out.antisymmetry.skip();
      out.leibniz.skip();
      out.casimir.skip();
      out.jacobi.skip();
      out.hamiltonian.skip();
    }
  }
  return out;
}

}  // namespace hpl
