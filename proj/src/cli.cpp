#include "hpl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpl/flow.hpp"
#include "hpl/io.hpp"
#include "hpl/linearize.hpp"
#include "hpl/model.hpp"
#include "hpl/poisson.hpp"

namespace hpl::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string system_path;
  std::string builtin_name;
  std::vector<std::string> params;
  std::string x0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string method = "rk45";
  double step = 1e-3;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::vector<std::string> box;
  std::size_t samples = 1000;
  std::uint64_t seed = 42;
  bool chart = false;
  bool rescaled = false;
  std::string out;
  std::optional<double> zero_tol;
  std::optional<double> defect_tol;
  std::string f_expr;
  std::string g_expr;
};

// Input problems detected after option parsing map to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--param expects K=V, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw InputError("--param " + key + ": not a real number '" + value + "'");
    out[key] = v;
  }
  return out;
}

IntegrableSystem load(const RunConfig& cfg) {
  const ParamMap overrides = parse_params(cfg.params);
  if (!cfg.builtin_name.empty()) return builtin(cfg.builtin_name, overrides);
  std::ifstream in(cfg.system_path);
  if (!in) throw InputError("cannot open system document " + cfg.system_path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (overrides.empty()) return load_system(buf.str());
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SystemError("", std::string("invalid JSON: ") + e.what());
  }
  for (const auto& [k, v] : overrides) doc["parameters"][k] = v;
  return load_system(doc.dump());
}

Point parse_point(const std::string& text, int n) {
  if (text.empty()) throw InputError("--x0 is required");
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      values.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw InputError("--x0: not a real number '" + item + "'");
    }
    if (used != item.size()) throw InputError("--x0: not a real number '" + item + "'");
  }
  if (static_cast<int>(values.size()) != n) {
    throw InputError("--x0 needs " + std::to_string(n) + " components, got " + std::to_string(values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), n);
}

SampleBox make_box(const RunConfig& cfg, int n) {
  SampleBox box = SampleBox::cube(n, -2.0, 2.0, cfg.samples, cfg.seed);
  if (cfg.box.empty()) return box;
  if (cfg.box.size() != 1 && static_cast<int>(cfg.box.size()) != n) {
    throw InputError("--box takes one lo:hi for all axes or one per axis");
  }
  for (int i = 0; i < n; ++i) {
    const std::string& spec = cfg.box.size() == 1 ? cfg.box.front() : cfg.box[static_cast<std::size_t>(i)];
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw InputError("--box expects lo:hi, got '" + spec + "'");
    try {
      box.lower[static_cast<std::size_t>(i)] = std::stod(spec.substr(0, colon));
      box.upper[static_cast<std::size_t>(i)] = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("--box expects lo:hi, got '" + spec + "'");
    }
  }
  try {
    box.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return box;
}

Tolerances make_tolerances(const RunConfig& cfg) {
  Tolerances tol;
  if (cfg.zero_tol) tol.zero = *cfg.zero_tol;
  if (cfg.defect_tol) tol.defect = *cfg.defect_tol;
  if (!(tol.zero > 0.0) || !(tol.defect > 0.0)) throw InputError("tolerances must be positive");
  return tol;
}

IntegratorConfig make_integrator(const RunConfig& cfg) {
  IntegratorConfig ic;
  try {
    ic.method = parse_method(cfg.method);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  ic.step = cfg.step;
  ic.rtol = cfg.rtol;
  ic.atol = cfg.atol;
  ic.t0 = cfg.t0;
  ic.t1 = cfg.t1;
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return ic;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
  } else {
    write_file_atomic(cfg.out, text);
  }
}

json header(const IntegrableSystem& sys, const RunConfig& cfg, const Tolerances& tol) {
  return {{"system", sys.name}, {"system_hash", system_hash(sys)}, {"seed", cfg.seed}, {"tolerances", to_json(tol)}};
}

struct Suite {
  json entries = json::array();
  std::vector<std::string> failures;

  void add(const VerificationReport& r, const std::string& scope) {
    json j = to_json(r);
    j["scope"] = scope;
    entries.push_back(j);
    if (!r.passed()) {
      failures.push_back(scope + ": " + r.check + " max residual " + fmt17(r.max_residual) + " > " +
                         fmt17(r.tolerance) + " (evaluated " + std::to_string(r.evaluated) + ")");
    }
  }
};

void run_identity_suites(const IntegrableSystem& sys, const std::vector<Point>& pts, const BracketAxiomReport* axioms,
                         const Tolerances& tol, const std::string& scope, Suite& suite) {
  for (const auto& r : verify_conservation(sys, pts)) suite.add(r, scope);
  suite.add(verify_realization(sys, pts, 1e-8, tol), scope);
  suite.add(verify_divergence_free(sys, pts, 1e-6, tol), scope);
  const IdentityReport ids = identity_residuals(sys, pts, 1e-7, tol);
  suite.add(ids.inverse_nu, scope);
  for (const auto& r : ids.transport) suite.add(r, scope);
  if (axioms) {
    suite.add(axioms->antisymmetry, scope);
    suite.add(axioms->leibniz, scope);
    suite.add(axioms->casimir, scope);
    suite.add(axioms->jacobi, scope);
    suite.add(axioms->hamiltonian, scope);
  }
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const IntegrableSystem sys = load(cfg);
  const Tolerances tol = make_tolerances(cfg);
  const SampleBox box = make_box(cfg, sys.n);
  for (const auto& w : sys.warnings) err << "warning: " << w << '\n';

  auto in_omega0 = [&](const IntegrableSystem& s) {
    return [&s, &tol](const Point& x) { return classify(s, x, tol).in_omega0; };
  };

  Suite suite;
  const SampleSet direct = sample_points(box, in_omega0(sys));
  const std::vector<Point> axiom_pts(direct.points.begin(),
                                     direct.points.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(50, direct.points.size())));
  const BracketAxiomReport axioms = check_bracket_axioms(sys, axiom_pts, cfg.seed, 20, tol);
  run_identity_suites(sys, direct.points, &axioms, tol, "direct", suite);

  json report = header(sys, cfg, tol);
  report["samples"] = {{"requested", box.count}, {"accepted", direct.points.size()}, {"rejected", direct.rejected}};
  report["box"] = {{"lower", box.lower}, {"upper", box.upper}};

  const bool constant_nu = has_constant_nu(sys, box, tol);
  report["nu_constant"] = constant_nu;
  if (constant_nu) {
    VerificationReport div_x("div X (constant nu)", 1e-12);
    for (const auto& x : direct.points) div_x.record(std::abs(divergence(sys.field, x)), x);
    suite.add(div_x, "direct");
  }
  if (sys.mu) {
    const IntegrableSystem rescaled = apply_rescaling(sys);
    const SampleSet pts = sample_points(box, in_omega0(rescaled));
    run_identity_suites(rescaled, pts.points, nullptr, tol, "rescaled", suite);
    if (constant_nu) {
      const AdmissibilityReport adm = check_mu_admissibility(sys, box, tol);
      report["mu_admissibility"] = to_json(adm);
      if (!adm.admissible) suite.failures.push_back("rescaled: mu not admissible: " + adm.reason);
    }
  }
  report["suites"] = suite.entries;
  report["pass"] = suite.failures.empty();
  emit(cfg, report.dump(2) + "\n", out);
  for (const auto& f : suite.failures) err << "FAIL " << f << '\n';
  return suite.failures.empty() ? kPass : kFail;
}

int cmd_integrate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const IntegrableSystem sys = load(cfg);
  const Tolerances tol = make_tolerances(cfg);
  const IntegratorConfig ic = make_integrator(cfg);
  const Point x0 = parse_point(cfg.x0, sys.n);

  IntegrableSystem work = sys;
  if (cfg.rescaled) {
    if (!sys.mu) throw InputError("--rescaled needs a system with mu");
    double mu0 = 0.0;
    try {
      mu0 = (*sys.mu)(x0);
    } catch (const EvalDomainError& e) {
      err << "x0 ∉ Ω₀: mu not evaluable at x0 (" << e.what() << ")\n";
      return kFail;
    }
    if (tol.is_zero(mu0, x0)) {
      err << "x0 ∉ Ω₀: mu(x0) = 0, the time change dt = mu dt' degenerates\n";
      return kFail;
    }
    work = apply_rescaling(sys);
  }
  if (cfg.chart) {
    const DomainVerdict v = classify(work, x0, tol);
    if (!v.in_omega0) {
      err << "x0 ∉ Ω₀: " << v.reason << '\n';
      return kFail;
    }
  }

  Trajectory traj;
  try {
    traj = integrate(work, x0, ic);
  } catch (const EvalDomainError& e) {
    err << "x0 is not in the evaluation domain: " << e.what() << '\n';
    return kFail;
  }
  traj.rescaled = cfg.rescaled;

  std::ostringstream csv;
  if (cfg.chart) {
    write_csv(csv, traj, [&](const Point& x) -> Eigen::VectorXd {
      try {
        return chart(work, x, tol);
      } catch (const DomainRejection&) {
        return {};
      }
    });
  } else {
    write_csv(csv, traj);
  }
  emit(cfg, csv.str(), out);
  if (!traj.complete()) {
    err << "trajectory truncated (" << to_string(traj.status) << "): " << traj.reason << '\n';
    return kFail;
  }
  return kPass;
}

int cmd_linearize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const IntegrableSystem sys = load(cfg);
  const Tolerances tol = make_tolerances(cfg);
  const IntegratorConfig ic = make_integrator(cfg);
  const Point x0 = parse_point(cfg.x0, sys.n);
  LinearizationCertificate cert;
  try {
    cert = certify_linearization(sys, x0, ic, tol);
  } catch (const DomainRejection& e) {
    err << e.what() << '\n';
    return kFail;
  }
  json j = to_json(cert);
  j["system_hash"] = system_hash(sys);
  j["seed"] = cfg.seed;
  emit(cfg, j.dump(2) + "\n", out);
  if (!cert.pass) err << "FAIL linearization defect " << fmt17(cert.max_defect) << " > " << fmt17(tol.defect) << '\n';
  return cert.pass ? kPass : kFail;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const IntegrableSystem sys = load(cfg);
  const Tolerances tol = make_tolerances(cfg);
  const Point x = parse_point(cfg.x0, sys.n);
  json j = header(sys, cfg, tol);
  j["x"] = to_json(x);
  j["verdict"] = to_json(classify(sys, x, tol));
  emit(cfg, j.dump(2) + "\n", out);
  return kPass;
}

int cmd_bracket(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const IntegrableSystem sys = load(cfg);
  const Point x = parse_point(cfg.x0, sys.n);
  if (cfg.f_expr.empty()) throw InputError("--f is required");
  auto field = [&](const std::string& text, const char* flag) {
    try {
      return ScalarField::parse(text, sys.n, sys.parameters);
    } catch (const ParseError& e) {
      throw InputError(std::string(flag) + ": " + e.what());
    }
  };
  const ScalarField f = field(cfg.f_expr, "--f");
  const ScalarField g = cfg.g_expr.empty() ? sys.hamiltonian : field(cfg.g_expr, "--g");
  double value = 0.0;
  try {
    value = bracket(BracketContext::of(sys), f, g, x);
  } catch (const EvalDomainError& e) {
    err << "bracket not evaluable at x: " << e.what() << '\n';
    return kFail;
  }
  emit(cfg, fmt17(value) + "\n", out);
  return kPass;
}

void add_system_options(CLI::App& sub, RunConfig& cfg) {
  auto* system = sub.add_option("--system", cfg.system_path, "System document (JSON)");
  auto* builtin_opt = sub.add_option("--builtin", cfg.builtin_name, "Built-in system: lotka-volterra | euler");
  system->excludes(builtin_opt);
  builtin_opt->excludes(system);
  sub.add_option("--param", cfg.params, "Parameter override K=V (repeatable)");
  sub.add_option("--zero-tol", cfg.zero_tol, "Zero band factor (default 1e-9)");
  sub.add_option("--seed", cfg.seed, "RNG seed for sampling");
  sub.add_option("--out", cfg.out, "Output path (default stdout)");
}

void add_integrator_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--x0", cfg.x0, "Initial point v1,v2,...")->required();
  sub.add_option("--t0", cfg.t0, "Start time");
  sub.add_option("--t1", cfg.t1, "End time");
  sub.add_option("--method", cfg.method, "rk4 | rk45");
  sub.add_option("--step", cfg.step, "Fixed step for rk4");
  sub.add_option("--rtol", cfg.rtol, "Relative tolerance for rk45");
  sub.add_option("--atol", cfg.atol, "Absolute tolerance for rk45");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hamilton-Poisson realization and linearization of integrable systems", "hpl"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* verify = app.add_subcommand("verify", "Check realization, divergence, chart identities, bracket axioms");
  add_system_options(*verify, cfg);
  verify->add_option("--box", cfg.box, "Sample box lo:hi (once for all axes or once per axis)");
  verify->add_option("--samples", cfg.samples, "Number of sample draws");

  auto* integ = app.add_subcommand("integrate", "Integrate x' = X(x) with s' = -div X; CSV output");
  add_system_options(*integ, cfg);
  add_integrator_options(*integ, cfg);
  integ->add_flag("--chart", cfg.chart, "Append chart columns u1..un");
  integ->add_flag("--rescaled", cfg.rescaled, "Integrate mu*X in the time t'");

  auto* lin = app.add_subcommand("linearize", "Certify u_i(t) = u_i(0) exp(s(t)) along a trajectory");
  add_system_options(*lin, cfg);
  add_integrator_options(*lin, cfg);
  lin->add_option("--defect-tol", cfg.defect_tol, "Certificate threshold (default 1e-6)");

  auto* cls = app.add_subcommand("classify", "Domain-set membership of a point");
  add_system_options(*cls, cfg);
  cls->add_option("--x0", cfg.x0, "Point v1,v2,...")->required();

  auto* br = app.add_subcommand("bracket", "Evaluate {f,g} at a point");
  add_system_options(*br, cfg);
  br->add_option("--x0", cfg.x0, "Point v1,v2,...")->required();
  br->add_option("--f", cfg.f_expr, "First function")->required();
  br->add_option("--g", cfg.g_expr, "Second function (default: the Hamiltonian)");

  try {
    // CLI11 consumes a reversed argument vector without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  auto* chosen = app.get_subcommands().front();
  if (cfg.system_path.empty() && cfg.builtin_name.empty()) {
    err << "error: one of --system or --builtin is required\n";
    return kInputError;
  }
  try {
    if (chosen == verify) return cmd_verify(cfg, out, err);
    if (chosen == integ) return cmd_integrate(cfg, out, err);
    if (chosen == lin) return cmd_linearize(cfg, out, err);
    if (chosen == cls) return cmd_classify(cfg, out, err);
    return cmd_bracket(cfg, out, err);
  } catch (const SystemError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainRejection& e) {
    err << e.what() << '\n';
    return kFail;
  } catch (const EvalDomainError& e) {
    err << "evaluation error: " << e.what() << '\n';
    return kFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace hpl::cli
