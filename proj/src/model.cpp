#include "hpl/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace hpl {

using nlohmann::json;

SystemError::SystemError(std::string path, const std::string& message)
    : std::invalid_argument(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

std::vector<ScalarField> IntegrableSystem::conserved() const {
  std::vector<ScalarField> out = casimirs;
  out.push_back(hamiltonian);
  return out;
}

void check_shape(const IntegrableSystem& sys) {
  if (sys.n < 3) throw SystemError("n", "dimension must be at least 3");
  if (sys.field.dimension() != sys.n) {
    throw SystemError("equations", "expected " + std::to_string(sys.n) + " equations, got " +
                                       std::to_string(sys.field.dimension()));
  }
  if (static_cast<int>(sys.casimirs.size()) != sys.n - 2) {
    throw SystemError("casimirs", "expected " + std::to_string(sys.n - 2) + " casimirs (n-2), got " +
                                      std::to_string(sys.casimirs.size()));
  }
  auto check_dim = [&](const ScalarField& f, const std::string& path) {
    if (f.dimension() != sys.n) throw SystemError(path, "dimension mismatch");
  };
  for (int i = 0; i < sys.n; ++i) check_dim(sys.field.components[static_cast<std::size_t>(i)], "equations[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < sys.casimirs.size(); ++i) check_dim(sys.casimirs[i], "casimirs[" + std::to_string(i) + "]");
  check_dim(sys.hamiltonian, "hamiltonian");
  check_dim(sys.nu, "nu");
  if (sys.mu) check_dim(*sys.mu, "mu");
}

namespace {

ScalarField parse_field(const json& value, const std::string& path, int n, const ParamMap& params) {
  if (!value.is_string()) throw SystemError(path, "expected an expression string");
  try {
    return ScalarField::parse(value.get<std::string>(), n, params);
  } catch (const ParseError& e) {
    throw SystemError(path, e.what());
  }
}

std::vector<ScalarField> parse_list(const json& doc, const char* key, int n, const ParamMap& params) {
  if (!doc.contains(key)) throw SystemError(key, "missing field");
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw SystemError(key, "expected an array of expression strings");
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_field(arr[i], std::string(key) + "[" + std::to_string(i) + "]", n, params));
  }
  return out;
}

IntegrableSystem make_system(std::string name, int n, ParamMap params, const std::vector<std::string>& equations,
                             const std::vector<std::string>& casimirs, const std::string& hamiltonian,
                             const std::string& nu, const std::optional<std::string>& mu) {
  IntegrableSystem sys;
  sys.name = std::move(name);
  sys.n = n;
  sys.parameters = std::move(params);
  for (const auto& e : equations) sys.field.components.push_back(ScalarField::parse(e, n, sys.parameters));
  for (const auto& c : casimirs) sys.casimirs.push_back(ScalarField::parse(c, n, sys.parameters));
  sys.hamiltonian = ScalarField::parse(hamiltonian, n, sys.parameters);
  sys.nu = ScalarField::parse(nu, n, sys.parameters);
  if (mu) sys.mu = ScalarField::parse(*mu, n, sys.parameters);
  check_shape(sys);
  return sys;
}

std::string expression_text(const ScalarField& f, const std::string& path) {
  if (!f.has_expression()) throw SystemError(path, "closure-backed field cannot be serialized");
  return f.to_string();
}

}  // namespace

IntegrableSystem load_system(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SystemError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SystemError("", "document must be a JSON object");

  IntegrableSystem sys;
  sys.name = doc.value("name", std::string("unnamed"));
  if (!doc.contains("n") || !doc.at("n").is_number_integer()) throw SystemError("n", "missing or non-integer dimension");
  sys.n = doc.at("n").get<int>();
  if (sys.n < 3) throw SystemError("n", "dimension must be at least 3");

  if (doc.contains("parameters")) {
    const json& p = doc.at("parameters");
    if (!p.is_object()) throw SystemError("parameters", "expected an object of name: real");
    for (const auto& [k, v] : p.items()) {
      if (!v.is_number()) throw SystemError("parameters." + k, "expected a real value");
      if (k.empty() || !std::isalpha(static_cast<unsigned char>(k[0]))) throw SystemError("parameters." + k, "invalid name");
      for (char c : k) {
        if (!std::isalnum(static_cast<unsigned char>(c))) throw SystemError("parameters." + k, "invalid name");
      }
      if (k.size() >= 2 && k[0] == 'x' &&
          std::all_of(k.begin() + 1, k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
        throw SystemError("parameters." + k, "name collides with a coordinate variable");
      }
      sys.parameters.emplace(k, v.get<double>());
    }
  }

  sys.field.components = parse_list(doc, "equations", sys.n, sys.parameters);
  sys.casimirs = parse_list(doc, "casimirs", sys.n, sys.parameters);
  if (!doc.contains("hamiltonian")) throw SystemError("hamiltonian", "missing field");
  sys.hamiltonian = parse_field(doc.at("hamiltonian"), "hamiltonian", sys.n, sys.parameters);
  if (!doc.contains("nu")) throw SystemError("nu", "missing field");
  sys.nu = parse_field(doc.at("nu"), "nu", sys.n, sys.parameters);
  if (doc.contains("mu") && !doc.at("mu").is_null()) sys.mu = parse_field(doc.at("mu"), "mu", sys.n, sys.parameters);
  check_shape(sys);
  return sys;
}

IntegrableSystem load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SystemError("", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_system(buf.str());
}

std::string to_document(const IntegrableSystem& sys) {
  json doc;
  doc["name"] = sys.name;
  doc["n"] = sys.n;
  doc["parameters"] = json::object();
  for (const auto& [k, v] : sys.parameters) doc["parameters"][k] = v;
  doc["equations"] = json::array();
  for (std::size_t i = 0; i < sys.field.components.size(); ++i) {
    doc["equations"].push_back(expression_text(sys.field.components[i], "equations[" + std::to_string(i) + "]"));
  }
  doc["casimirs"] = json::array();
  for (std::size_t i = 0; i < sys.casimirs.size(); ++i) {
    doc["casimirs"].push_back(expression_text(sys.casimirs[i], "casimirs[" + std::to_string(i) + "]"));
  }
  doc["hamiltonian"] = expression_text(sys.hamiltonian, "hamiltonian");
  doc["nu"] = expression_text(sys.nu, "nu");
  if (sys.mu) doc["mu"] = expression_text(*sys.mu, "mu");
  return doc.dump(2);
}

std::string system_hash(const IntegrableSystem& sys) {
  std::string text;
  try {
    text = to_document(sys);
  } catch (const SystemError&) {
    text = sys.name;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

IntegrableSystem builtin_lotka_volterra() {
  return make_system("lotka-volterra", 3, {},
                     {"x1*(x2+x3)", "x2*(-x1+x3)", "x3*(-x1-x2)"},
                     {"x2*(x1+x2+x3)/(x1*x3)"},
                     "x1+x2+x3",
                     "-(x1^2*x3^2)/(x1+x2+x3)",
                     std::nullopt);
}

IntegrableSystem builtin_euler(double i1, double i2, double i3) {
  if (i1 == 0.0 || i2 == 0.0 || i3 == 0.0) throw SystemError("parameters", "inertia components must be nonzero");
  IntegrableSystem sys = make_system("euler", 3, {{"I1", i1}, {"I2", i2}, {"I3", i3}},
                                     {"(I2-I3)/(I2*I3)*x2*x3", "(I3-I1)/(I1*I3)*x1*x3", "(I1-I2)/(I1*I2)*x1*x2"},
                                     {"(x1^2+x2^2+x3^2)/2"},
                                     "(x1^2/I1+x2^2/I2+x3^2/I3)/2",
                                     "-1",
                                     std::string("x1"));
  if (i2 == i3) sys.warnings.emplace_back("I2 == I3: div(mu*X) vanishes identically, mu = x1 is not admissible");
  return sys;
}

IntegrableSystem builtin(std::string_view name, const ParamMap& params) {
  auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "lotka-volterra" || name == "lv") {
    if (!params.empty()) throw SystemError("parameters", "lotka-volterra takes no parameters");
    return builtin_lotka_volterra();
  }
  if (name == "euler" || name == "rigid-body") {
    for (const auto& [k, v] : params) {
      if (k != "I1" && k != "I2" && k != "I3") throw SystemError("parameters." + k, "unknown parameter for euler");
    }
    return builtin_euler(get("I1", 1.0), get("I2", 2.0), get("I3", 3.0));
  }
  throw SystemError("builtin", "unknown built-in system '" + std::string(name) + "'");
}

IntegrableSystem apply_rescaling(const IntegrableSystem& sys) {
  if (!sys.mu) throw SystemError("mu", "system has no rescaling function mu");
  IntegrableSystem out;
  out.name = sys.name + "/mu";
  out.n = sys.n;
  out.parameters = sys.parameters;
  out.field = scale(*sys.mu, sys.field);
  out.casimirs = sys.casimirs;
  out.hamiltonian = sys.hamiltonian;
  out.nu = sys.nu * *sys.mu;
  out.warnings = sys.warnings;
  return out;
}

SampleBox SampleBox::cube(int n, double lo, double hi, std::size_t count, std::uint64_t seed) {
  SampleBox box;
  box.lower.assign(static_cast<std::size_t>(n), lo);
  box.upper.assign(static_cast<std::size_t>(n), hi);
  box.count = count;
  box.seed = seed;
  box.validate();
  return box;
}

void SampleBox::validate() const {
  if (lower.empty() || lower.size() != upper.size()) throw std::invalid_argument("sample box bounds mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw std::invalid_argument("sample box needs lower < upper on every axis");
  }
  if (count < 1) throw std::invalid_argument("sample count must be at least 1");
}

SampleSet sample_points(const SampleBox& box, const std::function<bool(const Point&)>& predicate) {
  box.validate();
  std::mt19937_64 rng(box.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleSet out;
  out.points.reserve(box.count);
  const auto n = static_cast<Eigen::Index>(box.lower.size());
  for (std::size_t k = 0; k < box.count; ++k) {
    Point x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i);
      x[i] = box.lower[j] + (box.upper[j] - box.lower[j]) * unit(rng);
    }
    if (!predicate || predicate(x)) {
      out.points.push_back(std::move(x));
    } else {
      ++out.rejected;
    }
  }
  return out;
}

std::vector<VerificationReport> verify_conservation(const IntegrableSystem& sys, const std::vector<Point>& pts,
                                                    double tol) {
  const auto quantities = sys.conserved();
  std::vector<VerificationReport> reports;
  for (std::size_t k = 0; k < quantities.size(); ++k) {
    const std::string label = k + 1 == quantities.size() ? "H" : "C" + std::to_string(k + 1);
    reports.emplace_back("conservation <grad " + label + ", X>", tol);
  }
  for (const auto& x : pts) {
    try {
      const Point v = sys.field(x);
      for (std::size_t k = 0; k < quantities.size(); ++k) {
        const Eigen::VectorXd g = gradient(quantities[k], x);
        const double scale = 1.0 + (g.cwiseAbs().array() * v.cwiseAbs().array()).sum();
        reports[k].record(std::abs(g.dot(v)) / scale, x);
      }
    } catch (const EvalDomainError&) {
      for (auto& r : reports) r.skip();
    }
  }
  return reports;
}

}  // namespace hpl
