#include "phia/scenario_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "phia/error.hpp"

namespace phia {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(errc::kConfigInvalid, fmt::format("{}: {}", field, what));
}

std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

void require_keys(const YAML::Node& node, const std::string& field,
                  const std::set<std::string>& allowed) {
  if (!node.IsMap()) invalid(field, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) invalid(join(field, key), "unknown key");
  }
}

YAML::Node required(const YAML::Node& parent, const std::string& field,
                    const std::string& key) {
  const YAML::Node n = parent[key];
  if (!n) invalid(join(field, key), "missing");
  return n;
}

double as_double(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) invalid(field, "expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    invalid(field, fmt::format("'{}' is not a number", n.Scalar()));
  }
}

std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) invalid(field, "expected a string");
  return n.as<std::string>();
}

// A scalar is accepted when size == 1.
Vector as_vector(const YAML::Node& n, const std::string& field, int size) {
  if (n.IsScalar() && size == 1) return Vector::Constant(1, as_double(n, field));
  if (!n.IsSequence()) invalid(field, fmt::format("expected a list of {} numbers", size));
  if (static_cast<int>(n.size()) != size) {
    invalid(field, fmt::format("expected {} entries, got {}", size, n.size()));
  }
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    v(i) = as_double(n[i], fmt::format("{}[{}]", field, i));
  }
  return v;
}

// m x m gain: scalar (m == 1), flat list (diagonal of length m) or list of rows.
Matrix as_gain(const YAML::Node& n, const std::string& field, int m) {
  if (n.IsScalar()) {
    if (m != 1) invalid(field, fmt::format("scalar gain needs a single input, system has {}", m));
    return Matrix::Constant(1, 1, as_double(n, field));
  }
  if (!n.IsSequence()) invalid(field, "expected a number or list");
  if (n.size() > 0 && n[0].IsSequence()) {
    if (static_cast<int>(n.size()) != m) {
      invalid(field, fmt::format("expected {} rows, got {}", m, n.size()));
    }
    Matrix a(m, m);
    for (int i = 0; i < m; ++i) {
      a.row(i) = as_vector(n[i], fmt::format("{}[{}]", field, i), m).transpose();
    }
    return a;
  }
  if (static_cast<int>(n.size()) != m) {
    invalid(field, fmt::format("diagonal gain needs {} entries, got {}", m, n.size()));
  }
  return as_vector(n, field, m).asDiagonal();
}

void apply_override(YAML::Node& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(errc::kConfigParse, fmt::format("--set '{}': expected key=value", item));
  }
  const std::string key = item.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(item.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw Error(errc::kConfigParse, fmt::format("--set '{}': {}", item, e.what()));
  }
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) {
      throw Error(errc::kConfigParse, fmt::format("--set '{}': empty key segment", item));
    }
    parts.push_back(part);
  }
  YAML::Node cur;
  cur.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (cur[parts[i]] && !cur[parts[i]].IsMap()) {
      throw Error(errc::kConfigParse,
                  fmt::format("--set '{}': '{}' is not a section", item, parts[i]));
    }
    YAML::Node next = cur[parts[i]];
    cur.reset(next);
  }
  cur[parts.back()] = value;
}

DisturbanceSchedule parse_disturbance(const YAML::Node& n, int m) {
  const std::string field = "disturbance";
  if (!n) invalid(field, "missing");
  if (n.IsScalar() && n.Scalar() == "none") {
    return DisturbanceSchedule::constant(Vector::Zero(m));
  }
  if (!n.IsSequence() || n.size() == 0) {
    invalid(field, "expected 'none' or a list of {t, value} segments");
  }
  std::vector<DisturbanceSegment> segs;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string f = fmt::format("{}[{}]", field, i);
    require_keys(n[i], f, {"t", "value"});
    segs.push_back({as_double(required(n[i], f, "t"), f + ".t"),
                    as_vector(required(n[i], f, "value"), f + ".value", m)});
  }
  try {
    return DisturbanceSchedule(std::move(segs));
  } catch (const Error& e) {
    invalid(field, e.detail());
  }
}

IntegratorConfig parse_integrator(const YAML::Node& n) {
  IntegratorConfig cfg;
  const std::string field = "integrator";
  if (!n) return cfg;
  require_keys(n, field,
               {"method", "step", "rel_tol", "abs_tol", "min_step", "max_step", "t_final"});
  if (n["method"]) {
    const auto m = as_string(n["method"], field + ".method");
    if (m == "fixed-rk4") {
      cfg.method = IntegratorMethod::kFixedRk4;
    } else if (m == "adaptive-rk45") {
      cfg.method = IntegratorMethod::kAdaptiveRk45;
    } else {
      invalid(field + ".method", fmt::format("unknown method '{}'", m));
    }
  }
  const std::pair<const char*, double*> fields[] = {
      {"step", &cfg.step},         {"rel_tol", &cfg.rel_tol},
      {"abs_tol", &cfg.abs_tol},   {"min_step", &cfg.min_step},
      {"max_step", &cfg.max_step}, {"t_final", &cfg.t_final}};
  for (const auto& [key, dst] : fields) {
    if (n[key]) *dst = as_double(n[key], join(field, key));
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    invalid(field, e.detail());
  }
  return cfg;
}

Scenario interpret(const YAML::Node& root, RegisteredSystem& system_out) {
  require_keys(root, "",
               {"name", "system", "controller", "initial_state", "disturbance",
                "integrator", "settling", "outputs"});
  Scenario sc;
  sc.name = root["name"] ? as_string(root["name"], "name") : "scenario";

  const YAML::Node sys = required(root, "", "system");
  require_keys(sys, "system", {"id", "params"});
  sc.system_id = as_string(required(sys, "system", "id"), "system.id");
  if (sys["params"]) {
    require_keys(sys["params"], "system.params",
                 [&] {
                   std::set<std::string> keys;
                   try {
                     for (const auto& [k, v] : default_parameters(sc.system_id)) keys.insert(k);
                   } catch (const Error& e) {
                     invalid("system.id", e.detail());
                   }
                   return keys;
                 }());
    for (const auto& kv : sys["params"]) {
      const auto key = kv.first.as<std::string>();
      sc.params[key] = as_double(kv.second, "system.params." + key);
    }
  }
  try {
    system_out = build_system(sc.system_id, sc.params);
  } catch (const Error& e) {
    invalid(e.code() == errc::kUnknownSystem ? "system.id" : "system.params", e.detail());
  }
  const int n = system_out.transform.n();
  const int m = system_out.transform.m();

  const YAML::Node ctl = root["controller"];
  if (ctl) {
    require_keys(ctl, "controller", {"kind", "gains"});
    try {
      sc.controller = parse_controller_kind(
          as_string(required(ctl, "controller", "kind"), "controller.kind"));
    } catch (const Error& e) {
      if (e.code() == errc::kConfigInvalid) throw;
      invalid("controller.kind", e.detail());
    }
    const YAML::Node g = ctl["gains"];
    try {
      if (sc.controller == ControllerKind::kIntegralAction) {
        const std::string f = "controller.gains";
        if (!g || g.IsNull()) invalid(f, "missing");
        require_keys(g, f, {"k_i", "j_c1", "r_c1", "r_c2"});
        const Matrix j_c1 = g["j_c1"] ? as_gain(g["j_c1"], f + ".j_c1", m)
                                      : Matrix(Matrix::Zero(m, m));
        sc.ia_gains = IaGains(as_gain(required(g, f, "k_i"), f + ".k_i", m), j_c1,
                              as_gain(required(g, f, "r_c1"), f + ".r_c1", m),
                              as_gain(required(g, f, "r_c2"), f + ".r_c2", m));
      } else if (sc.controller == ControllerKind::kReferencePid) {
        const std::string f = "controller.gains";
        if (!g || g.IsNull()) invalid(f, "missing");
        require_keys(g, f, {"k1", "k_p_outer", "k_i", "k3"});
        sc.pid_gains = PidGains(as_gain(required(g, f, "k1"), f + ".k1", m),
                                as_gain(required(g, f, "k_p_outer"), f + ".k_p_outer", m),
                                as_gain(required(g, f, "k_i"), f + ".k_i", m),
                                as_gain(required(g, f, "k3"), f + ".k3", m));
      } else if (g && !g.IsNull()) {
        invalid("controller.gains", "not used with controller kind 'none'");
      }
    } catch (const Error& e) {
      if (e.code() == errc::kConfigInvalid) throw;
      invalid("controller.gains", e.what());
    }
  }

  const YAML::Node init = required(root, "", "initial_state");
  require_keys(init, "initial_state", {"q", "p", "zeta"});
  sc.q0 = as_vector(required(init, "initial_state", "q"), "initial_state.q", n);
  sc.p0 = init["p"] ? as_vector(init["p"], "initial_state.p", n) : Vector(Vector::Zero(n));
  sc.zeta0 = init["zeta"] ? as_vector(init["zeta"], "initial_state.zeta", m)
                          : Vector(Vector::Zero(m));

  sc.disturbance = parse_disturbance(root["disturbance"], m);
  sc.integrator = parse_integrator(root["integrator"]);

  if (const YAML::Node s = root["settling"]) {
    require_keys(s, "settling", {"band", "hold"});
    if (s["band"]) sc.settling.band = as_double(s["band"], "settling.band");
    if (s["hold"]) sc.settling.hold = as_double(s["hold"], "settling.hold");
  }
  if (const YAML::Node o = root["outputs"]) {
    require_keys(o, "outputs", {"csv", "gnuplot"});
    if (o["csv"]) sc.outputs.csv = as_string(o["csv"], "outputs.csv");
    if (o["gnuplot"]) sc.outputs.gnuplot = as_string(o["gnuplot"], "outputs.gnuplot");
  }

  try {
    validate_scenario(sc, system_out);
  } catch (const Error& e) {
    const std::string& d = e.detail();
    const auto colon = d.find(':');
    if (colon != std::string::npos && d.find(' ') > colon) {
      invalid(d.substr(0, colon), d.substr(colon + 2));
    }
    invalid("scenario", d);
  }
  return sc;
}

LoadedScenario load(const YAML::Node& parsed, const std::vector<std::string>& overrides) {
  YAML::Node root = parsed;
  if (!root.IsMap()) {
    throw Error(errc::kConfigParse, "top level of the scenario must be a mapping");
  }
  for (const auto& o : overrides) apply_override(root, o);
  LoadedScenario out{{}, {}};
  try {
    out.scenario = interpret(root, out.system);
  } catch (const YAML::Exception& e) {
    throw Error(errc::kConfigInvalid, fmt::format("scenario: {}", e.what()));
  }
  return out;
}

}  // namespace

LoadedScenario load_scenario_text(const std::string& text,
                                  const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(errc::kConfigParse, e.what());
  }
  return load(root, overrides);
}

LoadedScenario load_scenario_file(const std::string& path,
                                  const std::vector<std::string>& overrides) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(errc::kConfigParse, fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << is.rdbuf();
  return load_scenario_text(ss.str(), overrides);
}

std::string scenario_report(const LoadedScenario& loaded) {
  const Scenario& sc = loaded.scenario;
  const auto& ts = loaded.system.transform;
  std::string out;
  out += fmt::format("scenario: {}\n", sc.name);
  out += fmt::format("system: {} (n={}, m={})\n", sc.system_id, ts.n(), ts.m());
  for (const auto& [k, v] : sc.params) out += fmt::format("  {} = {}\n", k, v);
  if (!loaded.system.variant.empty()) {
    out += fmt::format("shaped potential variant: {}\n", loaded.system.variant);
  }
  out += fmt::format("controller: {}\n", to_string(sc.controller));
  out += fmt::format("q0: {}\np0: {}\nzeta0: {}\n", format_vector(sc.q0),
                     format_vector(sc.p0), format_vector(sc.zeta0));
  for (const auto& s : sc.disturbance.segments()) {
    out += fmt::format("disturbance from t={}: {}\n", s.t_start, format_vector(s.value));
  }
  const auto& ic = sc.integrator;
  if (ic.method == IntegratorMethod::kFixedRk4) {
    out += fmt::format("integrator: fixed-rk4 step={} t_final={}\n", ic.step, ic.t_final);
  } else {
    out += fmt::format("integrator: adaptive-rk45 rel_tol={} abs_tol={} t_final={}\n",
                       ic.rel_tol, ic.abs_tol, ic.t_final);
  }
  out += "valid\n";
  return out;
}

}  // namespace phia
