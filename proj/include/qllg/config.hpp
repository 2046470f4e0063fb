#pragma once

// Config-file handling: Hamiltonian documents and sweep configs in TOML
// (primary) or JSON, plus the run manifest that makes every output
// directory re-executable.

#include <json.hpp>

#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/dynamics.hpp"
#include "qllg/hamiltonian.hpp"
#include "qllg/toml.hpp"

namespace qllg {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hamiltonian documents.
//
// JSON, explicit term list:
//   {"n_sites": 2, "terms": [{"sites": [[0,"X"],[1,"X"]], "coeff": 2.0}, ...]}
// JSON or TOML, chain shorthand:
//   {"model": "heisenberg_chain", "n_sites": 12, "J": 2.0, "h": 1.5}
// TOML additionally accepts a compact string form for explicit terms:
//   terms = ["2.0 X0 X1", "-1.5 Z0"]

inline HamiltonianOp hamiltonian_from_json(const nlohmann::json& j) {
  if (j.contains("model")) {
    if (j.at("model") != "heisenberg_chain")
      throw ConfigError("unknown model '" + j.at("model").get<std::string>() + "'");
    SpinChainParams p;
    p.n_sites = j.at("n_sites").get<int>();
    p.J = j.value("J", 1.0);
    p.h = j.value("h", 0.0);
    return build_spin_chain(p);
  }
  if (!j.contains("terms")) throw ConfigError("hamiltonian document needs 'model' or 'terms'");
  int n = j.at("n_sites").get<int>();
  std::vector<PauliString> terms;
  for (const auto& jt : j.at("terms")) {
    PauliString t;
    t.coeff = jt.at("coeff").get<double>();
    for (const auto& site : jt.at("sites")) {
      int idx = site.at(0).get<int>();
      std::string ax = site.at(1).get<std::string>();
      if (ax.size() != 1) throw ConfigError("axis must be a single letter, got '" + ax + "'");
      t.sites.emplace_back(idx, axis_from_char(ax[0]));
    }
    terms.push_back(std::move(t));
  }
  return HamiltonianOp(n, std::move(terms));
}

inline nlohmann::json hamiltonian_to_json(const HamiltonianOp& h) {
  nlohmann::json j;
  j["n_sites"] = h.n_sites();
  j["terms"] = nlohmann::json::array();
  for (const auto& t : h.terms()) {
    nlohmann::json jt;
    jt["coeff"] = t.coeff;
    jt["sites"] = nlohmann::json::array();
    for (auto [s, ax] : t.sites)
      jt["sites"].push_back({s, std::string(1, char(ax))});
    j["terms"].push_back(std::move(jt));
  }
  return j;
}

// "coeff A<site> A<site> ..." e.g. "2.0 X0 X1" or "-1.5 Z2".
inline PauliString pauli_string_from_compact(const std::string& text) {
  std::istringstream is(text);
  PauliString t;
  if (!(is >> t.coeff)) throw ConfigError("compact term '" + text + "': missing coefficient");
  std::string tok;
  while (is >> tok) {
    if (tok.size() < 2) throw ConfigError("compact term '" + text + "': bad factor '" + tok + "'");
    Axis ax = axis_from_char(tok[0]);
    int site = 0;
    try {
      site = std::stoi(tok.substr(1));
    } catch (const std::exception&) {
      throw ConfigError("compact term '" + text + "': bad site in '" + tok + "'");
    }
    t.sites.emplace_back(site, ax);
  }
  return t;
}

inline HamiltonianOp hamiltonian_from_toml(const toml::Table& t, const std::string& prefix = "hamiltonian") {
  auto key = [&](const std::string& k) { return prefix.empty() ? k : prefix + "." + k; };
  if (toml::has(t, key("model"))) {
    if (toml::require_str(t, key("model")) != "heisenberg_chain")
      throw ConfigError("unknown model '" + toml::require_str(t, key("model")) + "'");
    SpinChainParams p;
    p.n_sites = int(toml::require_num(t, key("n_sites")));
    p.J = toml::get_num(t, key("J"), 1.0);
    p.h = toml::get_num(t, key("h"), 0.0);
    return build_spin_chain(p);
  }
  auto it = t.find(key("terms"));
  if (it == t.end()) throw ConfigError("hamiltonian table needs 'model' or 'terms'");
  if (it->second.kind != toml::Value::Kind::StrList)
    throw ConfigError("terms must be an array of compact term strings");
  int n = int(toml::require_num(t, key("n_sites")));
  std::vector<PauliString> terms;
  for (const auto& s : it->second.strs) terms.push_back(pauli_string_from_compact(s));
  return HamiltonianOp(n, std::move(terms));
}

inline HamiltonianOp hamiltonian_from_file(const std::string& path) {
  if (path.ends_with(".json")) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    return hamiltonian_from_json(nlohmann::json::parse(f));
  }
  return hamiltonian_from_toml(toml::parse_file(path));
}

// ---------------------------------------------------------------------------
// Sweep configuration.

inline std::vector<double> default_h_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 50; ++i) g.push_back(double(i) / 10.0);
  return g;
}

struct SweepConfig {
  int n_sites = 12;
  double J = 2.0;
  std::vector<double> h_grid = default_h_grid();
  QLLGParams qllg;             // t_max == 0 means auto: 10 * tau from the measured gap
  double t_max_cap = 2000.0;   // ceiling on the auto horizon near closing gaps
  std::vector<std::uint64_t> seeds = {42};
  std::string out_dir = "out";
  int record_stride = 32;
  bool strict = false;

  void validate() const {
    if (n_sites < 2) throw ConfigError("sweep: n_sites must be >= 2");
    if (h_grid.empty()) throw ConfigError("sweep: empty h grid");
    for (double h : h_grid)
      if (!std::isfinite(h)) throw ConfigError("sweep: non-finite h value");
    if (seeds.empty()) throw ConfigError("sweep: need at least one seed");
    if (record_stride < 1) throw ConfigError("sweep: record_stride must be >= 1");
    if (!(t_max_cap > 0.0)) throw ConfigError("sweep: t_max_cap must be > 0");
    qllg.validate();
  }
};

inline SweepConfig sweep_config_from_toml(const toml::Table& t) {
  SweepConfig c;
  c.n_sites = int(toml::get_num(t, "model.n_sites", c.n_sites));
  c.J = toml::get_num(t, "model.J", c.J);
  if (toml::has(t, "sweep.h_grid")) {
    c.h_grid = toml::get_num_list(t, "sweep.h_grid");
  } else if (toml::has(t, "sweep.h_min") || toml::has(t, "sweep.h_max")) {
    double lo = toml::get_num(t, "sweep.h_min", 0.0);
    double hi = toml::get_num(t, "sweep.h_max", 5.0);
    double step = toml::get_num(t, "sweep.h_step", 0.1);
    if (!(step > 0.0) || hi < lo) throw ConfigError("sweep: bad h range");
    c.h_grid.clear();
    int count = int(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= count; ++i) c.h_grid.push_back(lo + double(i) * step);
  }
  c.qllg.kappa = toml::get_num(t, "qllg.kappa", c.qllg.kappa);
  c.qllg.hbar = toml::get_num(t, "qllg.hbar", c.qllg.hbar);
  c.qllg.dt = toml::get_num(t, "qllg.dt", c.qllg.dt);
  c.qllg.t_max = toml::get_num(t, "qllg.t_max", c.qllg.t_max);
  c.qllg.residual_tol = toml::get_num(t, "qllg.residual_tol", c.qllg.residual_tol);
  c.qllg.integrator = integrator_from_string(
      toml::get_str(t, "qllg.integrator", to_string(c.qllg.integrator)));
  c.t_max_cap = toml::get_num(t, "qllg.t_max_cap", c.t_max_cap);
  if (toml::has(t, "run.seeds")) {
    c.seeds.clear();
    for (double s : toml::get_num_list(t, "run.seeds")) {
      if (s < 0 || s != std::floor(s)) throw ConfigError("run.seeds must be non-negative integers");
      c.seeds.push_back(std::uint64_t(s));
    }
  }
  c.out_dir = toml::get_str(t, "run.out", c.out_dir);
  c.record_stride = int(toml::get_num(t, "run.record_stride", c.record_stride));
  c.strict = toml::get_bool(t, "run.strict", c.strict);
  c.validate();
  return c;
}

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    c.n_sites = m.value("n_sites", c.n_sites);
    c.J = m.value("J", c.J);
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.contains("h_grid")) c.h_grid = s.at("h_grid").get<std::vector<double>>();
  }
  if (j.contains("qllg")) {
    const auto& q = j.at("qllg");
    c.qllg.kappa = q.value("kappa", c.qllg.kappa);
    c.qllg.hbar = q.value("hbar", c.qllg.hbar);
    c.qllg.dt = q.value("dt", c.qllg.dt);
    c.qllg.t_max = q.value("t_max", c.qllg.t_max);
    c.qllg.residual_tol = q.value("residual_tol", c.qllg.residual_tol);
    c.qllg.integrator = integrator_from_string(q.value("integrator", std::string(to_string(c.qllg.integrator))));
    c.t_max_cap = q.value("t_max_cap", c.t_max_cap);
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    if (r.contains("seeds")) c.seeds = r.at("seeds").get<std::vector<std::uint64_t>>();
    c.out_dir = r.value("out", c.out_dir);
    c.record_stride = r.value("record_stride", c.record_stride);
    c.strict = r.value("strict", c.strict);
  }
  c.validate();
  return c;
}

inline SweepConfig sweep_config_from_file(const std::string& path) {
  if (path.ends_with(".json")) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    return sweep_config_from_json(nlohmann::json::parse(f));
  }
  return sweep_config_from_toml(toml::parse_file(path));
}

inline nlohmann::json sweep_config_to_json(const SweepConfig& c) {
  nlohmann::json j;
  j["model"] = {{"n_sites", c.n_sites}, {"J", c.J}};
  j["sweep"] = {{"h_grid", c.h_grid}};
  j["qllg"] = {{"kappa", c.qllg.kappa},
               {"hbar", c.qllg.hbar},
               {"dt", c.qllg.dt},
               {"t_max", c.qllg.t_max},
               {"t_max_cap", c.t_max_cap},
               {"residual_tol", c.qllg.residual_tol},
               {"integrator", to_string(c.qllg.integrator)}};
  j["run"] = {{"seeds", c.seeds},
              {"out", c.out_dir},
              {"record_stride", c.record_stride},
              {"strict", c.strict}};
  return j;
}

// ---------------------------------------------------------------------------
// Run manifest. The timestamp is the only field allowed to differ between
// byte-identical reruns.

inline void write_manifest(const std::string& path, const std::string& verb,
                           const nlohmann::json& config,
                           const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["tool"] = "qllg";
  m["version"] = kVersion;
  m["verb"] = verb;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["timestamp"] = buf;
  m["config"] = config;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write manifest " + path);
  f << m.dump(2) << "\n";
}

}  // namespace qllg
