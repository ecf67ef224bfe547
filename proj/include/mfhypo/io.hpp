#pragma once

// JSON configuration and report formats, CSV time series, content hashing.

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfhypo/certifier.hpp"
#include "mfhypo/meanfield.hpp"
#include "mfhypo/oracle.hpp"
#include "mfhypo/pipeline.hpp"
#include "mfhypo/potentials.hpp"
#include "mfhypo/simulator.hpp"

namespace mfhypo::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Strict reading helpers.

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw InvalidInput(where + ": unknown key '" + k + "'");
  }
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InvalidInput(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw InvalidInput(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

inline double get_number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

inline std::optional<double> get_optional_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, where);
}

inline long long get_integer_or(const json& j, const std::string& key, long long fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw InvalidInput(where + "." + key + ": expected an integer");
  return j.at(key).get<long long>();
}

inline bool get_bool_or(const json& j, const std::string& key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw InvalidInput(where + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

inline std::string get_string_or(const json& j, const std::string& key, const std::string& fallback,
                                 const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw InvalidInput(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

// ---------------------------------------------------------------------------
// Potentials.

inline std::string family_key(const PotentialSpec& s) {
  if (is_zero(s) && s.role == Role::Interaction) return "zero";
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Quadratic>) return "quadratic";
        if constexpr (std::is_same_v<T, QuarticDoubleWell>) return "double_well";
        if constexpr (std::is_same_v<T, GaussianBump>) return "gaussian_bump";
        if constexpr (std::is_same_v<T, Cosine>) return "cosine";
      },
      s.family);
}

inline json to_json(const PotentialSpec& s) {
  if (family_key(s) == "zero") return {{"family", "zero"}, {"params", json::object()}, {"dim", s.dim}};
  json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          params = {{"coef", p.coef}};
        } else if constexpr (std::is_same_v<T, QuarticDoubleWell>) {
          params = {{"quartic", p.quartic}, {"well", p.well}};
        } else if constexpr (std::is_same_v<T, GaussianBump>) {
          params = {{"amplitude", p.amplitude}, {"width", p.width}, {"attractive", p.attractive}};
        } else {
          params = {{"amplitude", p.amplitude}, {"frequency", p.frequency}};
        }
      },
      s.family);
  return {{"family", family_key(s)}, {"params", params}, {"dim", s.dim}};
}

inline PotentialSpec potential_from_json(const json& j, Role role, const std::string& where) {
  check_keys(j, {"family", "params", "dim"}, where);
  const std::string fam = get_string_or(j, "family", "", where);
  const int dim = static_cast<int>(get_integer_or(j, "dim", 1, where));
  const json params = j.contains("params") ? j.at("params") : json::object();
  const std::string pw = where + ".params";
  PotentialSpec s;
  if (fam == "quadratic") {
    check_keys(params, {"coef"}, pw);
    s = make_quadratic(get_number(params, "coef", pw), dim, role);
  } else if (fam == "double_well") {
    check_keys(params, {"quartic", "well"}, pw);
    s = {QuarticDoubleWell{get_number(params, "quartic", pw), get_number(params, "well", pw)}, dim, role};
  } else if (fam == "gaussian_bump") {
    check_keys(params, {"amplitude", "width", "attractive"}, pw);
    s = {GaussianBump{get_number(params, "amplitude", pw), get_number(params, "width", pw),
                      get_bool_or(params, "attractive", true, pw)},
         dim, role};
  } else if (fam == "cosine") {
    check_keys(params, {"amplitude", "frequency"}, pw);
    s = {Cosine{get_number(params, "amplitude", pw), get_number(params, "frequency", pw)}, dim, role};
  } else if (fam == "zero") {
    check_keys(params, {}, pw);
    s = make_zero_interaction(dim);
    s.role = role;
  } else {
    throw InvalidInput(where + ".family: unknown family '" + fam + "'");
  }
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Run configuration.

struct CertifyConfig {
  ModeChoice mode = ModeChoice::Auto;
  bool paper_literal = false;
  CurvatureSources sources;
};

struct SimulateConfig {
  IntegratorConfig integrator;
  int replicas = 1000;
  double horizon = 10.0;
  int stride = 10;
  std::vector<Observable> observables{Observable::MeanPosition};
  InitSpec init;
  std::map<Observable, double> equilibrium;
  int threads = 1;
};

struct SweepConfig {
  std::vector<int> Ns{2, 8, 32};
  Observable observable = Observable::MeanPosition;
  std::optional<double> equilibrium_value;
};

struct OracleConfig {
  int lyapunov_pairs = 20;
  int moment_functions = 10;
  int boundedness_functions = 10;
  int grid_nodes_1d = 801;
  int grid_nodes_2d = 161;
  int fd_points = 50;
};

struct RunConfig {
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  std::string report_format = "json";
  ModelConfig model{2, 1, make_quadratic(1.0), make_zero_interaction()};
  CertifyConfig certify;
  SimulateConfig simulate;
  SweepConfig sweep;
  OracleConfig oracle;
};

inline ModeChoice mode_from_string(const std::string& s) {
  if (s == "auto") return ModeChoice::Auto;
  if (s == "thm3") return ModeChoice::Thm3;
  if (s == "thm4") return ModeChoice::Thm4;
  if (s == "split") return ModeChoice::Split;
  throw InvalidInput("mode must be one of auto, thm3, thm4, split");
}

inline const char* to_string(ModeChoice m) {
  switch (m) {
    case ModeChoice::Thm3: return "thm3";
    case ModeChoice::Thm4: return "thm4";
    case ModeChoice::Split: return "split";
    default: return "auto";
  }
}

inline Observable observable_or_throw(const std::string& s, const std::string& where) {
  if (auto o = observable_from_string(s)) return *o;
  throw InvalidInput(where + ": unknown observable '" + s + "'");
}

// Equilibrium value of an observable when it is known in closed form.
inline std::optional<double> known_equilibrium(Observable o, const ModelConfig& m) {
  switch (o) {
    case Observable::MeanPosition:
    case Observable::MeanVelocity: return 0.0;  // even U and W
    case Observable::KineticEnergy: return 0.5 * m.d;
    default: return std::nullopt;
  }
}

inline RunConfig parse_run_config(const json& j) {
  RunConfig rc;
  check_keys(j, {"master_seed", "output_dir", "report_format", "model", "certify", "simulate", "sweep", "oracle"},
             "config");
  if (j.contains("master_seed")) {
    const json& ms = j.at("master_seed");
    if (!ms.is_number_integer() || (!ms.is_number_unsigned() && ms.get<long long>() < 0)) throw InvalidInput("config.master_seed: expected a u64");
    rc.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  rc.output_dir = get_string_or(j, "output_dir", rc.output_dir, "config");
  rc.report_format = get_string_or(j, "report_format", rc.report_format, "config");
  if (rc.report_format != "json" && rc.report_format != "csv-bundle") {
    throw InvalidInput("config.report_format: expected json or csv-bundle");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"N", "d", "U", "W"}, "model");
    rc.model.N = static_cast<int>(get_integer_or(m, "N", 2, "model"));
    rc.model.d = static_cast<int>(get_integer_or(m, "d", 1, "model"));
    rc.model.U = m.contains("U") ? potential_from_json(m.at("U"), Role::Confinement, "model.U")
                                 : make_quadratic(1.0, rc.model.d);
    rc.model.W = m.contains("W") ? potential_from_json(m.at("W"), Role::Interaction, "model.W")
                                 : make_zero_interaction(rc.model.d);
  }
  validate(rc.model);
  if (j.contains("certify")) {
    const json& c = j.at("certify");
    check_keys(c, {"mode", "paper_literal", "kappa", "C_LS", "rho_marginal", "auto_derive"}, "certify");
    rc.certify.mode = mode_from_string(get_string_or(c, "mode", "auto", "certify"));
    rc.certify.paper_literal = get_bool_or(c, "paper_literal", false, "certify");
    rc.certify.sources.kappa = get_optional_number(c, "kappa", "certify");
    rc.certify.sources.C_LS = get_optional_number(c, "C_LS", "certify");
    rc.certify.sources.rho_marginal = get_optional_number(c, "rho_marginal", "certify");
    rc.certify.sources.auto_derive = get_bool_or(c, "auto_derive", true, "certify");
    for (const auto& v : {rc.certify.sources.kappa, rc.certify.sources.C_LS, rc.certify.sources.rho_marginal}) {
      if (v && !(*v > 0.0)) throw InvalidInput("certify: supplied constants must be > 0");
    }
  }
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    check_keys(s, {"integrator", "dt", "replicas", "horizon", "stride", "observables", "init", "equilibrium",
                   "threads", "inject_noise"},
               "simulate");
    const std::string integ = get_string_or(s, "integrator", "baoab", "simulate");
    if (integ == "baoab") {
      rc.simulate.integrator.scheme = Scheme::SplittingBAOAB;
    } else if (integ == "euler_maruyama") {
      rc.simulate.integrator.scheme = Scheme::EulerMaruyama;
    } else {
      throw InvalidInput("simulate.integrator: expected baoab or euler_maruyama");
    }
    rc.simulate.integrator.dt = get_number_or(s, "dt", rc.simulate.integrator.dt, "simulate");
    rc.simulate.integrator.inject_noise = get_bool_or(s, "inject_noise", true, "simulate");
    validate(rc.simulate.integrator);
    rc.simulate.replicas = static_cast<int>(get_integer_or(s, "replicas", rc.simulate.replicas, "simulate"));
    if (rc.simulate.replicas < 1) throw InvalidInput("simulate.replicas: must be >= 1");
    rc.simulate.horizon = get_number_or(s, "horizon", rc.simulate.horizon, "simulate");
    if (!(rc.simulate.horizon >= 0.0)) throw InvalidInput("simulate.horizon: must be >= 0");
    rc.simulate.stride = static_cast<int>(get_integer_or(s, "stride", rc.simulate.stride, "simulate"));
    if (rc.simulate.stride < 1) throw InvalidInput("simulate.stride: must be >= 1");
    rc.simulate.threads = static_cast<int>(get_integer_or(s, "threads", rc.simulate.threads, "simulate"));
    if (s.contains("observables")) {
      if (!s.at("observables").is_array()) throw InvalidInput("simulate.observables: expected an array");
      rc.simulate.observables.clear();
      for (const auto& o : s.at("observables")) {
        if (!o.is_string()) throw InvalidInput("simulate.observables: expected strings");
        rc.simulate.observables.push_back(observable_or_throw(o.get<std::string>(), "simulate.observables"));
      }
      if (rc.simulate.observables.empty()) throw InvalidInput("simulate.observables: list is empty");
    }
    if (s.contains("init")) {
      const json& i = s.at("init");
      check_keys(i, {"offset", "position_std", "velocity_std"}, "simulate.init");
      rc.simulate.init.offset = get_number_or(i, "offset", rc.simulate.init.offset, "simulate.init");
      rc.simulate.init.position_std = get_number_or(i, "position_std", rc.simulate.init.position_std, "simulate.init");
      rc.simulate.init.velocity_std = get_number_or(i, "velocity_std", rc.simulate.init.velocity_std, "simulate.init");
    }
    if (s.contains("equilibrium")) {
      const json& e = s.at("equilibrium");
      if (!e.is_object()) throw InvalidInput("simulate.equilibrium: expected an object");
      for (const auto& [k, v] : e.items()) {
        if (!v.is_number()) throw InvalidInput("simulate.equilibrium." + k + ": expected a number");
        rc.simulate.equilibrium[observable_or_throw(k, "simulate.equilibrium")] = v.get<double>();
      }
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"Ns", "observable", "equilibrium_value"}, "sweep");
    if (s.contains("Ns")) {
      if (!s.at("Ns").is_array() || s.at("Ns").empty()) throw InvalidInput("sweep.Ns: expected a non-empty array");
      rc.sweep.Ns.clear();
      for (const auto& n : s.at("Ns")) {
        if (!n.is_number_integer()) throw InvalidInput("sweep.Ns: expected integers");
        rc.sweep.Ns.push_back(n.get<int>());
      }
    }
    if (!std::is_sorted(rc.sweep.Ns.begin(), rc.sweep.Ns.end())) throw InvalidInput("sweep.Ns: must be sorted");
    for (int n : rc.sweep.Ns) {
      if (n < 2) throw InvalidInput("sweep.Ns: every N must be >= 2");
    }
    rc.sweep.observable = observable_or_throw(get_string_or(s, "observable", "mean_position", "sweep"), "sweep");
    rc.sweep.equilibrium_value = get_optional_number(s, "equilibrium_value", "sweep");
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, {"lyapunov_pairs", "moment_functions", "boundedness_functions", "grid_nodes_1d", "grid_nodes_2d",
                   "fd_points"},
               "oracle");
    auto positive = [&](const char* key, int fallback) {
      const auto v = static_cast<int>(get_integer_or(o, key, fallback, "oracle"));
      if (v < 1) throw InvalidInput(std::string("oracle.") + key + ": must be >= 1");
      return v;
    };
    rc.oracle.lyapunov_pairs = positive("lyapunov_pairs", rc.oracle.lyapunov_pairs);
    rc.oracle.moment_functions = positive("moment_functions", rc.oracle.moment_functions);
    rc.oracle.boundedness_functions = positive("boundedness_functions", rc.oracle.boundedness_functions);
    rc.oracle.grid_nodes_1d = positive("grid_nodes_1d", rc.oracle.grid_nodes_1d);
    rc.oracle.grid_nodes_2d = positive("grid_nodes_2d", rc.oracle.grid_nodes_2d);
    rc.oracle.fd_points = positive("fd_points", rc.oracle.fd_points);
  }
  return rc;
}

// Canonical echo: every field explicit, so re-parsing reproduces the run.
inline json to_json(const RunConfig& rc) {
  json obs = json::array();
  for (Observable o : rc.simulate.observables) obs.push_back(to_string(o));
  json eq = json::object();
  for (const auto& [o, v] : rc.simulate.equilibrium) eq[to_string(o)] = v;
  json certify = {{"mode", to_string(rc.certify.mode)},
                  {"paper_literal", rc.certify.paper_literal},
                  {"auto_derive", rc.certify.sources.auto_derive}};
  if (rc.certify.sources.kappa) certify["kappa"] = *rc.certify.sources.kappa;
  if (rc.certify.sources.C_LS) certify["C_LS"] = *rc.certify.sources.C_LS;
  if (rc.certify.sources.rho_marginal) certify["rho_marginal"] = *rc.certify.sources.rho_marginal;
  json sweep = {{"Ns", rc.sweep.Ns}, {"observable", to_string(rc.sweep.observable)}};
  if (rc.sweep.equilibrium_value) sweep["equilibrium_value"] = *rc.sweep.equilibrium_value;
  return {
      {"master_seed", rc.master_seed},
      {"output_dir", rc.output_dir},
      {"report_format", rc.report_format},
      {"model", {{"N", rc.model.N}, {"d", rc.model.d}, {"U", to_json(rc.model.U)}, {"W", to_json(rc.model.W)}}},
      {"certify", certify},
      {"simulate",
       {{"integrator", rc.simulate.integrator.scheme == Scheme::EulerMaruyama ? "euler_maruyama" : "baoab"},
        {"dt", rc.simulate.integrator.dt},
        {"inject_noise", rc.simulate.integrator.inject_noise},
        {"replicas", rc.simulate.replicas},
        {"horizon", rc.simulate.horizon},
        {"stride", rc.simulate.stride},
        {"threads", rc.simulate.threads},
        {"observables", obs},
        {"init",
         {{"offset", rc.simulate.init.offset},
          {"position_std", rc.simulate.init.position_std},
          {"velocity_std", rc.simulate.init.velocity_std}}},
        {"equilibrium", eq}}},
      {"sweep", sweep},
      {"oracle",
       {{"lyapunov_pairs", rc.oracle.lyapunov_pairs},
        {"moment_functions", rc.oracle.moment_functions},
        {"boundedness_functions", rc.oracle.boundedness_functions},
        {"grid_nodes_1d", rc.oracle.grid_nodes_1d},
        {"grid_nodes_2d", rc.oracle.grid_nodes_2d},
        {"fd_points", rc.oracle.fd_points}}},
  };
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

// ---------------------------------------------------------------------------
// Hashing.

// Git blob id: SHA-1 of "blob <len>\0<content>".
inline std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string config_hash(const RunConfig& rc) { return git_blob_sha1(to_json(rc).dump()); }

// ---------------------------------------------------------------------------
// Reports.

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Constant& c) {
  return {{"value", number_or_null(c.value)}, {"provenance", to_string(c.provenance)}};
}

inline json to_json(const CoefficientSet& s) {
  json T = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(s.T(i, k));
    T.push_back(row);
  }
  return {{"a", s.coefficients.a},
          {"b", s.coefficients.b},
          {"c", s.coefficients.c},
          {"lambda0", s.coefficients.lambda0},
          {"variant", to_string(s.coefficients.variant)},
          {"T", T},
          {"psd_witness", s.psd_witness},
          {"lambda", s.lambda},
          {"c1", number_or_null(s.norms.c1)},
          {"c2", number_or_null(s.norms.c2)},
          {"C0", number_or_null(s.norms.C0)},
          {"valid", s.valid},
          {"diagnostic", s.diagnostic}};
}

inline json to_json(const ConstantsBundle& b) {
  json j = {{"K", to_json(b.K)}, {"K_prime", to_json(b.K_prime)}, {"K1", to_json(b.K1)},
            {"K2", to_json(b.K2)}, {"d", b.d}};
  if (b.kappa) j["kappa"] = to_json(*b.kappa);
  if (b.C_LS) j["C_LS"] = to_json(*b.C_LS);
  if (b.cLip) j["cLip"] = to_json(*b.cLip);
  if (b.convexity) {
    j["convexity_at_infinity"] = {{"cU", b.convexity->cU},
                                  {"c", b.convexity->c},
                                  {"R", b.convexity->R},
                                  {"provenance", to_string(b.convexity->provenance)}};
  }
  return j;
}

inline json to_json(const Certificate& c) {
  json j = {{"schema_version", c.schema_version},
            {"mode", to_string(c.mode)},
            {"variant", to_string(c.variant)},
            {"boundedness",
             {{"C1", c.boundedness.C1},
              {"C2", c.boundedness.C2},
              {"M", c.boundedness.M},
              {"M1", c.boundedness.M1},
              {"M2", c.boundedness.M2}}},
            {"kappa", {{"value", c.kappa}, {"provenance", to_string(c.kappa_provenance)}}},
            {"M_used", c.M_used},
            {"a", c.a()},
            {"b", c.b()},
            {"c", c.c()},
            {"lambda0", c.lambda0()},
            {"lambda", c.lambda()},
            {"C0", number_or_null(c.C0())},
            {"psd_witness", c.psd_witness()},
            {"literal", to_json(c.literal)},
            {"inputs", to_json(c.inputs)},
            {"valid", c.valid},
            {"certified", c.certified},
            {"non_literal", c.non_literal},
            {"fallback_diagnostic", c.fallback_diagnostic}};
  if (c.refined) j["refined"] = to_json(*c.refined);
  if (c.single_m) j["single_m"] = to_json(*c.single_m);
  return j;
}

inline json to_json(const DerivedConstants& d) {
  json cands = json::array();
  for (const auto& c : d.candidates) {
    cands.push_back({{"quantity", c.quantity}, {"source", c.source}, {"value", to_json(c.value)}});
  }
  json j = {{"candidates", cands}, {"notes", d.notes}};
  if (d.lipschitz) {
    j["cLip"] = {{"value", number_or_null(d.lipschitz->value)},
                 {"converged", d.lipschitz->converged},
                 {"truncation", d.lipschitz->truncation}};
  }
  if (d.upi_slack) j["upi_slack"] = *d.upi_slack;
  return j;
}

// Required keys and types of a certificate report.
inline void validate_certificate_json(const json& j) {
  const std::vector<std::pair<std::string, json::value_t>> required = {
      {"schema_version", json::value_t::number_unsigned},
      {"mode", json::value_t::string},
      {"variant", json::value_t::string},
      {"boundedness", json::value_t::object},
      {"kappa", json::value_t::object},
      {"a", json::value_t::number_float},
      {"b", json::value_t::number_float},
      {"c", json::value_t::number_float},
      {"lambda0", json::value_t::number_float},
      {"lambda", json::value_t::number_float},
      {"psd_witness", json::value_t::number_float},
      {"literal", json::value_t::object},
      {"inputs", json::value_t::object},
      {"certified", json::value_t::boolean},
  };
  for (const auto& [k, t] : required) {
    if (!j.contains(k)) throw InvalidInput("certificate report: missing '" + k + "'");
    const auto actual = j.at(k).type();
    const bool numeric_ok = (t == json::value_t::number_float || t == json::value_t::number_unsigned) && j.at(k).is_number();
    if (actual != t && !numeric_ok) throw InvalidInput("certificate report: wrong type for '" + k + "'");
  }
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw InvalidInput("certificate report: schema_version");
  if (!j.at("literal").contains("T") || j.at("literal").at("T").size() != 4) {
    throw InvalidInput("certificate report: literal.T must be 4x4");
  }
}

inline json to_json(const DecayFit& f) {
  return {{"observable_id", to_string(f.observable)},
          {"lambda_hat", f.lambda_hat},
          {"ci_low", f.ci_low},
          {"ci_high", f.ci_high},
          {"r_squared", f.r_squared},
          {"window", {f.t_start, f.t_end}},
          {"model", f.model == DecayModel::LogLinear ? "log_linear" : "damped_oscillation"},
          {"omega", f.omega}};
}

inline json to_json(const DecayFitOutcome& o) {
  if (o.fit) return to_json(*o.fit);
  return {{"fit", nullptr}, {"diagnostic", o.diagnostic}};
}

inline json to_json(const oracle::Battery& b) {
  json checks = json::array();
  for (const auto& c : b.checks) {
    checks.push_back({{"lhs", c.lhs}, {"rhs", number_or_null(c.rhs)}, {"pass", c.pass}, {"label", c.label}});
  }
  return {{"name", b.name}, {"pass", b.pass()}, {"checks", checks}};
}

inline json to_json(const oracle::FdReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"family", e.family},
                       {"dim", e.dim},
                       {"gradient_rel_err", e.gradient_rel_err},
                       {"hessian_rel_err", e.hessian_rel_err},
                       {"pass", e.pass}});
  }
  return {{"tolerance", r.tolerance}, {"pass", r.pass}, {"entries", entries}};
}

inline json to_json(const SpectralGap& g) {
  return {{"gap", g.gap}, {"gap_coarse", g.gap_coarse}, {"richardson", g.richardson},
          {"box", g.box}, {"dx", g.dx},                 {"nodes", g.nodes}};
}

// ---------------------------------------------------------------------------
// Files.

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string series_csv(const TimeSeries& ts) {
  std::ostringstream out;
  out << "time,observable_id,mean,variance,replicas\n";
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    for (const auto& s : ts.observables) {
      out << format_double(ts.times[k]) << ',' << to_string(s.id) << ',' << format_double(s.mean[k]) << ','
          << format_double(s.variance[k]) << ',' << ts.replicas << '\n';
    }
  }
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace mfhypo::io
