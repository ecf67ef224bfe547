// mfhypo: certify, simulate, sweep and oracle commands.
//
// Exit codes: 0 success / certified, 1 internal error or rejected input,
// 2 missing constant, 3 resource cap.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mfhypo/io.hpp"
#include "mfhypo/pipeline.hpp"
#include "mfhypo/simulator.hpp"
#include "mfhypo/suite.hpp"

namespace fs = std::filesystem;
using namespace mfhypo;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMissing = 2;
constexpr int kExitCap = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  bool paper_literal = false;
  int threads = 0;
};

io::RunConfig resolve(const Flags& f) {
  io::RunConfig rc = f.config.empty() ? io::RunConfig{} : io::load_run_config(f.config);
  if (f.seed) rc.master_seed = *f.seed;
  if (f.out) rc.output_dir = *f.out;
  if (f.mode) rc.certify.mode = io::mode_from_string(*f.mode);
  if (f.paper_literal) rc.certify.paper_literal = true;
  if (f.threads > 0) rc.simulate.threads = f.threads;
  return rc;
}

json envelope(const io::RunConfig& rc, const std::string& command) {
  io::RunConfig echo = rc;
  echo.simulate.threads = 1;  // thread count never changes results
  return {{"schema_version", io::kSchemaVersion},
          {"command", command},
          {"config", io::to_json(echo)},
          {"config_hash", io::config_hash(echo)},
          {"master_seed", rc.master_seed}};
}

fs::path prepare_out(const io::RunConfig& rc) {
  fs::path dir(rc.output_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_certify(const io::RunConfig& rc) {
  const PipelineResult pr =
      certify_model(rc.model.U, rc.model.W, rc.certify.sources, rc.certify.mode, rc.certify.paper_literal);
  const Certificate& c = pr.certificate;
  json report = envelope(rc, "certify");
  report["derived"] = io::to_json(pr.derived);
  report["certificate"] = io::to_json(c);
  const fs::path dir = prepare_out(rc);
  io::write_json((dir / "certificate.json").string(), report);
  if (rc.report_format == "csv-bundle") {
    std::string csv = "key,value\n";
    for (const auto& [k, v] : {std::pair<std::string, double>{"a", c.a()}, {"b", c.b()}, {"c", c.c()},
                               {"lambda0", c.lambda0()}, {"lambda", c.lambda()}, {"C0", c.C0()},
                               {"kappa", c.kappa}, {"M", c.boundedness.M}}) {
      csv += k + "," + io::format_double(v) + "\n";
    }
    io::write_text((dir / "certificate.csv").string(), csv);
  }
  std::cout << "mode=" << to_string(c.mode) << " variant=" << to_string(c.variant) << " lambda=" << c.lambda()
            << " C0=" << c.C0() << " certified=" << (c.certified ? "yes" : "no") << "\n";
  if (c.single_m) std::cout << "single_M lambda=" << c.single_m->lambda << "\n";
  if (c.refined) std::cout << "refined lambda=" << c.refined->lambda << "\n";
  if (c.certified) return kExitOk;
  if (!c.valid) {
    std::cerr << "coefficient matrix failed the coercivity check: " << c.literal.diagnostic << "\n";
    return kExitError;
  }
  std::cerr << "no certifying source for every constant (numeric estimates only)\n";
  return kExitMissing;
}

json fits_for(const TimeSeries& ts, const io::RunConfig& rc) {
  json fits = json::array();
  for (const auto& s : ts.observables) {
    std::optional<double> eq;
    if (auto it = rc.simulate.equilibrium.find(s.id); it != rc.simulate.equilibrium.end()) {
      eq = it->second;
    } else {
      eq = io::known_equilibrium(s.id, rc.model);
    }
    if (!eq) {
      fits.push_back({{"observable_id", to_string(s.id)}, {"fit", nullptr}, {"diagnostic", "no equilibrium value"}});
      continue;
    }
    FitOptions fo;
    fo.seed = rc.master_seed;
    json f = io::to_json(fit_decay(ts, s.id, *eq, fo));
    f["observable_id"] = to_string(s.id);
    f["equilibrium_value"] = *eq;
    fits.push_back(f);
  }
  return fits;
}

int cmd_simulate(const io::RunConfig& rc) {
  const auto& s = rc.simulate;
  RunOptions ro{s.threads, true};
  const RunResult rr = run(rc.model, s.integrator, s.replicas, s.horizon, s.init, s.observables, s.stride,
                           rc.master_seed, ro);
  const fs::path dir = prepare_out(rc);
  io::write_text((dir / "series.csv").string(), io::series_csv(rr.series));
  json report = envelope(rc, "simulate");
  report["decay_fits"] = fits_for(rr.series, rc);
  report["records"] = rr.series.times.size();
  io::write_json((dir / "summary.json").string(), report);
  std::cout << "wrote " << (dir / "series.csv").string() << " and summary.json\n";
  return kExitOk;
}

int cmd_sweep(const io::RunConfig& rc) {
  const auto& s = rc.simulate;
  SweepSpec spec;
  spec.Ns = rc.sweep.Ns;
  spec.replicas = s.replicas;
  spec.horizon = s.horizon;
  spec.stride = s.stride;
  spec.init = s.init;
  spec.observable = rc.sweep.observable;
  spec.seed = rc.master_seed;
  const auto eq = rc.sweep.equilibrium_value ? rc.sweep.equilibrium_value
                                             : io::known_equilibrium(rc.sweep.observable, rc.model);
  if (!eq) throw InvalidInput("sweep: equilibrium_value required for this observable");
  spec.equilibrium_value = *eq;
  FitOptions fo;
  fo.seed = rc.master_seed;
  const SweepResult sr = n_sweep(rc.model, s.integrator, spec, RunOptions{s.threads, true}, fo);

  json report = envelope(rc, "sweep");
  json rows = json::array();
  std::string csv = "N,lambda_hat,ci_low,ci_high,r_squared\n";
  for (const auto& row : sr.rows) {
    json r = io::to_json(row.outcome);
    r["N"] = row.N;
    rows.push_back(r);
    if (row.outcome.fit) {
      const auto& f = *row.outcome.fit;
      csv += std::to_string(row.N) + "," + io::format_double(f.lambda_hat) + "," + io::format_double(f.ci_low) + "," +
             io::format_double(f.ci_high) + "," + io::format_double(f.r_squared) + "\n";
    } else {
      csv += std::to_string(row.N) + ",,,,\n";
    }
  }
  report["rows"] = rows;
  report["relative_spread"] = io::number_or_null(sr.relative_spread);
  try {
    const PipelineResult pr =
        certify_model(rc.model.U, rc.model.W, rc.certify.sources, rc.certify.mode, rc.certify.paper_literal);
    bool below = pr.certificate.certified;
    for (const auto& row : sr.rows) below = below && row.outcome.fit && pr.certificate.lambda() <= row.outcome.fit->ci_high;
    report["certified_lambda"] = pr.certificate.lambda();
    report["certified_lambda_below_all_ci_high"] = below;
  } catch (const MissingConstant& e) {
    report["certified_lambda"] = nullptr;
    report["certification_note"] = e.what();
  }
  const fs::path dir = prepare_out(rc);
  io::write_json((dir / "sweep.json").string(), report);
  io::write_text((dir / "sweep.csv").string(), csv);
  std::cout << csv << "relative_spread=" << sr.relative_spread << "\n";
  return kExitOk;
}

int cmd_oracle(const io::RunConfig& rc) {
  const OracleSuiteResult res = run_oracle_suite(rc.model, rc.certify, rc.oracle, rc.master_seed);
  json report = envelope(rc, "oracle");
  report["oracle_suite"] = res.report;
  const fs::path dir = prepare_out(rc);
  io::write_json((dir / "oracle.json").string(), report);
  if (rc.report_format == "csv-bundle") {
    std::string csv = "battery,label,lhs,rhs,pass\n";
    for (const auto& b : res.report.at("batteries")) {
      for (const auto& c : b.at("checks")) {
        csv += b.at("name").get<std::string>() + ",\"" + c.at("label").get<std::string>() + "\"," +
               c.at("lhs").dump() + "," + c.at("rhs").dump() + "," + (c.at("pass").get<bool>() ? "1" : "0") + "\n";
      }
    }
    io::write_text((dir / "oracle.csv").string(), csv);
  }
  std::cout << "oracle suite: " << (res.pass ? "pass" : "FAIL") << "\n";
  return res.pass ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypocoercive rate certificates and simulations for mean-field kinetic Langevin systems"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "master seed (overrides the config)");
  app.add_option("--out", f.out, "output directory (overrides the config)");
  app.add_option("--mode", f.mode, "certification route")->check(CLI::IsMember({"auto", "thm3", "thm4", "split"}));
  app.add_flag("--paper-literal", f.paper_literal, "disable coefficient refinement");
  app.add_option("--threads", f.threads, "worker threads for replica ensembles");
  app.fallthrough();

  auto* certify = app.add_subcommand("certify", "compute the rate certificate (lambda, C0)");
  auto* simulate = app.add_subcommand("simulate", "run a replica ensemble and fit decay rates");
  auto* sweep = app.add_subcommand("sweep", "fit decay rates across particle counts");
  auto* oracle_cmd = app.add_subcommand("oracle", "run the oracle suite");
  for (auto* sub : {certify, simulate, sweep, oracle_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    const io::RunConfig rc = resolve(f);
    if (certify->parsed()) return cmd_certify(rc);
    if (simulate->parsed()) return cmd_simulate(rc);
    if (sweep->parsed()) return cmd_sweep(rc);
    if (oracle_cmd->parsed()) return cmd_oracle(rc);
  } catch (const MissingConstant& e) {
    std::cerr << "error: " << e.what() << "\nremedy: " << e.remedy() << "\n";
    return kExitMissing;
  } catch (const ResourceCap& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kExitCap;
  } catch (const InvalidInput& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
