#pragma once

// The oracle suite for a configured model: inequality batteries on desk-scale
// grids, derivative checks and the grid spectral gap against the certified
// Poincare constant.

#include <string>
#include <vector>

#include "mfhypo/io.hpp"
#include "mfhypo/oracle.hpp"
#include "mfhypo/pipeline.hpp"

namespace mfhypo {

struct OracleSuiteResult {
  io::json report;
  bool pass = true;
};

inline OracleSuiteResult run_oracle_suite(const ModelConfig& model, const io::CertifyConfig& cc,
                                          const io::OracleConfig& oc, std::uint64_t seed) {
  OracleSuiteResult out;
  io::json batteries = io::json::array();
  io::json skipped = io::json::array();
  auto record = [&](const oracle::Battery& b) {
    batteries.push_back(io::to_json(b));
    out.pass = out.pass && b.pass();
  };

  // One-particle measure e^{-U} (falls back to x^2/2 when d > 1).
  const PotentialSpec U1 = model.d == 1 ? model.U : make_quadratic(1.0);
  const GridMeasure m1 = make_grid_measure(U1, static_cast<std::size_t>(oc.grid_nodes_1d));
  record(oracle::lyapunov_battery(m1, oc.lyapunov_pairs, seed));

  io::json gap_check = nullptr;
  if (model.d == 1) {
    ModelConfig pair = model;
    pair.N = 2;
    std::optional<PipelineResult> pr;
    try {
      pr = certify_model(model.U, model.W, cc.sources, cc.mode, cc.paper_literal);
    } catch (const MissingConstant& e) {
      for (const char* name : {"moment_bound", "boundedness_condition", "spectral_gap_vs_kappa"}) {
        skipped.push_back({{"name", name}, {"reason", e.what()}});
      }
    }
    if (pr) {
      const GridMeasure m2 = make_grid_measure(pair, static_cast<std::size_t>(oc.grid_nodes_2d));
      if (pr->derived.bundle.C_LS) {
        record(oracle::moment_battery(m2, pr->derived.bundle.C_LS->value, oc.moment_functions, seed + 1));
      } else {
        skipped.push_back({{"name", "moment_bound"}, {"reason", "no certified C_LS for this model"}});
      }
      const auto& bd = pr->certificate.boundedness;
      record(oracle::boundedness_battery(pair, m2, bd.M1, bd.M2, oc.boundedness_functions, seed + 2));

      const SpectralGap gap = spectral_gap_oracle(pair, static_cast<std::size_t>(oc.grid_nodes_2d));
      const bool ok = pr->certificate.kappa <= gap.richardson * (1.0 + 0.02);
      gap_check = {{"certified_kappa", pr->certificate.kappa}, {"grid", io::to_json(gap)}, {"pass", ok}};
      out.pass = out.pass && ok;
    }
  } else {
    skipped.push_back({{"name", "moment_bound"}, {"reason", "grid batteries need d = 1"}});
    skipped.push_back({{"name", "boundedness_condition"}, {"reason", "grid batteries need d = 1"}});
  }

  std::vector<PotentialSpec> specs = oracle::default_fd_specs();
  specs.push_back(model.U);
  if (!is_zero(model.W)) specs.push_back(model.W);
  const oracle::FdReport fd = oracle::fd_derivative_suite(specs, oc.fd_points, seed + 3);
  out.pass = out.pass && fd.pass;
  const double force_err = oracle::fd_force_error(model, 20, seed + 4);
  const bool force_ok = force_err < 1e-6;
  out.pass = out.pass && force_ok;

  out.report = {{"batteries", batteries},
                {"skipped", skipped},
                {"spectral_gap_vs_kappa", gap_check},
                {"fd_derivatives", io::to_json(fd)},
                {"force_fd", {{"max_rel_err", force_err}, {"tolerance", 1e-6}, {"pass", force_ok}}},
                {"pass", out.pass}};
  return out;
}

}  // namespace mfhypo
