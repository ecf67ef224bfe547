// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfhypo/io.hpp"
#include "mfhypo/oracle.hpp"
#include "mfhypo/pipeline.hpp"
#include "mfhypo/simulator.hpp"

using namespace mfhypo;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ModelConfig double_well_model(int N) {
  return {N, 1, make_double_well(0.25, 0.5), make_gaussian_bump(0.05, 1.0, true)};
}

void c1_coefficients(Outcome& o) {
  const Coefficients k = default_coefficients(1.0);
  o.require(k.a == 1.0 / 25.0 && k.b == 1.0 / 200.0 && k.c == 1.0 / 800.0 && k.lambda0 == 1.0 / 440.0,
            "coefficients at M=1");
  const double w = verify_coercivity(build_T(k.a, k.b, k.c, 1.0), k.lambda0);
  o.require(w >= -1e-12, "PSD witness");
  o.detail << "(a,b,c,l0)=(" << k.a << "," << k.b << "," << k.c << "," << k.lambda0 << ") min_eig=" << w;
}

void c2_rate(Outcome& o) {
  const Coefficients k = default_coefficients(1.0);
  const double l = rate_lambda(k.lambda0, k.a, k.c, 1.0);
  const double expected = (1.0 / 440.0) * (25.0 / 27.0);
  o.require(std::abs(l - expected) <= 1e-12, "rate");
  char buf[128];
  std::snprintf(buf, sizeof buf, "lambda=%.17g expected=%.17g", l, expected);
  o.detail << buf;
}

void c3_interaction_hessian(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pickN(2, 16), pickd(1, 3);
  std::uniform_real_distribution<double> amp(0.05, 2.0), width(0.3, 2.0), pos(-3.0, 3.0);
  double worst = -kInf;
  const int configs = 1000;
  for (int t = 0; t < configs; ++t) {
    const int N = pickN(rng), d = pickd(rng);
    PotentialSpec W;
    switch (t % 3) {
      case 0: W = make_gaussian_bump(amp(rng), width(rng), t % 2 == 0, d); break;
      case 1: W = make_cosine(amp(rng), width(rng), d); break;
      default: W = make_quadratic(amp(rng), d, Role::Interaction); break;
    }
    const ModelConfig m{N, d, make_quadratic(1.0, d), W};
    std::vector<double> x(static_cast<std::size_t>(N * d));
    for (double& v : x) v = pos(rng);
    const double K = hessian_opnorm_sup(W);
    worst = std::max(worst, hw_opnorm(m, x).value - K);
  }
  o.require(worst <= 1e-8, "|H_W| <= K + 1e-8");
  const ModelConfig q{2, 1, make_quadratic(1.0), make_quadratic(1.0, 1, Role::Interaction)};
  const HessianBlocks hb = hessian_blocks(q, std::vector<double>{0.3, -1.1});
  const double p = hb.H_W(0, 0), r = hb.H_W(1, 1), off = hb.H_W(0, 1);
  const double disc = std::sqrt((p - r) * (p - r) + 4.0 * off * off);
  const double ev[2] = {0.5 * (p + r - disc), 0.5 * (p + r + disc)};
  o.require(ev[0] == 0.0 && ev[1] == 1.0, "quadratic eigenvalues {0,1}");
  o.detail << configs << " configs, max(|H_W| - K)=" << worst << "; quadratic eigenvalues {" << ev[0] << ", " << ev[1]
           << "}";
}

void c4_rationals(Outcome& o) {
  using namespace split;
  const long long sum = kAlphaNum + kBetaNum + kGammaNum;
  o.require(sum == 3864 && sum * sum == kBetaNum * kDen, "beta = (alpha+beta+gamma)^2");
  o.require(kAlphaNum * kGammaNum == 2 * kBetaNum * kBetaNum, "alpha*gamma = 2 beta^2");
  o.require(8 * kGammaNum == 3 * kBetaNum, "gamma = 3 beta / 8");
  o.detail << "3864^2=" << sum * sum << " 576*25921=" << kBetaNum * kDen;
}

void c5_split_scaling(Outcome& o) {
  std::vector<double> lx, ly;
  for (double M2 : {1e2, 1e4, 1e6}) {
    const SplitCoefficients s = improved_coefficients(1.0, M2);
    const Coefficients& k = s.coefficients;
    const CoefficientSet cs = evaluate_coefficients(k, build_Tprime(k.a, k.b, k.c, 1.0, M2), 1.0);
    o.require(!s.fell_back && cs.valid, "split coefficients valid at M2=" + std::to_string(M2));
    const Coefficients single = default_coefficients(M2);
    const double l_single = rate_lambda(single.lambda0, single.a, single.c, 1.0);
    o.require(cs.lambda >= l_single, "split >= single at M2=" + std::to_string(M2));
    lx.push_back(std::log(M2));
    ly.push_back(std::log(cs.lambda));
    o.detail << "M2=" << M2 << " split=" << cs.lambda << " single=" << l_single << "; ";
  }
  const double s = ls_slope(lx, ly);
  o.require(s >= -0.55 && s <= -0.45, "slope in [-0.55, -0.45]");
  o.detail << "slope=" << s;
}

void c6_spectral_gap(Outcome& o) {
  for (double k : {1.0, 0.5, 2.0}) {
    const auto U = make_quadratic(k);
    const auto W = make_zero_interaction();
    const SpectralGap g = spectral_gap_oracle(U);
    o.require(std::abs(g.gap - k) <= 0.02 * k, "gap for kappa1=" + std::to_string(k));
    bool conv = false;
    const LipschitzResult lr = lipschitz_for(U, W, conv);
    o.require(conv && std::abs(lr.value - 1.0 / k) <= 1e-8, "cLip = 1/kappa1");
    const B0Estimate b0 = dissipativity_rate(U, W, 1.0);
    o.require(std::abs(b0.value + k) <= 1e-12, "b0(1) = -kappa1");
    const auto t1 = kappa_thm1(upiw_h_lower_bound(0.0), {lr.value, Provenance::NumericVerified});
    o.require(t1.has_value() && std::abs(t1->value - k) <= 1e-8 * std::max(1.0, k * k), "pipeline kappa = kappa1");
    o.require(t1.has_value() && std::abs(t1->value - g.gap) <= 0.02 * k, "pipeline agrees with oracle");
    o.detail << "k=" << k << " gap=" << g.gap << " cLip=" << lr.value << " kappa=" << (t1 ? t1->value : NAN) << "; ";
  }
}

void c7_calibration(Outcome& o) {
  const ModelConfig m{2, 1, make_quadratic(1.0), make_zero_interaction()};
  IntegratorConfig ic;
  ic.dt = 1e-3;
  const RunResult rr = run(m, ic, 10000, 10.0, {}, {Observable::MeanPosition}, 50, 7);
  const DecayFitOutcome f = fit_decay(rr.series, Observable::MeanPosition, 0.0);
  o.require(f.fit.has_value(), "fit: " + f.diagnostic);
  if (f.fit) {
    o.require(f.fit->lambda_hat >= 0.425 && f.fit->lambda_hat <= 0.575, "lambda_hat in [0.425, 0.575]");
    o.detail << "lambda_hat=" << f.fit->lambda_hat << " CI=[" << f.fit->ci_low << ", " << f.fit->ci_high << "]";
  }
  const auto& xs = rr.final_state.positions;
  const auto& vs = rr.final_state.velocities;
  const double n = static_cast<double>(xs.size());
  double mx = 0, mv = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    mv += vs[i];
  }
  mx /= n;
  mv /= n;
  double sxx = 0, svv = 0, sxv = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    svv += (vs[i] - mv) * (vs[i] - mv);
    sxv += (xs[i] - mx) * (vs[i] - mv);
  }
  sxx /= n - 1;
  svv /= n - 1;
  sxv /= n - 1;
  const double band_diag = 3.0 * std::sqrt(2.0 / n), band_off = 3.0 / std::sqrt(n);
  o.require(std::abs(sxx - 1.0) <= band_diag && std::abs(svv - 1.0) <= band_diag && std::abs(sxv) <= band_off,
            "stationary covariance within 3 sigma");
  o.detail << " cov=[[" << sxx << ", " << sxv << "], [" << sxv << ", " << svv << "]] band=" << band_diag;
}

void c8_n_uniformity(Outcome& o) {
  const ModelConfig templ = double_well_model(2);
  const PipelineResult pr = certify_model(templ.U, templ.W, {}, ModeChoice::Auto, false);
  o.require(pr.certificate.certified, "certify succeeds");
  double certified = pr.certificate.lambda();
  if (pr.certificate.refined && pr.certificate.refined->valid) certified = std::max(certified, pr.certificate.refined->lambda);
  IntegratorConfig ic;
  ic.dt = 0.01;
  SweepSpec spec;
  spec.Ns = {2, 8, 32};
  spec.replicas = 2000;
  spec.horizon = 20.0;
  spec.stride = 10;
  spec.seed = 8;
  const SweepResult r = n_sweep(templ, ic, spec);
  for (const auto& row : r.rows) {
    o.require(row.outcome.fit.has_value(), "fit at N=" + std::to_string(row.N) + ": " + row.outcome.diagnostic);
    if (!row.outcome.fit) continue;
    const DecayFit& f = *row.outcome.fit;
    o.require(certified <= f.ci_high, "certified <= ci_high at N=" + std::to_string(row.N));
    o.detail << "N=" << row.N << " lambda_hat=" << f.lambda_hat << " CI=[" << f.ci_low << ", " << f.ci_high << "]; ";
  }
  o.require(r.relative_spread <= 0.25, "relative spread <= 25%");
  o.detail << "spread=" << r.relative_spread << " certified=" << certified;
}

void c9_oracles(Outcome& o) {
  auto passed = [](const oracle::Battery& b) {
    return std::count_if(b.checks.begin(), b.checks.end(), [](const auto& c) { return c.pass; });
  };
  const ModelConfig lsi{2, 1, make_quadratic(1.0), make_gaussian_bump(0.3, 1.0, true)};
  const ModelConfig dw = double_well_model(2);
  for (const ModelConfig& pair : {lsi, dw}) {
    const PipelineResult pr = certify_model(pair.U, pair.W, {}, ModeChoice::Auto, false);
    const GridMeasure m1 = make_grid_measure(pair.U, 801);
    const GridMeasure m2 = make_grid_measure(pair, 161);
    const oracle::Battery lyap = oracle::lyapunov_battery(m1, 20, 91);
    o.require(lyap.checks.size() == 20 && lyap.pass(), "Lyapunov battery");
    o.detail << "U=" << family_name(pair.U) << ": lyapunov " << passed(lyap) << "/20";
    if (pr.derived.bundle.C_LS) {
      const oracle::Battery mom = oracle::moment_battery(m2, pr.derived.bundle.C_LS->value, 10, 92);
      o.require(mom.checks.size() == 10 && mom.pass(), "moment battery");
      o.detail << ", moment " << passed(mom) << "/10 (C_LS=" << pr.derived.bundle.C_LS->value << ")";
    } else {
      o.require(&pair != &lsi, "certified C_LS for the convex model");
      o.detail << ", moment n/a (no certified C_LS)";
    }
    const auto& bd = pr.certificate.boundedness;
    const oracle::Battery bnd = oracle::boundedness_battery(pair, m2, bd.M1, bd.M2, 10, 93);
    o.require(bnd.checks.size() == 10 && bnd.pass(), "boundedness battery");
    o.detail << ", boundedness " << passed(bnd) << "/10 (M1=" << bd.M1 << ", M2=" << bd.M2 << "); ";
  }
}

void c10_derivatives(Outcome& o) {
  const oracle::FdReport r = oracle::fd_derivative_suite(oracle::default_fd_specs(), 200, 101);
  double worst = 0.0;
  for (const auto& e : r.entries) worst = std::max({worst, e.gradient_rel_err, e.hessian_rel_err});
  o.require(r.pass && worst < 1e-6, "potential FD");
  double force = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const ModelConfig a{8, d, make_double_well(0.25, 0.5, d), make_gaussian_bump(0.3, 0.8, true, d)};
    const ModelConfig b{5, d, make_quadratic(1.5, d), make_cosine(0.4, 1.3, d)};
    force = std::max({force, oracle::fd_force_error(a, 20, 102 + d), oracle::fd_force_error(b, 20, 202 + d)});
  }
  o.require(force < 1e-6, "force FD");
  o.detail << r.entries.size() << " family/dim cases, worst rel err=" << worst << ", force rel err=" << force;
}

void c11_reproducibility(Outcome& o) {
  const ModelConfig m = double_well_model(6);
  const std::vector<Observable> obs{Observable::MeanPosition, Observable::KineticEnergy,
                                    Observable::PairDistanceSecondMoment};
  auto series = [&](int threads) {
    const RunResult rr = run(m, {}, 64, 2.0, {}, obs, 5, 77, {threads, false});
    return io::series_csv(rr.series);
  };
  const std::string s1 = series(1), s4 = series(4), s1b = series(1);
  o.require(s1 == s4 && s1 == s1b, "series CSV identical across thread counts");

  auto sweep = [&](int threads) {
    SweepSpec spec;
    spec.Ns = {2, 4};
    spec.replicas = 64;
    spec.horizon = 4.0;
    spec.stride = 5;
    spec.seed = 78;
    const SweepResult r = n_sweep(m, {}, spec, {threads, false});
    io::json j = io::json::array();
    for (const auto& row : r.rows) j.push_back({{"N", row.N}, {"fit", io::to_json(row.outcome)}});
    return j.dump();
  };
  o.require(sweep(1) == sweep(3), "sweep JSON identical across thread counts");

  auto cert = [&] {
    const PipelineResult pr = certify_model(m.U, m.W, {}, ModeChoice::Auto, false);
    return io::to_json(pr.certificate).dump();
  };
  o.require(cert() == cert(), "certificate JSON identical");
  o.detail << "series CSV " << s1.size() << " bytes, sweep and certificate JSON compared";
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
      {1, c1_coefficients}, {2, c2_rate},         {3, c3_interaction_hessian}, {4, c4_rationals},
      {5, c5_split_scaling}, {6, c6_spectral_gap}, {7, c7_calibration},         {8, c8_n_uniformity},
      {9, c9_oracles},       {10, c10_derivatives}, {11, c11_reproducibility}};
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s  (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
