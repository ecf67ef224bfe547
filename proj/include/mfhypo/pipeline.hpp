#pragma once

// End-to-end constant derivation: every available route to kappa and C_LS is
// evaluated, the best certifying value of each is kept, and the bundle is
// handed to the certifier.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mfhypo/certifier.hpp"
#include "mfhypo/core.hpp"
#include "mfhypo/funcineq.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo {

inline constexpr double kNumericMargin = 1e-8;

struct CurvatureSources {
  std::optional<double> kappa;         // user-supplied Poincare constant
  std::optional<double> C_LS;          // user-supplied log-Sobolev constant
  std::optional<double> rho_marginal;  // LSI constant of the one-particle conditionals
  bool auto_derive = true;
  std::uint64_t seed = 0x5eed;
};

struct CurvatureCandidate {
  std::string quantity;  // "kappa" or "C_LS"
  std::string source;
  Constant value;
};

struct DerivedConstants {
  ConstantsBundle bundle;
  std::vector<CurvatureCandidate> candidates;
  std::optional<B0Estimate> b0_at_one;
  std::optional<LipschitzResult> lipschitz;
  std::optional<double> upi_slack;
  std::vector<std::string> notes;
};

// One-particle conditional curvature: Hess U + (1 - 1/N) Hess W >= kappa1 - kappa2^-.
inline std::optional<Constant> rho_marginal_bakry_emery(const PotentialSpec& U, const PotentialSpec& W) {
  const double v = hessian_min_eig_inf(U) - negative_part(hessian_min_eig_inf(W));
  if (!(v > 0.0)) return std::nullopt;
  return Constant{v, Provenance::Analytic};
}

inline LipschitzResult lipschitz_for(const PotentialSpec& U, const PotentialSpec& W, bool& all_converged) {
  all_converged = true;
  auto b0 = [&](double r) {
    if (r <= 0.0) return 0.0;
    const B0Estimate e = dissipativity_rate(U, W, r);
    all_converged = all_converged && e.converged;
    return e.value;
  };
  return lipschitz_constant(b0);
}

inline DerivedConstants derive_constants(const PotentialSpec& U, const PotentialSpec& W, const CurvatureSources& src) {
  DerivedConstants out;
  ConstantsBundle b = extract_constants(U, W);
  const double K = b.K.value;
  auto add = [&](const std::string& q, const std::string& s, Constant c) { out.candidates.push_back({q, s, c}); };

  if (src.kappa) add("kappa", "user", {*src.kappa, Provenance::UserSupplied});
  if (src.C_LS) add("C_LS", "user", {*src.C_LS, Provenance::UserSupplied});

  if (src.auto_derive) {
    if (const auto be = kappa_bakry_emery(U, W)) {
      add("kappa", "bakry_emery", be->kappa);
      add("C_LS", "bakry_emery", be->C_LS);
    }
    if (std::isfinite(K)) {
      bool converged = true;
      const LipschitzResult lr = lipschitz_for(U, W, converged);
      out.lipschitz = lr;
      out.b0_at_one = dissipativity_rate(U, W, 1.0);
      if (lr.converged) {
        const bool analytic = out.b0_at_one->analytic;
        const Constant cLip{lr.value, converged ? Provenance::NumericVerified : Provenance::NumericEstimate};
        b.cLip = cLip;
        if (!analytic && !converged) out.notes.push_back("b0 supremum search did not converge everywhere");
        if (auto k = kappa_thm1(upiw_h_lower_bound(K), cLip)) add("kappa", "lipschitz_h", *k);
        std::optional<Constant> rho;
        if (src.rho_marginal) {
          rho = Constant{*src.rho_marginal, Provenance::UserSupplied};
        } else {
          rho = rho_marginal_bakry_emery(U, W);
        }
        if (rho) {
          if (auto c = lsi_thm2(*rho, cLip, K)) add("C_LS", "lipschitz_lsi", *c);
        }
      } else {
        out.notes.push_back("cLip integral diverges");
      }
      if (const auto t = convexity_at_infinity_fit(U, W, src.seed)) {
        b.convexity = t;
        out.upi_slack = upi_slack(*t, K);
        if (auto k = upi_criterion(*t, K)) add("kappa", "upi_criterion", *k);
        if (ulsi_criterion(*t, K)) {
          std::optional<Constant> rho = src.rho_marginal
                                            ? std::optional<Constant>(Constant{*src.rho_marginal, Provenance::UserSupplied})
                                            : rho_marginal_bakry_emery(U, W);
          const auto bound = ulsi_lipschitz_bound(*t, K);
          if (rho && bound) {
            if (auto c = lsi_thm2(*rho, *bound, K)) add("C_LS", "ulsi_criterion", *c);
          }
        }
      }
    }
  }

  // Best certifying values; a log-Sobolev constant also yields kappa >= 1/C_LS.
  // Quadrature-based values carry a relative margin of kNumericMargin.
  std::optional<Constant> best_kappa, best_cls;
  for (const auto& c : out.candidates) {
    if (!is_certifying(c.value.provenance) || !(c.value.value > 0.0) || !std::isfinite(c.value.value)) continue;
    Constant v = c.value;
    const bool numeric = v.provenance == Provenance::NumericVerified;
    if (c.quantity == "kappa") {
      if (numeric) v.value *= 1.0 - kNumericMargin;
      if (!best_kappa || v.value > best_kappa->value) best_kappa = v;
    } else {
      if (numeric) v.value *= 1.0 + kNumericMargin;
      if (!best_cls || v.value < best_cls->value) best_cls = v;
    }
  }
  if (best_cls) {
    const Constant from_lsi{1.0 / best_cls->value, best_cls->provenance};
    if (!best_kappa || from_lsi.value > best_kappa->value) best_kappa = from_lsi;
    b = [&] {
      ConstantsBundle refreshed = extract_constants(U, W, best_cls->value);
      refreshed.cLip = b.cLip;
      refreshed.convexity = b.convexity;
      return refreshed;
    }();
  }
  b.kappa = best_kappa;
  b.C_LS = best_cls;
  out.bundle = b;
  return out;
}

enum class ModeChoice { Auto, Thm3, Thm4, Split };

inline CertMode resolve_mode(ModeChoice choice, const ConstantsBundle& b) {
  switch (choice) {
    case ModeChoice::Thm3: return CertMode::BoundedGradient;
    case ModeChoice::Thm4: return CertMode::LogSobolev;
    default: return b.K_prime.finite() ? CertMode::BoundedGradient : CertMode::LogSobolev;
  }
}

struct PipelineResult {
  DerivedConstants derived;
  Certificate certificate;
};

inline PipelineResult certify_model(const PotentialSpec& U, const PotentialSpec& W, const CurvatureSources& src,
                                    ModeChoice choice, bool paper_literal) {
  PipelineResult r;
  r.derived = derive_constants(U, W, src);
  CertifyOptions opt;
  opt.use_split = choice == ModeChoice::Split;
  opt.refine = !paper_literal;
  r.certificate = certify(r.derived.bundle, resolve_mode(choice, r.derived.bundle), opt);
  return r;
}

}  // namespace mfhypo
