#pragma once

// H^1 hypocoercive rate certificate: boundedness constants, the twisted-norm
// coefficients (a, b, c, lambda0), the 4x4 coercivity matrix, its PSD check,
// the rate lambda and the prefactor C0.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mfhypo/bounds.hpp"
#include "mfhypo/core.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo {

enum class CertMode { BoundedGradient, LogSobolev };
enum class CoefficientVariant { SingleM, SplitCase1, SplitCase2 };

inline const char* to_string(CertMode m) { return m == CertMode::BoundedGradient ? "thm3" : "thm4"; }
inline const char* to_string(CoefficientVariant v) {
  switch (v) {
    case CoefficientVariant::SingleM: return "single_M";
    case CoefficientVariant::SplitCase1: return "split_case1";
    case CoefficientVariant::SplitCase2: return "split_case2";
  }
  return "unknown";
}

// Missing prerequisite; carries the name of the constant and what would fix it.
class MissingConstant : public std::runtime_error {
 public:
  MissingConstant(std::string constant, std::string remedy)
      : std::runtime_error("missing constant " + constant + ": " + remedy),
        constant_(std::move(constant)),
        remedy_(std::move(remedy)) {}
  const std::string& constant() const { return constant_; }
  const std::string& remedy() const { return remedy_; }

 private:
  std::string constant_;
  std::string remedy_;
};

struct BoundednessConstants {
  double C1 = 0.0;
  double C2 = 0.0;
  double M = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
  CertMode mode = CertMode::BoundedGradient;
};

inline bounds::MomentConstants constants_thm3(double K, double K_prime, double K1, double K2, int d) {
  (void)K;
  return bounds::moment_constants_bounded_gradient(K_prime, K1, K2, d);
}

inline bounds::MomentConstants constants_thm4(double K, double K1, double K2, double C_LS, int d) {
  return bounds::moment_constants_log_sobolev(K, K1, K2, C_LS, d);
}

struct Coefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double lambda0 = 0.0;
  CoefficientVariant variant = CoefficientVariant::SingleM;
};

// a = 1/(25M), b = 1/(200M^2), c = 1/(800M^3), lambda0 = 1/(440M^2), M clamped to >= 1.
inline Coefficients default_coefficients(double M) {
  const double m = std::max(M, 1.0);
  return {1.0 / (25.0 * m), 1.0 / (200.0 * m * m), 1.0 / (800.0 * m * m * m), 1.0 / (440.0 * m * m),
          CoefficientVariant::SingleM};
}

using Matrix4 = Eigen::Matrix4d;

inline Matrix4 build_T(double a, double b, double c, double M) {
  const double s = std::sqrt(M);
  Matrix4 T;
  // clang-format off
  T << 1.0 + a - b * s,        0.0, -(a + b + c * s) / 2.0, -b * s / 2.0,
       0.0,                    a,   0.0,                    -b,
       -(a + b + c * s) / 2.0, 0.0, b,                      -c * s / 2.0,
       -b * s / 2.0,           -b,  -c * s / 2.0,           c;
  // clang-format on
  return T;
}

// Split-constant matrix with entry (1,4) carrying sqrt(M2) and (4,1)
// carrying sqrt(M1). Not symmetric; kept for reference.
inline Matrix4 build_Tprime_literal(double a, double b, double c, double M1, double M2) {
  const double s1 = std::sqrt(M1), s2 = std::sqrt(M2);
  Matrix4 T;
  // clang-format off
  T << 1.0 + a - b * s2,        0.0, -(a + b + c * s2) / 2.0, -b * s2 / 2.0,
       0.0,                     a,   0.0,                     -b,
       -(a + b + c * s2) / 2.0, 0.0, b,                       -c * s1 / 2.0,
       -b * s1 / 2.0,           -b,  -c * s1 / 2.0,           c;
  // clang-format on
  return T;
}

// Split-constant matrix used for certification. The Z1*Z4 cross term of the
// bound b<grad_v h, Hess V grad_v h> >= -b Z1 (sqrt(M1) Z4 + sqrt(M2) Z1) has
// coefficient -b sqrt(M1), so both (1,4) and (4,1) are -b sqrt(M1)/2. With
// M1 = M2 = M this is exactly build_T.
inline Matrix4 build_Tprime(double a, double b, double c, double M1, double M2) {
  Matrix4 T = build_Tprime_literal(a, b, c, M1, M2);
  T(0, 3) = T(3, 0);
  return T;
}

inline Matrix4 symmetrize(const Matrix4& T) { return 0.5 * (T + T.transpose()); }

// Smallest eigenvalue of T - Diag(lambda0, 0, lambda0, 0).
inline double verify_coercivity(const Matrix4& T, double lambda0) {
  Matrix4 S = symmetrize(T);
  S(0, 0) -= lambda0;
  S(2, 2) -= lambda0;
  return Eigen::SelfAdjointEigenSolver<Matrix4>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline constexpr double kPsdTolerance = 1e-12;

inline double rate_lambda(double lambda0, double a, double c, double kappa) {
  return lambda0 * std::min(1.0 / (2.0 * a + 1.0), kappa / (2.0 * c * kappa + 1.0));
}

struct NormEquivalence {
  double c1 = 0.0;
  double c2 = 0.0;
  double C0 = kInf;
  bool valid = false;
};

// ((h,h)) = |h|^2 + q(grad_v h, grad_x h) with q = [[a, b], [b, c]].
inline NormEquivalence norm_equivalence(double a, double b, double c) {
  NormEquivalence out;
  if (!(b * b < a * c)) return out;
  const double tr = a + c, det = a * c - b * b;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double hi = 0.5 * tr + disc;
  const double lo = det / hi;  // avoids cancellation in 0.5 tr - disc
  out.c1 = std::sqrt(std::min(1.0, lo));
  out.c2 = std::sqrt(std::max(1.0, hi));
  out.C0 = out.c2 / out.c1;
  out.valid = true;
  return out;
}

namespace split {
// Case M1 <= 1: beta = (alpha + beta + gamma)^2, alpha gamma = 2 beta^2, gamma = 3 beta / 8.
inline constexpr long long kDen = 25921;
inline constexpr long long kAlphaNum = 3072;
inline constexpr long long kBetaNum = 576;
inline constexpr long long kGammaNum = 216;
}  // namespace split

// Returns the failed inequality, if any, of the sufficient condition set for
// the split coefficients.
inline std::optional<std::string> split_conditions_violation(const Coefficients& k, double M1, double M2) {
  const double tol = 1e-12;
  const double s1 = std::sqrt(M1), s2 = std::sqrt(M2);
  auto le = [tol](double lhs, double rhs) { return lhs <= rhs * (1.0 + tol) + 1e-300; };
  if (!le(k.b * s2, 0.25)) return "b sqrt(M2) <= 1/4";
  if (!le(k.lambda0, 0.25) || std::abs(k.lambda0 - k.b / 4.0) > tol * k.b) return "lambda0 = b/4 <= 1/4";
  const double t13 = (k.a + k.b + k.c * s2) / 2.0;
  if (!le(t13 * t13, k.b / 4.0)) return "b/4 >= ((a + b + c sqrt(M2))/2)^2";
  if (!le(std::pow(k.b * s1 / 2.0, 2), k.a * k.c / 8.0)) return "a c/8 >= (b sqrt(M1)/2)^2";
  if (!le(k.b * k.b, k.a * k.c / 2.0)) return "a c/2 >= b^2";
  if (!le(std::pow(k.c * s1 / 2.0, 2), k.b * 3.0 * k.c / 32.0)) return "(b/4)(3c/8) >= (c sqrt(M1)/2)^2";
  return std::nullopt;
}

struct SplitCoefficients {
  Coefficients coefficients;
  bool fell_back = false;
  std::string diagnostic;
};

inline SplitCoefficients improved_coefficients(double M1, double M2) {
  if (!(M1 > 0.0) || !(M2 > 0.0)) throw InvalidInput("improved_coefficients: M1, M2 must be > 0");
  const double M = std::max(1.0, M2);
  const double q = std::pow(M, 0.25);
  Coefficients k;
  if (M1 <= 1.0) {
    const double den = static_cast<double>(split::kDen);
    k.a = static_cast<double>(split::kAlphaNum) / den / q;
    k.b = static_cast<double>(split::kBetaNum) / den / (q * q);
    k.c = static_cast<double>(split::kGammaNum) / den / (q * q * q);
    k.variant = CoefficientVariant::SplitCase1;
  } else {
    const double beta = 1.0 / std::pow(16.0 * M1 * M1 / 3.0 + 1.0 + 3.0 / (8.0 * M1), 2);
    k.a = 16.0 * M1 * M1 * beta / (3.0 * q);
    k.b = beta / (q * q);
    k.c = 3.0 * beta / (8.0 * M1 * q * q * q);
    k.variant = CoefficientVariant::SplitCase2;
  }
  k.lambda0 = k.b / 4.0;
  SplitCoefficients out{k, false, {}};
  if (auto bad = split_conditions_violation(k, M1, M2)) {
    out.coefficients = default_coefficients(std::max({1.0, M1, M2}));
    out.fell_back = true;
    out.diagnostic = "split conditions violated (" + *bad + "); using single-M coefficients";
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CoefficientSet {
  Coefficients coefficients;
  Matrix4 T = Matrix4::Zero();
  double psd_witness = 0.0;
  double lambda = 0.0;
  NormEquivalence norms;
  bool valid = false;
  std::string diagnostic;
};

inline CoefficientSet evaluate_coefficients(const Coefficients& k, const Matrix4& T, double kappa) {
  CoefficientSet s;
  s.coefficients = k;
  s.T = T;
  s.psd_witness = verify_coercivity(T, k.lambda0);
  s.lambda = rate_lambda(k.lambda0, k.a, k.c, kappa);
  s.norms = norm_equivalence(k.a, k.b, k.c);
  s.valid = s.psd_witness >= -kPsdTolerance && s.norms.valid && k.a > 0 && k.b > 0 && k.c > 0 &&
            k.lambda0 > 0 && s.lambda > 0 && s.lambda <= k.lambda0;
  if (!s.norms.valid) s.diagnostic = "b^2 >= ac: twisted norm not equivalent to H^1";
  else if (s.psd_witness < -kPsdTolerance) s.diagnostic = "coercivity matrix not PSD";
  return s;
}

// Largest lambda0 keeping T - Diag(lambda0, 0, lambda0, 0) PSD (bisection).
inline double max_lambda0(const Matrix4& T) {
  if (verify_coercivity(T, 0.0) < -kPsdTolerance) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (verify_coercivity(T, hi) >= 0.0 && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (verify_coercivity(T, mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

// Coordinate search over log-multipliers of (a, b, c), each candidate paired
// with the largest admissible lambda0. Starts from `start`; never reported as
// the literal choice.
template <typename MatrixBuilder>
CoefficientSet refine_coefficients(const Coefficients& start, MatrixBuilder&& build, double kappa) {
  auto score = [&](const std::array<double, 3>& e) {
    Coefficients k = start;
    k.a *= std::exp2(e[0]);
    k.b *= std::exp2(e[1]);
    k.c *= std::exp2(e[2]);
    const Matrix4 T = build(k.a, k.b, k.c);
    k.lambda0 = max_lambda0(T);
    CoefficientSet s = evaluate_coefficients(k, T, kappa);
    return s;
  };
  std::array<double, 3> e{0.0, 0.0, 0.0};
  CoefficientSet best = score(e);
  for (double step = 4.0; step > 1.0 / 64.0; step /= 2.0) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sgn : {-1.0, 1.0}) {
          auto trial = e;
          trial[axis] += sgn * step;
          const CoefficientSet s = score(trial);
          if (s.valid && s.lambda > best.lambda * (1.0 + 1e-12)) {
            best = s;
            e = trial;
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

struct Certificate {
  int schema_version = 1;
  CertMode mode = CertMode::BoundedGradient;
  CoefficientVariant variant = CoefficientVariant::SingleM;
  BoundednessConstants boundedness;
  double kappa = 0.0;
  Provenance kappa_provenance = Provenance::Analytic;
  double M_used = 0.0;  // M after clamping (single-M variant)
  CoefficientSet literal;
  std::optional<CoefficientSet> refined;
  std::optional<CoefficientSet> single_m;  // reported alongside the split variant
  std::string fallback_diagnostic;
  ConstantsBundle inputs;
  bool valid = false;
  bool certified = false;
  bool non_literal = false;  // a criterion-derived constant entered

  double a() const { return literal.coefficients.a; }
  double b() const { return literal.coefficients.b; }
  double c() const { return literal.coefficients.c; }
  double lambda0() const { return literal.coefficients.lambda0; }
  double lambda() const { return literal.lambda; }
  double C0() const { return literal.norms.C0; }
  double psd_witness() const { return literal.psd_witness; }
};

struct CertifyOptions {
  bool use_split = false;
  bool refine = true;  // disabled by --paper-literal
};

// N never enters: every field is a function of (K, K', K1, K2, kappa, C_LS, d).
inline Certificate certify(const ConstantsBundle& bundle, CertMode mode, const CertifyOptions& opt = {}) {
  check_invariants(bundle);
  Certificate cert;
  cert.inputs = bundle;
  cert.mode = mode;
  const double K = bundle.K.value;
  if (!std::isfinite(K)) {
    throw MissingConstant("K", "Hess W is unbounded; choose an interaction with bounded Hessian");
  }
  std::vector<Provenance> used{bundle.K.provenance, bundle.K1.provenance, bundle.K2.provenance};

  bounds::MomentConstants mc;
  if (mode == CertMode::BoundedGradient) {
    if (!bundle.K_prime.finite()) {
      throw MissingConstant("K_prime", "grad W unbounded: provide C_LS and use --mode thm4");
    }
    if (!bundle.kappa) {
      throw MissingConstant("kappa", "no Poincare constant: supply kappa, or a convex/criterion-satisfying model");
    }
    mc = constants_thm3(K, bundle.K_prime.value, bundle.K1.value, bundle.K2.value, bundle.d);
    cert.kappa = bundle.kappa->value;
    cert.kappa_provenance = bundle.kappa->provenance;
    used.push_back(bundle.K_prime.provenance);
    used.push_back(bundle.kappa->provenance);
  } else {
    if (!bundle.C_LS) {
      throw MissingConstant("C_LS", "no log-Sobolev constant: supply C_LS or rho_marginal, or use a convex model");
    }
    mc = constants_thm4(K, bundle.K1.value, bundle.K2.value, bundle.C_LS->value, bundle.d);
    const double from_lsi = 1.0 / bundle.C_LS->value;
    cert.kappa = from_lsi;
    cert.kappa_provenance = bundle.C_LS->provenance;
    if (bundle.kappa && bundle.kappa->value > from_lsi) {
      cert.kappa = bundle.kappa->value;
      cert.kappa_provenance = bundle.kappa->provenance;
    }
    used.push_back(bundle.C_LS->provenance);
    used.push_back(cert.kappa_provenance);
  }
  const bounds::Boundedness bd = bounds::boundedness(mc, K);
  cert.boundedness = {mc.C1, mc.C2, bd.M, bd.M1, bd.M2, mode};
  cert.M_used = std::max(bd.M, 1.0);

  const Coefficients single = default_coefficients(bd.M);
  const CoefficientSet single_set = evaluate_coefficients(single, build_T(single.a, single.b, single.c, cert.M_used), cert.kappa);

  if (opt.use_split && bd.M1 > 0.0 && bd.M2 > 0.0) {
    const SplitCoefficients sc = improved_coefficients(bd.M1, bd.M2);
    const Coefficients& k = sc.coefficients;
    const Matrix4 T = sc.fell_back ? build_T(k.a, k.b, k.c, std::max({1.0, bd.M1, bd.M2}))
                                   : build_Tprime(k.a, k.b, k.c, bd.M1, bd.M2);
    cert.literal = evaluate_coefficients(k, T, cert.kappa);
    cert.variant = k.variant;
    cert.fallback_diagnostic = sc.diagnostic;
    cert.single_m = single_set;
    if (opt.refine && !sc.fell_back) {
      const double M1 = bd.M1, M2 = bd.M2;
      cert.refined = refine_coefficients(
          k, [&](double a, double b, double c) { return build_Tprime(a, b, c, M1, M2); }, cert.kappa);
    }
  } else {
    cert.literal = single_set;
    cert.variant = CoefficientVariant::SingleM;
    if (opt.refine) {
      const double M = cert.M_used;
      cert.refined = refine_coefficients(
          single, [&](double a, double b, double c) { return build_T(a, b, c, M); }, cert.kappa);
    }
  }
  cert.valid = cert.literal.valid;
  bool strict = true;
  for (Provenance p : used) {
    if (!is_certifying(p)) strict = false;
    if (p == Provenance::CriterionDerived) cert.non_literal = true;
  }
  cert.certified = cert.valid && strict;
  return cert;
}

}  // namespace mfhypo
