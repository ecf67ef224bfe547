#pragma once

// Radial potential families with exact derivatives, and extraction of the
// scalar constants consumed by the certification pipeline.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfhypo/bounds.hpp"
#include "mfhypo/core.hpp"

namespace mfhypo {

enum class Role { Confinement, Interaction };

// k |x|^2 / 2
struct Quadratic {
  double coef = 1.0;
};

// q |x|^4 - w |x|^2
struct QuarticDoubleWell {
  double quartic = 0.25;
  double well = 0.5;
};

// -A exp(-|x|^2 / (2 sigma^2)) when attractive, +A exp(...) when repulsive.
struct GaussianBump {
  double amplitude = 1.0;
  double width = 1.0;
  bool attractive = true;
};

// A cos(omega |x|)
struct Cosine {
  double amplitude = 1.0;
  double frequency = 1.0;
};

using Family = std::variant<Quadratic, QuarticDoubleWell, GaussianBump, Cosine>;

struct PotentialSpec {
  Family family = Quadratic{};
  int dim = 1;
  Role role = Role::Confinement;
};

inline PotentialSpec make_quadratic(double coef, int dim = 1, Role role = Role::Confinement) {
  return {Quadratic{coef}, dim, role};
}
inline PotentialSpec make_double_well(double quartic, double well, int dim = 1) {
  return {QuarticDoubleWell{quartic, well}, dim, Role::Confinement};
}
inline PotentialSpec make_gaussian_bump(double amplitude, double width, bool attractive, int dim = 1) {
  return {GaussianBump{amplitude, width, attractive}, dim, Role::Interaction};
}
inline PotentialSpec make_cosine(double amplitude, double frequency, int dim = 1,
                                 Role role = Role::Interaction) {
  return {Cosine{amplitude, frequency}, dim, role};
}
// W == 0.
inline PotentialSpec make_zero_interaction(int dim = 1) { return {Quadratic{0.0}, dim, Role::Interaction}; }

inline std::string family_name(const PotentialSpec& s) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Quadratic>) return "Quadratic";
        if constexpr (std::is_same_v<T, QuarticDoubleWell>) return "QuarticDoubleWell";
        if constexpr (std::is_same_v<T, GaussianBump>) return "GaussianBump";
        if constexpr (std::is_same_v<T, Cosine>) return "Cosine";
      },
      s.family);
}

inline bool is_zero(const PotentialSpec& s) {
  const auto* q = std::get_if<Quadratic>(&s.family);
  return q != nullptr && q->coef == 0.0;
}

inline void validate(const PotentialSpec& s) {
  if (s.dim < 1) throw InvalidInput("potential dim must be >= 1");
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (!(f.coef >= 0.0) || !std::isfinite(f.coef)) throw InvalidInput("Quadratic: coef must be >= 0");
        } else if constexpr (std::is_same_v<T, QuarticDoubleWell>) {
          if (!(f.quartic > 0.0) || !std::isfinite(f.quartic)) throw InvalidInput("QuarticDoubleWell: quartic coef must be > 0");
          if (!(f.well >= 0.0) || !std::isfinite(f.well)) throw InvalidInput("QuarticDoubleWell: well coef must be >= 0");
        } else if constexpr (std::is_same_v<T, GaussianBump>) {
          if (!(f.amplitude >= 0.0) || !std::isfinite(f.amplitude)) throw InvalidInput("GaussianBump: amplitude must be >= 0");
          if (!(f.width > 0.0) || !std::isfinite(f.width)) throw InvalidInput("GaussianBump: width must be > 0");
        } else if constexpr (std::is_same_v<T, Cosine>) {
          if (!std::isfinite(f.amplitude)) throw InvalidInput("Cosine: amplitude must be finite");
          if (!(f.frequency > 0.0) || !std::isfinite(f.frequency)) throw InvalidInput("Cosine: frequency must be > 0");
        }
      },
      s.family);
  if (s.role == Role::Confinement) {
    const bool confining = std::holds_alternative<QuarticDoubleWell>(s.family) ||
                           (std::holds_alternative<Quadratic>(s.family) &&
                            std::get<Quadratic>(s.family).coef > 0.0);
    if (!confining) throw InvalidInput("confinement potential must be Quadratic(coef > 0) or QuarticDoubleWell");
  }
}

// Profile P(x) = f(|x|) together with f', f'' and f'(r)/r (finite at r = 0).
struct RadialProfile {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
  double df_over_r = 0.0;
};

inline RadialProfile radial_profile(const PotentialSpec& s, double r) {
  return std::visit(
      [r](const auto& p) -> RadialProfile {
        using T = std::decay_t<decltype(p)>;
        RadialProfile out;
        if constexpr (std::is_same_v<T, Quadratic>) {
          out.f = 0.5 * p.coef * r * r;
          out.df = p.coef * r;
          out.d2f = p.coef;
          out.df_over_r = p.coef;
        } else if constexpr (std::is_same_v<T, QuarticDoubleWell>) {
          const double r2 = r * r;
          out.f = p.quartic * r2 * r2 - p.well * r2;
          out.df_over_r = 4.0 * p.quartic * r2 - 2.0 * p.well;
          out.df = out.df_over_r * r;
          out.d2f = 12.0 * p.quartic * r2 - 2.0 * p.well;
        } else if constexpr (std::is_same_v<T, GaussianBump>) {
          const double s2 = p.width * p.width;
          const double sign = p.attractive ? -1.0 : 1.0;
          const double e = sign * p.amplitude * std::exp(-r * r / (2.0 * s2));
          out.f = e;
          out.df_over_r = -e / s2;
          out.df = out.df_over_r * r;
          out.d2f = e * (r * r / (s2 * s2) - 1.0 / s2);
        } else if constexpr (std::is_same_v<T, Cosine>) {
          const double wr = p.frequency * r;
          out.f = p.amplitude * std::cos(wr);
          out.df = -p.amplitude * p.frequency * std::sin(wr);
          out.d2f = -p.amplitude * p.frequency * p.frequency * std::cos(wr);
          if (wr < 1e-4) {
            out.df_over_r = -p.amplitude * p.frequency * p.frequency * (1.0 - wr * wr / 6.0);
          } else {
            out.df_over_r = out.df / r;
          }
        }
        return out;
      },
      s.family);
}

// Operator norm of the Hessian from the radial profile: the radial eigenvalue
// is f'' and (for d >= 2) the tangential one is f'/r.
inline double hessian_opnorm(const RadialProfile& p, int dim) {
  return dim >= 2 ? std::max(std::abs(p.d2f), std::abs(p.df_over_r)) : std::abs(p.d2f);
}

inline double hessian_min_eig(const RadialProfile& p, int dim) {
  return dim >= 2 ? std::min(p.d2f, p.df_over_r) : p.d2f;
}

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

inline double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline Evaluation eval(const PotentialSpec& s, std::span<const double> x) {
  if (static_cast<int>(x.size()) != s.dim) throw InvalidInput("eval: point dimension mismatch");
  require_finite(x, "eval");
  const double r = norm_of(x);
  const RadialProfile p = radial_profile(s, r);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), s.dim);
  Evaluation out;
  out.value = p.f;
  out.gradient = p.df_over_r * xv;
  out.hessian = p.df_over_r * Eigen::MatrixXd::Identity(s.dim, s.dim);
  if (r > 0.0) {
    const double c = (p.d2f - p.df_over_r) / (r * r);
    for (int i = 0; i < s.dim; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double v = c * xv[i] * xv[j];
        out.hessian(i, j) += v;
        if (i != j) out.hessian(j, i) += v;
      }
    }
  }
  return out;
}

inline double value(const PotentialSpec& s, std::span<const double> x) {
  return radial_profile(s, norm_of(x)).f;
}

// Hot-path gradient without allocation; no input checks.
inline void gradient_into(const PotentialSpec& s, const double* x, double* out) {
  double r2 = 0.0;
  for (int k = 0; k < s.dim; ++k) r2 += x[k] * x[k];
  const double g = radial_profile(s, std::sqrt(r2)).df_over_r;
  for (int k = 0; k < s.dim; ++k) out[k] = g * x[k];
}

// ---------------------------------------------------------------------------
// Closed-form extremes of the Hessian spectrum and of |grad|.

inline double characteristic_length(const PotentialSpec& s) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return p.coef > 0.0 ? 1.0 / std::sqrt(p.coef) : 1.0;
        } else if constexpr (std::is_same_v<T, QuarticDoubleWell>) {
          return std::max(std::sqrt(p.well / (2.0 * p.quartic)), std::pow(p.quartic, -0.25));
        } else if constexpr (std::is_same_v<T, GaussianBump>) {
          return p.width;
        } else {
          return 2.0 * std::numbers::pi / p.frequency;
        }
      },
      s.family);
}

// sup_y |Hess P(y)|_op.
inline double hessian_opnorm_sup(const PotentialSpec& s) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Quadratic>) return p.coef;
        if constexpr (std::is_same_v<T, QuarticDoubleWell>) return kInf;
        if constexpr (std::is_same_v<T, GaussianBump>) return p.amplitude / (p.width * p.width);
        if constexpr (std::is_same_v<T, Cosine>) return std::abs(p.amplitude) * p.frequency * p.frequency;
      },
      s.family);
}

// inf_y of the smallest Hessian eigenvalue.
inline double hessian_min_eig_inf(const PotentialSpec& s) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Quadratic>) return p.coef;
        if constexpr (std::is_same_v<T, QuarticDoubleWell>) return -2.0 * p.well;
        if constexpr (std::is_same_v<T, GaussianBump>) {
          const double scale = p.amplitude / (p.width * p.width);
          // attractive: min of (1 - u^2) e^{-u^2/2} is -2 e^{-3/2} at u = sqrt(3)
          return p.attractive ? -2.0 * std::exp(-1.5) * scale : -scale;
        }
        if constexpr (std::is_same_v<T, Cosine>) return -std::abs(p.amplitude) * p.frequency * p.frequency;
      },
      s.family);
}

// sup_y |grad P(y)|.
inline double gradient_sup(const PotentialSpec& s) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Quadratic>) return p.coef == 0.0 ? 0.0 : kInf;
        if constexpr (std::is_same_v<T, QuarticDoubleWell>) return kInf;
        if constexpr (std::is_same_v<T, GaussianBump>) return p.amplitude / p.width * std::exp(-0.5);
        if constexpr (std::is_same_v<T, Cosine>) return std::abs(p.amplitude) * p.frequency;
      },
      s.family);
}

// ---------------------------------------------------------------------------
// Radial supremum search: 2001-point grid on [0, 50 L], a log-spaced extension
// out to 1e8 L, then golden refinement around the best node. Reports whether
// the maximiser sits at the far end (supremum not attained in the box).

struct RadialSup {
  double value = -kInf;
  double arg = 0.0;
  bool attained = true;
};

template <typename F>
RadialSup radial_sup(F&& f, double length_scale) {
  const double near_box = 50.0 * length_scale;
  std::vector<double> grid = numeric::linspace(0.0, near_box, 2001);
  const std::vector<double> far = numeric::logspace(near_box, 1e8 * length_scale, 2001);
  grid.reserve(grid.size() + far.size());
  for (std::size_t i = 1; i < far.size(); ++i) grid.push_back(far[i]);
  const numeric::Extremum best = numeric::scan_max(f, grid);
  RadialSup out{best.value, best.arg, true};
  const double last = grid.back(), prev = grid[grid.size() - 2];
  if (best.arg >= prev && f(last) > f(prev) * (1.0 + 1e-12) + 1e-300) out.attained = false;
  return out;
}

// Smallest K2 with |Hess U|_op <= K1 |grad U| + K2 everywhere, or nullopt when
// the residual grows without bound (K1 too small).
inline std::optional<double> lyapunov_offset(const PotentialSpec& U, double K1) {
  auto residual = [&](double r) {
    const RadialProfile p = radial_profile(U, r);
    return hessian_opnorm(p, U.dim) - K1 * std::abs(p.df);
  };
  const RadialSup sup = radial_sup(residual, characteristic_length(U));
  if (!sup.attained || !std::isfinite(sup.value)) return std::nullopt;
  const double k2 = positive_part(sup.value);
  return k2 * (1.0 + 1e-12) + (k2 > 0.0 ? 1e-15 : 0.0);
}

struct LyapunovPair {
  double K1 = 0.0;
  double K2 = 0.0;
  double objective = kInf;
};

// Candidate slopes: 0 and 2^-20 .. 2^10.
inline std::vector<double> lyapunov_slope_grid() {
  std::vector<double> out{0.0};
  for (int e = -20; e <= 10; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

inline LyapunovPair select_lyapunov_pair(const PotentialSpec& U,
                                         const std::function<double(double, double)>& objective) {
  LyapunovPair best;
  for (double K1 : lyapunov_slope_grid()) {
    const auto K2 = lyapunov_offset(U, K1);
    if (!K2) continue;
    const double obj = objective(K1, *K2);
    if (obj < best.objective) best = {K1, *K2, obj};
  }
  if (!std::isfinite(best.objective)) throw InvalidInput("no feasible Lyapunov pair for confinement potential");
  return best;
}

// ---------------------------------------------------------------------------

struct ConvexityAtInfinity {
  double cU = 0.0;
  double c = 0.0;
  double R = 0.0;
  Provenance provenance = Provenance::NumericVerified;
};

struct ConstantsBundle {
  Constant K;
  Constant K_prime;  // value +inf when |grad W| is unbounded
  Constant K1;
  Constant K2;
  std::optional<ConvexityAtInfinity> convexity;
  std::optional<Constant> cLip;  // value +inf when the integral diverges
  std::optional<Constant> kappa;
  std::optional<Constant> C_LS;
  int d = 1;
};

inline void check_invariants(const ConstantsBundle& b) {
  if (!(b.K.value >= 0.0)) throw InvalidInput("bundle: K must be >= 0");
  if (!(b.K_prime.value >= 0.0)) throw InvalidInput("bundle: K' must be >= 0");
  if (!(b.K1.value >= 0.0) || !(b.K2.value >= 0.0)) throw InvalidInput("bundle: K1, K2 must be >= 0");
  if (b.kappa && !(b.kappa->value > 0.0)) throw InvalidInput("bundle: kappa must be > 0");
  if (b.C_LS && !(b.C_LS->value > 0.0)) throw InvalidInput("bundle: C_LS must be > 0");
  if (b.d < 1) throw InvalidInput("bundle: d must be >= 1");
}

// K, K', K1, K2 for the pair (U, W). The Lyapunov pair is chosen jointly with
// the boundedness constant M it induces: bounded-gradient formula when K' is
// finite, log-Sobolev formula otherwise (C_LS = 0 if none is known yet).
inline ConstantsBundle extract_constants(const PotentialSpec& U, const PotentialSpec& W,
                                         std::optional<double> c_ls = std::nullopt) {
  validate(U);
  validate(W);
  if (U.dim != W.dim) throw InvalidInput("U and W dimensions differ");
  if (U.role != Role::Confinement || W.role != Role::Interaction) {
    throw InvalidInput("extract_constants expects (Confinement, Interaction) roles");
  }
  ConstantsBundle b;
  b.d = U.dim;
  b.K = {hessian_opnorm_sup(W), Provenance::Analytic};
  b.K_prime = {gradient_sup(W), Provenance::Analytic};
  const double K = b.K.value, Kp = b.K_prime.value;
  const int d = b.d;
  auto objective = [&](double K1, double K2) {
    const bounds::MomentConstants mc =
        std::isfinite(Kp) ? bounds::moment_constants_bounded_gradient(Kp, K1, K2, d)
                          : bounds::moment_constants_log_sobolev(K, K1, K2, c_ls.value_or(0.0), d);
    return bounds::boundedness(mc, K).M;
  };
  const LyapunovPair pair = select_lyapunov_pair(U, objective);
  const bool closed_form = std::holds_alternative<Quadratic>(U.family);
  b.K1 = {pair.K1, closed_form ? Provenance::Analytic : Provenance::NumericVerified};
  b.K2 = {pair.K2, closed_form ? Provenance::Analytic : Provenance::NumericVerified};
  if (closed_form && pair.K1 == 0.0) b.K2.value = std::get<Quadratic>(U.family).coef;
  return b;
}

// ---------------------------------------------------------------------------
// Dissipativity rate of the drift at separation r.
//
// For radial U and W the U-part depends only on x and the W-part only on
// a = x - z, so the supremum splits into two independent searches of
//   phi_P(p) = -<e1, grad P(p) - grad P(p - r e1)>
// over p in the (e1, e2) half-plane (the real line when d = 1).

struct B0Estimate {
  double value = -kInf;
  bool converged = false;
  bool analytic = false;
};

namespace detail {

inline double drift_gap(const PotentialSpec& P, double r, double p1, double p2) {
  const double ga = radial_profile(P, std::hypot(p1, p2)).df_over_r;
  const double gb = radial_profile(P, std::hypot(p1 - r, p2)).df_over_r;
  return -(ga * p1 - gb * (p1 - r));
}

inline B0Estimate drift_gap_sup(const PotentialSpec& P, double r) {
  if (const auto* q = std::get_if<Quadratic>(&P.family)) {
    return {-q->coef * r, true, true};
  }
  const double box = 10.0 * characteristic_length(P) + r;
  B0Estimate out;
  if (P.dim == 1) {
    auto f = [&](double p) { return drift_gap(P, r, p, 0.0); };
    const std::vector<double> grid = numeric::linspace(-box, box + r, 4001);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);
    bool interior = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool local = (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == grid.size() || vals[i] >= vals[i + 1]);
      if (!local) continue;
      const auto lo = grid[i == 0 ? 0 : i - 1], hi = grid[std::min(i + 1, grid.size() - 1)];
      const numeric::Extremum e = numeric::golden_max(f, lo, hi);
      if (e.value > out.value) {
        out.value = e.value;
        interior = i != 0 && i + 1 != grid.size();
      }
    }
    out.converged = interior || std::holds_alternative<GaussianBump>(P.family);
    return out;
  }
  auto f2 = [&](std::span<const double> p) { return drift_gap(P, r, p[0], std::abs(p[1])); };
  const std::vector<double> g1 = numeric::linspace(-box, box + r, 161);
  const std::vector<double> g2 = numeric::linspace(0.0, box, 81);
  struct Start {
    double v, a, b;
  };
  std::vector<Start> starts;
  for (double a : g1) {
    for (double b : g2) {
      const double v = drift_gap(P, r, a, b);
      starts.push_back({v, a, b});
    }
  }
  const std::size_t keep = std::min<std::size_t>(6, starts.size());
  std::partial_sort(starts.begin(), starts.begin() + static_cast<long>(keep), starts.end(),
                    [](const Start& x, const Start& y) { return x.v > y.v; });
  const double step = g1[1] - g1[0];
  for (std::size_t k = 0; k < keep; ++k) {
    const auto res = numeric::nelder_mead_max(f2, {starts[k].a, starts[k].b}, {0.5 * step, 0.5 * step});
    if (res.value > out.value) {
      out.value = res.value;
      out.converged = res.converged;
    }
  }
  return out;
}

}  // namespace detail

inline B0Estimate dissipativity_rate(const PotentialSpec& U, const PotentialSpec& W, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("dissipativity_rate: r must be > 0");
  const B0Estimate u = detail::drift_gap_sup(U, r);
  const B0Estimate w = detail::drift_gap_sup(W, r);
  return {u.value + w.value, u.converged && w.converged, u.analytic && w.analytic};
}

// ---------------------------------------------------------------------------
// c_Lip = 1/4 int_0^inf exp{1/4 int_0^s b0(u) du} s ds.

struct LipschitzResult {
  double value = kInf;
  bool converged = false;
  double truncation = 0.0;
};

struct LipschitzOptions {
  double panel = 0.25;
  double max_s = 1000.0;
  double tail_rtol = 1e-10;
};

inline LipschitzResult lipschitz_constant(const std::function<double(double)>& b0,
                                          const LipschitzOptions& opt = {}) {
  LipschitzResult out;
  double inner = 0.0;  // int_0^s0 b0
  double outer = 0.0;
  for (double s0 = 0.0; s0 < opt.max_s; s0 += opt.panel) {
    const double s1 = s0 + opt.panel;
    const double mid = 0.5 * (s0 + s1), half = 0.5 * opt.panel;
    double panel_sum = 0.0;
    for (std::size_t i = 0; i < numeric::kGLNodes.size(); ++i) {
      const double t = mid + half * numeric::kGLNodes[i];
      const double partial = inner + numeric::gauss_legendre(b0, s0, t);
      panel_sum += numeric::kGLWeights[i] * std::exp(0.25 * partial) * t;
    }
    outer += 0.25 * half * panel_sum;
    inner += numeric::gauss_legendre(b0, s0, s1);
    if (!std::isfinite(outer) || 0.25 * inner > 700.0) return out;
    const double slope = b0(s1);
    if (slope < 0.0) {
      const double tail = 0.25 * std::exp(0.25 * inner) * (4.0 * s1 / -slope + 16.0 / (slope * slope));
      if (tail < opt.tail_rtol * outer) {
        out.value = outer;
        out.converged = true;
        out.truncation = s1;
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convexity at infinity:
//   <grad U(x) - grad U(y), x - y> >= cU |x-y|^2 - c |x-y| 1{|x-y| <= R}.
// The triple maximises the UPI slack (cU - K) e^{-cR/4} - 2K over R, with c
// minimal for each R, and is re-verified on 1e4 random pairs.

namespace detail {

struct PairSample {
  double delta;
  double ratio;  // <grad U(x) - grad U(y), x - y> / |x-y|^2
};

inline double pair_inner(const PotentialSpec& U, std::span<const double> x, std::span<const double> y) {
  std::vector<double> gx(x.size()), gy(y.size());
  gradient_into(U, x.data(), gx.data());
  gradient_into(U, y.data(), gy.data());
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (gx[k] - gy[k]) * (x[k] - y[k]);
  return s;
}

inline std::vector<PairSample> sample_pairs(const PotentialSpec& U, double box) {
  std::vector<PairSample> out;
  if (U.dim == 1) {
    const auto g = numeric::linspace(-box, box, 401);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double x = g[i], y = g[j];
        const double dl = x - y;
        out.push_back({dl, pair_inner(U, std::span(&x, 1), std::span(&y, 1)) / (dl * dl)});
      }
    }
    return out;
  }
  const auto radii = numeric::linspace(0.0, box, 81);
  const auto angles = numeric::linspace(0.0, std::numbers::pi, 41);
  std::vector<double> x(static_cast<std::size_t>(U.dim), 0.0), y(x.size(), 0.0);
  for (double s : radii) {
    for (double t : radii) {
      for (double th : angles) {
        x[0] = s;
        y[0] = t * std::cos(th);
        y[1] = t * std::sin(th);
        const double dl = std::hypot(x[0] - y[0], y[1]);
        if (dl < 1e-12) continue;
        out.push_back({dl, pair_inner(U, x, y) / (dl * dl)});
      }
    }
  }
  return out;
}

}  // namespace detail

inline bool convexity_holds(const ConvexityAtInfinity& t, const PotentialSpec& U, std::span<const double> x,
                            std::span<const double> y, double slack = 1e-10) {
  double dl2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) dl2 += (x[k] - y[k]) * (x[k] - y[k]);
  const double dl = std::sqrt(dl2);
  const double lhs = detail::pair_inner(U, x, y);
  const double rhs = t.cU * dl2 - (dl <= t.R ? t.c * dl : 0.0);
  return lhs >= rhs - slack * (1.0 + std::abs(rhs));
}

inline std::optional<ConvexityAtInfinity> convexity_at_infinity_fit(const PotentialSpec& U,
                                                                    const PotentialSpec& W,
                                                                    std::uint64_t seed = 0x5eed) {
  validate(U);
  if (U.role != Role::Confinement) return std::nullopt;
  if (const auto* q = std::get_if<Quadratic>(&U.family)) {
    return ConvexityAtInfinity{q->coef, 0.0, 0.0, Provenance::Analytic};
  }
  const double K = std::isfinite(hessian_opnorm_sup(W)) ? hessian_opnorm_sup(W) : 0.0;
  const double box = 5.0 * characteristic_length(U);
  std::vector<detail::PairSample> pairs = detail::sample_pairs(U, box);
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });

  // suffix minimum of the ratio over pairs with delta >= R
  std::vector<double> suffix_min(pairs.size() + 1, kInf);
  for (std::size_t i = pairs.size(); i-- > 0;) suffix_min[i] = std::min(suffix_min[i + 1], pairs[i].ratio);

  std::optional<ConvexityAtInfinity> best;
  double best_score = -kInf;
  for (double R : numeric::linspace(0.0, 2.0 * box, 401)) {
    const auto first_far = std::lower_bound(pairs.begin(), pairs.end(), R,
                                            [](const auto& p, double v) { return p.delta < v; });
    const double cU = suffix_min[static_cast<std::size_t>(first_far - pairs.begin())];
    if (!std::isfinite(cU)) break;
    double c = 0.0;
    for (auto it = pairs.begin(); it != pairs.end() && it->delta <= R; ++it) {
      c = std::max(c, it->delta * (cU - it->ratio));
    }
    const double score = (cU - K) * std::exp(-c * R / 4.0) - 2.0 * K;
    if (score > best_score) {
      best_score = score;
      best = ConvexityAtInfinity{cU, c, c > 0.0 ? R : 0.0, Provenance::NumericVerified};
    }
  }
  if (!best || !(best->cU > 0.0)) return std::nullopt;

  // Random-pair verification; violations tighten the triple.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-2.0 * box, 2.0 * box);
  std::vector<double> x(static_cast<std::size_t>(U.dim)), y(x.size());
  for (int pass = 0; pass < 4; ++pass) {
    bool clean = true;
    std::mt19937_64 local(rng());
    for (int k = 0; k < 10000; ++k) {
      for (auto& v : x) v = uni(local);
      for (auto& v : y) v = uni(local);
      if (convexity_holds(*best, U, x, y, 0.0)) continue;
      clean = false;
      double dl2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dl2 += (x[i] - y[i]) * (x[i] - y[i]);
      const double dl = std::sqrt(dl2);
      const double inner = detail::pair_inner(U, x, y);
      if (dl <= best->R) {
        best->c = std::max(best->c, (best->cU * dl2 - inner) / dl * (1.0 + 1e-12));
      } else {
        best->cU = std::min(best->cU, inner / dl2 * (1.0 - 1e-12));
      }
    }
    if (clean) break;
  }
  if (!(best->cU > 0.0)) return std::nullopt;
  return best;
}

}  // namespace mfhypo
