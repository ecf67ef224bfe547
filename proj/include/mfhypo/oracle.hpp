#pragma once

// Quadrature checks of the functional inequalities on desk-scale grids
// (one particle in 1D, or N = 2 particles in d = 1), plus finite-difference
// checks of potential derivatives and forces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfhypo/core.hpp"
#include "mfhypo/funcineq.hpp"
#include "mfhypo/meanfield.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo::oracle {

struct GaussianBumpFn {
  double center = 0.0;
  double width = 1.0;
  double base = 0.0;  // f = base + exp(-(x-center)^2 / (2 width^2))
};
struct PolynomialFn {
  std::vector<double> coefficients;  // f = sum_k c_k x^k
};
struct LogisticFn {
  double center = 0.0;
  double scale = 1.0;
};

enum class Purpose { SPositive, GGeneric };

struct TestFunctionSpec {
  std::variant<GaussianBumpFn, PolynomialFn, LogisticFn> family;
  Purpose purpose = Purpose::GGeneric;
};

struct Jet {
  double f = 0.0, df = 0.0, d2f = 0.0;
};

inline Jet evaluate(const TestFunctionSpec& s, double x) {
  return std::visit(
      [x](const auto& p) -> Jet {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianBumpFn>) {
          const double u = (x - p.center) / p.width;
          const double e = std::exp(-0.5 * u * u);
          return {p.base + e, -u / p.width * e, (u * u - 1.0) / (p.width * p.width) * e};
        } else if constexpr (std::is_same_v<T, PolynomialFn>) {
          Jet j;
          for (std::size_t k = p.coefficients.size(); k-- > 0;) {
            j.d2f = j.d2f * x + 2.0 * j.df;
            j.df = j.df * x + j.f;
            j.f = j.f * x + p.coefficients[k];
          }
          return j;
        } else {
          const double z = (x - p.center) / p.scale;
          const double s = 1.0 / (1.0 + std::exp(-z));
          return {s, s * (1.0 - s) / p.scale, s * (1.0 - s) * (1.0 - 2.0 * s) / (p.scale * p.scale)};
        }
      },
      s.family);
}

inline std::string describe(const TestFunctionSpec& s) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianBumpFn>) {
          return "gaussian(c=" + std::to_string(p.center) + ",w=" + std::to_string(p.width) +
                 ",base=" + std::to_string(p.base) + ")";
        } else if constexpr (std::is_same_v<T, PolynomialFn>) {
          std::string out = "poly(";
          for (std::size_t k = 0; k < p.coefficients.size(); ++k) out += (k ? "," : "") + std::to_string(p.coefficients[k]);
          return out + ")";
        } else {
          return "logistic(c=" + std::to_string(p.center) + ",s=" + std::to_string(p.scale) + ")";
        }
      },
      s.family);
}

inline TestFunctionSpec random_test_function(std::mt19937_64& rng, Purpose purpose) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kind = static_cast<int>(u(rng) * 3.0);
  TestFunctionSpec s;
  s.purpose = purpose;
  if (kind == 0) {
    s.family = GaussianBumpFn{-2.0 + 4.0 * u(rng), 0.5 + 1.5 * u(rng), purpose == Purpose::SPositive ? 0.05 + u(rng) : 0.0};
  } else if (kind == 1) {
    if (purpose == Purpose::SPositive) {
      // 1 + c1 x + c2 x^2 with c2 > c1^2 / 4 stays positive
      const double c1 = -1.0 + 2.0 * u(rng);
      s.family = PolynomialFn{{1.0, c1, 0.25 * c1 * c1 + 0.1 + u(rng)}};
    } else {
      s.family = PolynomialFn{{-1.0 + 2.0 * u(rng), -1.0 + 2.0 * u(rng), -0.5 + u(rng)}};
    }
  } else {
    s.family = LogisticFn{-2.0 + 4.0 * u(rng), 0.3 + 1.7 * u(rng)};
  }
  return s;
}

struct Check {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::string label;
};

// For S > 0, int -(HS/S) g^2 dm <= int |grad g|^2 dm with H the
// discrete generator and the discrete Dirichlet form on a 1D grid.
inline Check verify_lyapunov_lemma(const GridMeasure& m, const TestFunctionSpec& S, const TestFunctionSpec& g) {
  if (m.dims != 1) throw InvalidInput("verify_lyapunov_lemma: needs a 1D grid");
  std::vector<double> s(m.size()), gv(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    s[i] = evaluate(S, m.axis[i]).f;
    gv[i] = evaluate(g, m.axis[i]).f;
    if (!(s[i] > 0.0)) throw InvalidInput("verify_lyapunov_lemma: S must be > 0 at every node");
  }
  const std::vector<double> hs = apply_generator(m, s);
  std::vector<double> integrand(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) integrand[i] = -hs[i] / s[i] * gv[i] * gv[i];
  Check c;
  c.lhs = integrate(m, integrand);
  c.rhs = dirichlet_form(m, gv);
  c.pass = c.lhs <= c.rhs + 1e-8 * (1.0 + std::abs(c.rhs));
  c.label = "S=" + describe(S) + " g=" + describe(g);
  return c;
}

// Product test function on the (x1, x2) plane.
struct PlaneFunction {
  TestFunctionSpec first;
  TestFunctionSpec second;
};

// Moment bound for N = 2, d = 1:
//   int F g^2 dm <= (2 C_LS / tau) int |grad g|^2 dm + (d ln(1/(1 - 4 tau C_LS)) / (2 tau)) int g^2 dm
// with F = |x1 - x2|^2.
inline Check verify_moment_bound(const GridMeasure& m, double C_LS, double tau, const PlaneFunction& g) {
  if (m.dims != 2) throw InvalidInput("verify_moment_bound: needs the N=2, d=1 grid");
  if (!(C_LS > 0.0)) throw InvalidInput("verify_moment_bound: C_LS must be > 0");
  if (!(tau > 0.0) || !(tau < 1.0 / (4.0 * C_LS))) throw InvalidInput("verify_moment_bound: need 0 < tau < 1/(4 C_LS)");
  const std::size_t n = m.n();
  double lhs = 0.0, grad2 = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Jet a = evaluate(g.first, m.axis[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const Jet b = evaluate(g.second, m.axis[j]);
      const double w = m.weights[i * n + j];
      const double gv = a.f * b.f;
      const double diff = m.axis[i] - m.axis[j];
      lhs += w * diff * diff * gv * gv;
      grad2 += w * (a.df * b.f * a.df * b.f + a.f * b.df * a.f * b.df);
      mass += w * gv * gv;
    }
  }
  const double d = 1.0;
  Check c;
  c.lhs = lhs;
  c.rhs = 2.0 * C_LS / tau * grad2 + d * std::log(1.0 / (1.0 - 4.0 * tau * C_LS)) / (2.0 * tau) * mass;
  c.pass = c.lhs <= c.rhs + 1e-10 * (1.0 + std::abs(c.rhs));
  c.label = "g=" + describe(g.first) + "*" + describe(g.second);
  return c;
}

// Split boundedness condition for N = 2, d = 1 with h(x, v) = phi(x) (psi . v),
// phi(x) = phi1(x1) phi2(x2), psi in R^2 constant:
//   int phi^2 |Hess V psi|^2 dm <= M1 int |grad phi|^2 |psi|^2 dm + M2 int phi^2 |psi|^2 dm.
// The velocity factors integrate out exactly under the standard Gaussian.
inline Check verify_boundedness_condition(const ModelConfig& model, const GridMeasure& m, double M1, double M2,
                                          const PlaneFunction& phi, const std::array<double, 2>& psi) {
  if (model.N != 2 || model.d != 1 || m.dims != 2) throw InvalidInput("verify_boundedness_condition: needs N=2, d=1");
  const std::size_t n = m.n();
  const double psi2 = psi[0] * psi[0] + psi[1] * psi[1];
  double lhs = 0.0, grad2 = 0.0, mass = 0.0;
  std::array<double, 2> x{};
  for (std::size_t i = 0; i < n; ++i) {
    const Jet a = evaluate(phi.first, m.axis[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const Jet b = evaluate(phi.second, m.axis[j]);
      const double w = m.weights[i * n + j];
      x = {m.axis[i], m.axis[j]};
      const HessianBlocks hb = hessian_blocks(model, x);
      const Eigen::Matrix2d H = hb.H_U + hb.H_W;
      const Eigen::Vector2d hp = H * Eigen::Vector2d(psi[0], psi[1]);
      const double p = a.f * b.f;
      lhs += w * p * p * hp.squaredNorm();
      grad2 += w * (a.df * b.f * a.df * b.f + a.f * b.df * a.f * b.df) * psi2;
      mass += w * p * p * psi2;
    }
  }
  Check c;
  c.lhs = lhs;
  c.rhs = M1 * grad2 + M2 * mass;
  c.pass = c.lhs <= c.rhs * (1.0 + 1e-8);
  c.label = "phi=" + describe(phi.first) + "*" + describe(phi.second) + " psi=(" + std::to_string(psi[0]) + "," +
            std::to_string(psi[1]) + ")";
  return c;
}

// ---------------------------------------------------------------------------
// Finite-difference derivative checks.

struct FdEntry {
  std::string family;
  int dim = 1;
  double gradient_rel_err = 0.0;
  double hessian_rel_err = 0.0;
  bool pass = false;
};

struct FdReport {
  std::vector<FdEntry> entries;
  double tolerance = 1e-6;
  bool pass = true;
};

namespace detail {
inline double rel_err(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  return (approx - exact).lpNorm<Eigen::Infinity>() / std::max(1.0, exact.lpNorm<Eigen::Infinity>());
}
}  // namespace detail

inline FdEntry fd_check(const PotentialSpec& s, int points, std::uint64_t seed, double tolerance = 1e-6) {
  validate(s);
  std::mt19937_64 rng(seed);
  const double L = characteristic_length(s);
  std::uniform_real_distribution<double> u(-2.0 * L, 2.0 * L);
  FdEntry e{family_name(s), s.dim, 0.0, 0.0, false};
  std::vector<double> x(static_cast<std::size_t>(s.dim)), xp = x, xm = x;
  for (int p = 0; p < points; ++p) {
    for (double& v : x) v = u(rng);
    const Evaluation ev = eval(s, x);
    Eigen::VectorXd fd_grad(s.dim);
    Eigen::MatrixXd fd_hess(s.dim, s.dim);
    for (int k = 0; k < s.dim; ++k) {
      const double h = 1e-5 * (1.0 + std::abs(x[k]));
      xp = x;
      xm = x;
      xp[k] += h;
      xm[k] -= h;
      fd_grad[k] = (value(s, xp) - value(s, xm)) / (2.0 * h);
      fd_hess.col(k) = (eval(s, xp).gradient - eval(s, xm).gradient) / (2.0 * h);
    }
    e.gradient_rel_err = std::max(e.gradient_rel_err, detail::rel_err(fd_grad, ev.gradient));
    const Eigen::Map<const Eigen::VectorXd> hv(ev.hessian.data(), ev.hessian.size());
    const Eigen::Map<const Eigen::VectorXd> fv(fd_hess.data(), fd_hess.size());
    e.hessian_rel_err = std::max(e.hessian_rel_err, detail::rel_err(fv, hv));
  }
  e.pass = e.gradient_rel_err < tolerance && e.hessian_rel_err < tolerance;
  return e;
}

inline FdReport fd_derivative_suite(const std::vector<PotentialSpec>& specs, int points = 50, std::uint64_t seed = 11,
                                    double tolerance = 1e-6) {
  FdReport r;
  r.tolerance = tolerance;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    r.entries.push_back(fd_check(specs[i], points, seed + i, tolerance));
    r.pass = r.pass && r.entries.back().pass;
  }
  return r;
}

// Force against central differences of the total potential.
inline double fd_force_error(const ModelConfig& m, int configs, std::uint64_t seed) {
  validate(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, characteristic_length(m.U));
  std::vector<double> x(config_size(m));
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    for (double& v : x) v = nd(rng);
    const std::vector<double> f = force(m, x);
    Eigen::VectorXd fd(static_cast<Eigen::Index>(x.size())), an(fd.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double h = 1e-5 * (1.0 + std::abs(x[k]));
      const double x0 = x[k];
      x[k] = x0 + h;
      const double vp = total_potential(m, x);
      x[k] = x0 - h;
      const double vm = total_potential(m, x);
      x[k] = x0;
      fd[static_cast<Eigen::Index>(k)] = -(vp - vm) / (2.0 * h);
      an[static_cast<Eigen::Index>(k)] = f[k];
    }
    worst = std::max(worst, detail::rel_err(fd, an));
  }
  return worst;
}

// Default potentials exercised by the derivative suite.
inline std::vector<PotentialSpec> default_fd_specs() {
  std::vector<PotentialSpec> out;
  for (int d : {1, 2, 3}) {
    out.push_back(make_quadratic(1.5, d));
    out.push_back(make_double_well(0.25, 0.5, d));
    out.push_back(make_gaussian_bump(2.0, 1.0, true, d));
    out.push_back(make_gaussian_bump(0.7, 0.6, false, d));
    out.push_back(make_cosine(0.5, 1.3, d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batteries.

struct Battery {
  std::string name;
  std::vector<Check> checks;
  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline Battery lyapunov_battery(const GridMeasure& m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Battery b{"lyapunov", {}};
  for (int i = 0; i < count; ++i) {
    const TestFunctionSpec S = random_test_function(rng, Purpose::SPositive);
    const TestFunctionSpec g = random_test_function(rng, Purpose::GGeneric);
    b.checks.push_back(verify_lyapunov_lemma(m, S, g));
  }
  return b;
}

inline Battery moment_battery(const GridMeasure& m, double C_LS, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Battery b{"moment_bound", {}};
  const double tau = 1.0 / (8.0 * C_LS);
  for (int i = 0; i < count; ++i) {
    const PlaneFunction g{random_test_function(rng, Purpose::GGeneric), random_test_function(rng, Purpose::GGeneric)};
    b.checks.push_back(verify_moment_bound(m, C_LS, tau, g));
  }
  return b;
}

inline Battery boundedness_battery(const ModelConfig& model, const GridMeasure& m, double M1, double M2, int count,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Battery b{"boundedness_condition", {}};
  for (int i = 0; i < count; ++i) {
    const PlaneFunction phi{random_test_function(rng, Purpose::GGeneric),
                            random_test_function(rng, Purpose::GGeneric)};
    const std::array<double, 2> psi{nd(rng), nd(rng)};
    b.checks.push_back(verify_boundedness_condition(model, m, M1, M2, phi, psi));
  }
  return b;
}

}  // namespace mfhypo::oracle
