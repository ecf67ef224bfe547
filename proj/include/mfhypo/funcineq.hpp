#pragma once

// Poincare and log-Sobolev constants of the mean-field measure m, and a grid
// spectral-gap oracle for desk-scale checks.
//
// Log-Sobolev normalisation used throughout: Ent_m(g^2) <= 2 C_LS int |grad g|^2 dm,
// i.e. C_LS = 1 / rho_LS.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "mfhypo/core.hpp"
#include "mfhypo/meanfield.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo {

inline double rho_from_c_ls(double c_ls) { return 1.0 / c_ls; }
inline double c_ls_from_rho(double rho) { return 1.0 / rho; }

struct CurvatureConstants {
  Constant kappa;
  Constant C_LS;
};

// kappa = kappa1 - kappa2^- from uniform Hessian bounds; absent unless > 0.
inline std::optional<CurvatureConstants> kappa_bakry_emery(const PotentialSpec& U, const PotentialSpec& W) {
  const double kappa1 = hessian_min_eig_inf(U);
  const double kappa2 = hessian_min_eig_inf(W);
  const double kappa = kappa1 - negative_part(kappa2);
  if (!(kappa1 > 0.0) || !(kappa > 0.0)) return std::nullopt;
  return CurvatureConstants{{kappa, Provenance::Analytic}, {1.0 / kappa, Provenance::Analytic}};
}

// kappa = h + 1/cLip, valid when h > -1/cLip.
inline std::optional<Constant> kappa_thm1(const Constant& h, const Constant& cLip) {
  if (!cLip.finite() || !(cLip.value > 0.0)) return std::nullopt;
  const double kappa = h.value + 1.0 / cLip.value;
  if (!(kappa > 0.0)) return std::nullopt;
  return Constant{kappa, weaker(h.provenance, cLip.provenance)};
}

// Certified lower bound h >= -K for the UPIW matrix (row-block Gershgorin).
inline Constant upiw_h_lower_bound(double K) { return {-K, Provenance::Analytic}; }

inline double upi_slack(const ConvexityAtInfinity& t, double K) {
  return (t.cU - K) * std::exp(-t.c * t.R / 4.0) - 2.0 * K;
}

// Reports the criterion slack as kappa, flagged criterion-derived.
inline std::optional<Constant> upi_criterion(const ConvexityAtInfinity& t, double K) {
  const double s = upi_slack(t, K);
  if (!(s > 0.0)) return std::nullopt;
  return Constant{s, Provenance::CriterionDerived};
}

// C_LS = 1 / (rho_marginal (1 - cLip K)^2) when cLip K < 1.
inline std::optional<Constant> lsi_thm2(const Constant& rho_marginal, const Constant& cLip, double K) {
  if (!(rho_marginal.value > 0.0)) throw InvalidInput("lsi_thm2: rho_marginal must be > 0");
  if (!cLip.finite()) return std::nullopt;
  const double gamma0 = cLip.value * K;
  if (!(gamma0 < 1.0)) return std::nullopt;
  const double rho = rho_marginal.value * (1.0 - gamma0) * (1.0 - gamma0);
  return Constant{c_ls_from_rho(rho), weaker(rho_marginal.provenance, cLip.provenance)};
}

// Lipschitz bound e^{cR/4} / (cU - K) used in place of cLip under the
// super-convexity criterion.
inline std::optional<Constant> ulsi_lipschitz_bound(const ConvexityAtInfinity& t, double K) {
  if (!(t.cU > K)) return std::nullopt;
  return Constant{std::exp(t.c * t.R / 4.0) / (t.cU - K), Provenance::CriterionDerived};
}

inline bool ulsi_criterion(const ConvexityAtInfinity& t, double K) {
  const auto bound = ulsi_lipschitz_bound(t, K);
  return bound && bound->value * K < 1.0;
}

// ---------------------------------------------------------------------------
// Gibbs measure e^{-V} on a uniform 1D or tensor 2D grid.

struct GridMeasure {
  int dims = 1;
  std::vector<double> axis;
  double dx = 0.0;
  std::vector<double> potential;  // V at nodes, row-major for dims == 2
  std::vector<double> weights;    // normalised Gibbs probabilities (sum to 1)
  double log_Z = 0.0;             // log of int e^{-V}
  double box = 0.0;

  std::size_t n() const { return axis.size(); }
  std::size_t size() const { return potential.size(); }
};

// Relative mass density at the box edge must fall below 1e-12.
inline constexpr double kTailLogRatio = 27.631021115928547;  // ln 1e12

inline double edge_gap(const std::function<double(std::span<const double>)>& V, int dims, double box) {
  double vmin = kInf, edge = kInf;
  const auto grid = numeric::linspace(-box, box, 201);
  if (dims == 1) {
    for (double x : grid) vmin = std::min(vmin, V(std::span(&x, 1)));
    for (double x : {-box, box}) edge = std::min(edge, V(std::span(&x, 1)));
  } else {
    std::array<double, 2> p{};
    for (double a : grid) {
      for (double b : grid) {
        p = {a, b};
        vmin = std::min(vmin, V(p));
        if (std::abs(a) == box || std::abs(b) == box) edge = std::min(edge, V(p));
      }
    }
  }
  return edge - vmin;
}

inline double auto_box(const std::function<double(std::span<const double>)>& V, int dims) {
  double box = 1.0;
  while (edge_gap(V, dims, box) < kTailLogRatio + 2.0) {
    box *= 1.25;
    if (box > 1e4) throw InvalidInput("auto_box: potential does not confine within |x| <= 1e4");
  }
  return box;
}

inline GridMeasure make_grid_measure(const std::function<double(std::span<const double>)>& V, int dims,
                                     double box, std::size_t n) {
  if (dims != 1 && dims != 2) throw InvalidInput("grid measure: total dimension must be 1 or 2");
  if (n < 5) throw InvalidInput("grid measure: need at least 5 nodes per axis");
  const double gap = edge_gap(V, dims, box);
  if (gap < kTailLogRatio) {
    std::ostringstream msg;
    msg << "grid measure: box " << box << " leaves tail mass above 1e-12; need box >= " << auto_box(V, dims);
    throw InvalidInput(msg.str());
  }
  GridMeasure g;
  g.dims = dims;
  g.box = box;
  g.axis = numeric::linspace(-box, box, n);
  g.dx = g.axis[1] - g.axis[0];
  if (dims == 1) {
    for (double x : g.axis) g.potential.push_back(V(std::span(&x, 1)));
  } else {
    std::array<double, 2> p{};
    for (double a : g.axis) {
      for (double b : g.axis) {
        p = {a, b};
        g.potential.push_back(V(p));
      }
    }
  }
  const double vmin = *std::min_element(g.potential.begin(), g.potential.end());
  const double cell = std::pow(g.dx, dims);
  double z = 0.0;
  g.weights.resize(g.potential.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.weights[i] = std::exp(-(g.potential[i] - vmin)) * cell;
    z += g.weights[i];
  }
  for (double& w : g.weights) w /= z;
  g.log_Z = std::log(z) - vmin;
  return g;
}

// Single-particle measure e^{-U}, d = 1.
inline GridMeasure make_grid_measure(const PotentialSpec& U, std::size_t n, std::optional<double> box = {}) {
  if (U.dim != 1) throw InvalidInput("grid measure: single-particle grid needs d = 1");
  auto V = [&U](std::span<const double> x) { return value(U, x); };
  return make_grid_measure(V, 1, box.value_or(auto_box(V, 1)), n);
}

// Mean-field measure of a model with N * d <= 2.
inline GridMeasure make_grid_measure(const ModelConfig& m, std::size_t n, std::optional<double> box = {}) {
  validate(m);
  if (m.N * m.d > 2) throw InvalidInput("grid measure: N*d must be <= 2");
  auto V = [&m](std::span<const double> x) { return total_potential(m, x); };
  return make_grid_measure(V, 2, box.value_or(auto_box(V, 2)), n);
}

// Jump rate from node a to neighbour b of the detailed-balance generator
// discretising Delta - grad V . grad.
inline double neighbour_rate(const GridMeasure& g, std::size_t a, std::size_t b) {
  return std::exp(-(g.potential[b] - g.potential[a]) / 2.0) / (g.dx * g.dx);
}

template <typename F>
void for_each_edge(const GridMeasure& g, F&& f) {
  const std::size_t n = g.n();
  if (g.dims == 1) {
    for (std::size_t i = 0; i + 1 < n; ++i) f(i, i + 1);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = i * n + j;
      if (j + 1 < n) f(a, a + 1);
      if (i + 1 < n) f(a, a + n);
    }
  }
}

// (Q f)_a = sum_b rate(a,b) (f_b - f_a): the discrete generator.
inline std::vector<double> apply_generator(const GridMeasure& g, std::span<const double> f) {
  std::vector<double> out(g.size(), 0.0);
  for_each_edge(g, [&](std::size_t a, std::size_t b) {
    out[a] += neighbour_rate(g, a, b) * (f[b] - f[a]);
    out[b] += neighbour_rate(g, b, a) * (f[a] - f[b]);
  });
  return out;
}

// Discrete Dirichlet form 1/2 sum pi_a Q_ab (f_b - f_a)^2 (approximates int |grad f|^2 dm).
inline double dirichlet_form(const GridMeasure& g, std::span<const double> f) {
  double acc = 0.0;
  for_each_edge(g, [&](std::size_t a, std::size_t b) {
    const double df = f[b] - f[a];
    acc += g.weights[a] * neighbour_rate(g, a, b) * df * df;
  });
  return acc;
}

inline double integrate(const GridMeasure& g, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * f[i];
  return acc;
}

struct SpectralGap {
  double gap = 0.0;         // at the requested resolution
  double gap_coarse = 0.0;  // at twice the spacing
  double richardson = 0.0;  // second-order extrapolation
  double box = 0.0;
  double dx = 0.0;
  std::size_t nodes = 0;
};

namespace detail {

inline double gap_1d(const GridMeasure& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::VectorXd diag(n), sub(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double out = 0.0;
    const auto a = static_cast<std::size_t>(i);
    if (i > 0) out += neighbour_rate(g, a, a - 1);
    if (i + 1 < n) out += neighbour_rate(g, a, a + 1);
    diag[i] = out;
  }
  sub.setConstant(-1.0 / (g.dx * g.dx));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[1];
}

// Smallest nonzero eigenvalue of the symmetrised (-Q) by deflated inverse
// iteration; the null vector is sqrt(pi).
inline double gap_2d(const GridMeasure& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(g.size(), 0.0);
  const double off = -1.0 / (g.dx * g.dx);
  for_each_edge(g, [&](std::size_t a, std::size_t b) {
    diag[a] += neighbour_rate(g, a, b);
    diag[b] += neighbour_rate(g, b, a);
    trip.emplace_back(static_cast<int>(a), static_cast<int>(b), off);
    trip.emplace_back(static_cast<int>(b), static_cast<int>(a), off);
  });
  const double shift = 1e-6;
  for (std::size_t a = 0; a < g.size(); ++a) trip.emplace_back(static_cast<int>(a), static_cast<int>(a), diag[a] + shift);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral gap: factorisation failed");

  Eigen::VectorXd null(n);
  for (Eigen::Index i = 0; i < n; ++i) null[i] = std::sqrt(g.weights[static_cast<std::size_t>(i)]);
  null.normalize();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = nd(rng);
  double lambda = 0.0, prev = -1.0;
  for (int it = 0; it < 500; ++it) {
    z -= null.dot(z) * null;
    z.normalize();
    Eigen::VectorXd y = solver.solve(z);
    y -= null.dot(y) * null;
    lambda = z.dot(A * z) - shift;
    if (std::abs(lambda - prev) < 1e-13 * std::abs(lambda)) break;
    prev = lambda;
    z = y;
  }
  return lambda;
}

}  // namespace detail

inline double grid_gap(const GridMeasure& g) { return g.dims == 1 ? detail::gap_1d(g) : detail::gap_2d(g); }

// Gap of e^{-V} on [-box, box]^dims with n nodes per axis, plus the n/2
// resolution and a Richardson estimate.
inline SpectralGap spectral_gap_oracle(const std::function<double(std::span<const double>)>& V, int dims,
                                       std::size_t n, std::optional<double> box = {}) {
  const double b = box.value_or(auto_box(V, dims));
  const std::size_t n_fine = n % 2 == 1 ? n : n + 1;
  const GridMeasure fine = make_grid_measure(V, dims, b, n_fine);
  const GridMeasure coarse = make_grid_measure(V, dims, b, (n_fine + 1) / 2);
  SpectralGap out;
  out.gap = grid_gap(fine);
  out.gap_coarse = grid_gap(coarse);
  out.richardson = out.gap + (out.gap - out.gap_coarse) / 3.0;
  out.box = b;
  out.dx = fine.dx;
  out.nodes = fine.n();
  return out;
}

inline SpectralGap spectral_gap_oracle(const PotentialSpec& U, std::size_t n = 1601) {
  if (U.dim != 1) throw InvalidInput("spectral gap: single-particle oracle needs d = 1");
  return spectral_gap_oracle([&U](std::span<const double> x) { return value(U, x); }, 1, n);
}

inline SpectralGap spectral_gap_oracle(const ModelConfig& m, std::size_t n = 121) {
  validate(m);
  if (m.N * m.d > 2) throw InvalidInput("spectral gap: N*d must be <= 2");
  return spectral_gap_oracle([&m](std::span<const double> x) { return total_potential(m, x); }, 2, n);
}

}  // namespace mfhypo
