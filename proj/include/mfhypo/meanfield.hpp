#pragma once

// The N-particle mean-field potential
//   V(x) = sum_i U(x_i) + 1/(2N) sum_{i,j} W(x_i - x_j)
// with its force and block Hessian. Configurations are flat arrays of N
// row-major particle blocks of length d.

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mfhypo/core.hpp"
#include "mfhypo/potentials.hpp"

namespace mfhypo {

struct ModelConfig {
  int N = 2;
  int d = 1;
  PotentialSpec U;
  PotentialSpec W;
};

inline void validate(const ModelConfig& m) {
  if (m.N < 2) throw InvalidInput("model: N must be >= 2");
  if (m.d < 1) throw InvalidInput("model: d must be >= 1");
  if (m.U.dim != m.d || m.W.dim != m.d) throw InvalidInput("model: U and W dims must equal d");
  validate(m.U);
  validate(m.W);
}

inline std::size_t config_size(const ModelConfig& m) { return static_cast<std::size_t>(m.N) * m.d; }

inline void check_config(const ModelConfig& m, std::span<const double> x) {
  if (x.size() != config_size(m)) throw InvalidInput("configuration size must be N*d");
  require_finite(x, "configuration");
}

inline double total_potential(const ModelConfig& m, std::span<const double> x) {
  check_config(m, x);
  const auto d = static_cast<std::size_t>(m.d);
  std::vector<double> diff(d);
  double confinement = 0.0, interaction = 0.0;
  for (int i = 0; i < m.N; ++i) {
    confinement += value(m.U, x.subspan(i * d, d));
    for (int j = 0; j < m.N; ++j) {
      for (std::size_t k = 0; k < d; ++k) diff[k] = x[i * d + k] - x[j * d + k];
      interaction += value(m.W, diff);
    }
  }
  return confinement + interaction / (2.0 * m.N);
}

// -grad V. Pairs are visited in the order given by `order` (a permutation of
// particle slots), and each pair gradient is computed once and applied with
// opposite signs, so per-particle accumulation order depends only on `order`.
inline void force_into(const ModelConfig& m, std::span<const double> x, std::span<double> out,
                       std::span<const int> order) {
  const auto d = static_cast<std::size_t>(m.d);
  const auto n = static_cast<std::size_t>(m.N);
  std::fill(out.begin(), out.end(), 0.0);
  constexpr std::size_t kStack = 16;
  double diff_buf[kStack], g_buf[kStack];
  std::vector<double> diff_heap, g_heap;
  double* diff = diff_buf;
  double* g = g_buf;
  if (d > kStack) {
    diff_heap.resize(d);
    g_heap.resize(d);
    diff = diff_heap.data();
    g = g_heap.data();
  }
  const bool interacting = !is_zero(m.W);
  if (interacting) {
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t i = static_cast<std::size_t>(order[a]);
      for (std::size_t b = a + 1; b < n; ++b) {
        const std::size_t j = static_cast<std::size_t>(order[b]);
        for (std::size_t k = 0; k < d; ++k) diff[k] = x[i * d + k] - x[j * d + k];
        gradient_into(m.W, diff, g);
        for (std::size_t k = 0; k < d; ++k) {
          out[i * d + k] += g[k];
          out[j * d + k] -= g[k];
        }
      }
    }
    const double scale = -1.0 / static_cast<double>(m.N);
    for (double& v : out) v *= scale;
  }
  for (std::size_t i = 0; i < n; ++i) {
    gradient_into(m.U, &x[i * d], g);
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] -= g[k];
  }
}

inline std::vector<double> force(const ModelConfig& m, std::span<const double> x) {
  check_config(m, x);
  std::vector<int> order(static_cast<std::size_t>(m.N));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> out(x.size());
  force_into(m, x, out, order);
  return out;
}

inline constexpr int kDenseCap = 4096;

struct HessianBlocks {
  Eigen::MatrixXd H_U;
  Eigen::MatrixXd H_W;
};

inline HessianBlocks hessian_blocks(const ModelConfig& m, std::span<const double> x) {
  check_config(m, x);
  const int n = m.N * m.d;
  if (n > kDenseCap) throw ResourceCap("hessian_blocks: N*d exceeds dense cap; use hw_opnorm");
  const auto d = static_cast<std::size_t>(m.d);
  HessianBlocks hb{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  std::vector<double> diff(d);
  for (int i = 0; i < m.N; ++i) {
    hb.H_U.block(i * m.d, i * m.d, m.d, m.d) = eval(m.U, x.subspan(i * d, d)).hessian;
    for (int j = 0; j < m.N; ++j) {
      if (i == j) continue;
      for (std::size_t k = 0; k < d; ++k) diff[k] = x[i * d + k] - x[j * d + k];
      const Eigen::MatrixXd hw = eval(m.W, diff).hessian / static_cast<double>(m.N);
      hb.H_W.block(i * m.d, j * m.d, m.d, m.d) = -hw;
      hb.H_W.block(i * m.d, i * m.d, m.d, m.d) += hw;
    }
  }
  return hb;
}

// y = H_W z without forming H_W.
inline void hw_apply(const ModelConfig& m, std::span<const double> x, std::span<const double> z,
                     std::span<double> y) {
  const auto d = static_cast<std::size_t>(m.d);
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> diff(d), dz(d);
  for (int i = 0; i < m.N; ++i) {
    for (int j = i + 1; j < m.N; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        diff[k] = x[i * d + k] - x[j * d + k];
        dz[k] = z[i * d + k] - z[j * d + k];
      }
      const Eigen::MatrixXd h = eval(m.W, diff).hessian / static_cast<double>(m.N);
      const Eigen::VectorXd hz = h * Eigen::Map<const Eigen::VectorXd>(dz.data(), m.d);
      for (std::size_t k = 0; k < d; ++k) {
        y[i * d + k] += hz[static_cast<Eigen::Index>(k)];
        y[j * d + k] -= hz[static_cast<Eigen::Index>(k)];
      }
    }
  }
}

struct OpNorm {
  double value = 0.0;
  bool exact = true;  // false: flagged power-iteration estimate
};

struct OpNormOptions {
  bool force_matrix_free = false;
  int dense_below = 256;
  int max_iter = 5000;
  double rtol = 1e-8;
};

inline OpNorm hw_opnorm(const ModelConfig& m, std::span<const double> x, const OpNormOptions& opt = {}) {
  check_config(m, x);
  if (is_zero(m.W)) return {0.0, true};
  const int n = m.N * m.d;
  auto dense = [&] {
    const Eigen::MatrixXd h = hessian_blocks(m, x).H_W;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues();
    return OpNorm{std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())), true};
  };
  if (!opt.force_matrix_free && n <= opt.dense_below) return dense();

  // Power iteration on H_W^2 (its top eigenvalue is |H_W|_op^2).
  std::vector<double> z(static_cast<std::size_t>(n)), y(z.size()), w(z.size());
  std::mt19937_64 rng(0x0b5e55ed);
  std::normal_distribution<double> nd;
  for (double& v : z) v = nd(rng);
  double prev = 0.0, est = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    double nz = 0.0;
    for (double v : z) nz += v * v;
    nz = std::sqrt(nz);
    if (nz == 0.0) return {0.0, true};
    for (double& v : z) v /= nz;
    hw_apply(m, x, z, y);
    hw_apply(m, x, y, w);
    double rq = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) rq += z[k] * w[k];
    est = std::sqrt(std::max(rq, 0.0));
    if (it > 2 && std::abs(est - prev) <= opt.rtol * 1e-2 * std::max(est, 1e-300)) return {est, true};
    prev = est;
    z.swap(w);
  }
  if (n <= kDenseCap) return dense();
  return {est, false};
}

// Smallest eigenvalue of (1/N)(-1{i != j} Hess W(x_i - x_j)).
inline double upiw_min_eig(const ModelConfig& m, std::span<const double> x) {
  const HessianBlocks hb = hessian_blocks(m, x);
  Eigen::MatrixXd a = -hb.H_W;
  for (int i = 0; i < m.N; ++i) a.block(i * m.d, i * m.d, m.d, m.d).setZero();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Sampled estimate of the UPIW constant h (an upper bound on the true
// infimum; never certifying). Positions are drawn i.i.d. N(0, s^2) with s the
// interaction length scale, plus the all-coincident configuration.
inline Constant upiw_h_estimate(const ModelConfig& m, int n_samples, std::uint64_t seed = 7) {
  validate(m);
  if (n_samples < 1) throw InvalidInput("upiw_h_estimate: n_samples must be >= 1");
  if (is_zero(m.W)) return {0.0, Provenance::NumericEstimate};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 2.0 * characteristic_length(m.W));
  std::vector<double> x(config_size(m), 0.0);
  double h = upiw_min_eig(m, x);
  for (int s = 1; s < n_samples; ++s) {
    for (double& v : x) v = nd(rng);
    h = std::min(h, upiw_min_eig(m, x));
  }
  return {h, Provenance::NumericEstimate};
}

}  // namespace mfhypo
