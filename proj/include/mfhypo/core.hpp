#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfhypo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Where a constant came from. Everything except NumericEstimate may enter a
// certificate; CriterionDerived is additionally reported as non-literal.
enum class Provenance {
  Analytic,
  NumericVerified,
  NumericEstimate,
  UserSupplied,
  CriterionDerived,
};

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::NumericVerified: return "numeric-verified";
    case Provenance::NumericEstimate: return "numeric-estimate";
    case Provenance::UserSupplied: return "user-supplied";
    case Provenance::CriterionDerived: return "criterion-derived";
  }
  return "unknown";
}

inline bool is_certifying(Provenance p) { return p != Provenance::NumericEstimate; }

// The weaker of two provenances (estimate dominates everything).
inline Provenance weaker(Provenance a, Provenance b) {
  auto rank = [](Provenance p) {
    switch (p) {
      case Provenance::Analytic: return 0;
      case Provenance::UserSupplied: return 1;
      case Provenance::NumericVerified: return 2;
      case Provenance::CriterionDerived: return 3;
      case Provenance::NumericEstimate: return 4;
    }
    return 4;
  };
  return rank(a) >= rank(b) ? a : b;
}

struct Constant {
  double value = 0.0;
  Provenance provenance = Provenance::Analytic;

  bool finite() const { return std::isfinite(value); }
};

// Thrown when an input is rejected before any computation happens.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a size or step cap would be exceeded.
class ResourceCap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InvalidInput(std::string(what) + ": non-finite coordinate");
    }
  }
}

inline double positive_part(double r) { return r > 0.0 ? r : 0.0; }
inline double negative_part(double r) { return r < 0.0 ? -r : 0.0; }

// ---------------------------------------------------------------------------
// Counter-based random numbers. A stream value is a pure function of its key,
// so results never depend on scheduling or on how work is split.

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (splitmix64(v) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
}

// Uniform on (0, 1), never exactly 0.
inline double uniform_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

struct StreamKey {
  std::uint64_t seed;
  std::uint64_t replica;
  std::uint64_t particle;
  std::uint64_t component;
  std::uint64_t step;
};

// Hash of the step-independent part of a key.
inline std::uint64_t stream_prefix(std::uint64_t seed, std::uint64_t replica, std::uint64_t particle,
                                   std::uint64_t component) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, replica);
  h = hash_combine(h, particle);
  return hash_combine(h, component);
}

inline double counter_normal(std::uint64_t prefix, std::uint64_t step) {
  const std::uint64_t h = hash_combine(prefix, step);
  const double u1 = uniform_open(h);
  const double u2 = uniform_open(splitmix64(h ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double counter_normal(const StreamKey& k) {
  return counter_normal(stream_prefix(k.seed, k.replica, k.particle, k.component), k.step);
}

// ---------------------------------------------------------------------------
// Small numerical helpers shared by several modules.

namespace numeric {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGLNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGLWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <typename F>
double gauss_legendre(F&& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGLNodes.size(); ++i) {
    acc += kGLWeights[i] * f(mid + half * kGLNodes[i]);
  }
  return acc * half;
}

struct Extremum {
  double arg = 0.0;
  double value = -kInf;
};

// Golden-section maximisation of a unimodal function on [lo, hi].
template <typename F>
Extremum golden_max(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  Extremum best{x1, f1};
  if (f2 > best.value) best = {x2, f2};
  for (double end : {lo, hi}) {
    const double fe = f(end);
    if (fe > best.value) best = {end, fe};
  }
  return best;
}

// Grid scan followed by golden refinement around the best grid point.
template <typename F>
Extremum scan_max(F&& f, std::span<const double> grid) {
  Extremum best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best.value) {
      best = {grid[i], v};
      best_i = i;
    }
  }
  if (grid.size() >= 3) {
    const double lo = grid[best_i == 0 ? 0 : best_i - 1];
    const double hi = grid[std::min(best_i + 1, grid.size() - 1)];
    const Extremum refined = golden_max(f, lo, hi);
    if (refined.value > best.value) best = refined;
  }
  return best;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out = linspace(std::log(lo), std::log(hi), n);
  for (double& v : out) v = std::exp(v);
  return out;
}

struct SimplexResult {
  std::vector<double> arg;
  double value = -kInf;
  bool converged = false;
  int iterations = 0;
};

// Nelder-Mead maximisation.
inline SimplexResult nelder_mead_max(const std::function<double(std::span<const double>)>& f,
                                     std::vector<double> start, std::vector<double> scale,
                                     double ftol = 1e-13, int max_iter = 2000) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += scale[i];
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  SimplexResult res;
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    const double best = vals[order.front()], worst = vals[order.back()];
    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      spread = std::max(spread, std::abs(pts[order.front()][k] - pts[order.back()][k]));
    }
    if (std::abs(best - worst) <= ftol * (1.0 + std::abs(best)) && spread < 1e-9) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (pts[order.back()][k] - centroid[k]);
      return p;
    };
    auto xr = along(-1.0);
    const double fr = f(xr);
    const std::size_t w = order.back();
    if (fr > vals[order.front()]) {
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe > fr) {
        pts[w] = xe;
        vals[w] = fe;
      } else {
        pts[w] = xr;
        vals[w] = fr;
      }
    } else if (fr > vals[order[n - 1]]) {
      pts[w] = xr;
      vals[w] = fr;
    } else {
      auto xc = along(0.5);
      const double fc = f(xc);
      if (fc > vals[w]) {
        pts[w] = xc;
        vals[w] = fc;
      } else {
        const auto& top = pts[order.front()];
        for (std::size_t i = 1; i <= n; ++i) {
          auto& p = pts[order[i]];
          for (std::size_t k = 0; k < n; ++k) p[k] = top[k] + 0.5 * (p[k] - top[k]);
          vals[order[i]] = f(p);
        }
      }
    }
  }
  const auto top = std::max_element(vals.begin(), vals.end()) - vals.begin();
  res.arg = pts[static_cast<std::size_t>(top)];
  res.value = vals[static_cast<std::size_t>(top)];
  return res;
}

}  // namespace numeric
}  // namespace mfhypo
