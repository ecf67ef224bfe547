#pragma once

// Scalar constants of the weighted second-moment bound
//   int |Hess U(x_i)|_op^2 g^2 dm <= C1 int |grad g|^2 dm + C2 int g^2 dm
// and the boundedness constants derived from them. Shared by the Lyapunov
// pair selection (potentials) and the certifier.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfhypo/core.hpp"

namespace mfhypo::bounds {

struct MomentConstants {
  double C1 = 0.0;
  double C2 = 0.0;
};

// Bounded-gradient interaction (|grad W| <= K').
inline MomentConstants moment_constants_bounded_gradient(double K_prime, double K1, double K2, int d) {
  if (!std::isfinite(K_prime)) {
    throw InvalidInput("bounded-gradient constants need a finite K'; use the log-Sobolev route");
  }
  const double dd = static_cast<double>(d);
  MomentConstants out;
  out.C1 = 50.0 * K1 * K1;
  out.C2 = 4.0 * K2 * K2 + 25.0 * std::pow(K1, 4) * dd * dd / 4.0 +
           25.0 * K_prime * K_prime * K1 * K1 / 2.0;
  return out;
}

// Log-Sobolev route (C_LS of the mean-field measure, |Hess W|_op <= K).
inline MomentConstants moment_constants_log_sobolev(double K, double K1, double K2, double C_LS, int d) {
  const double dd = static_cast<double>(d);
  MomentConstants out;
  out.C1 = 50.0 * K1 * K1 * (1.0 + 4.0 * K * K * C_LS * C_LS);
  out.C2 = 4.0 * K2 * K2 + 25.0 * std::pow(K1, 4) * dd * dd / 4.0 +
           50.0 * std::numbers::ln2 * dd * K * K * K1 * K1 * C_LS;
  return out;
}

struct Boundedness {
  double M = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
};

inline Boundedness boundedness(const MomentConstants& c, double K) {
  Boundedness b;
  b.M1 = 2.0 * c.C1;
  b.M2 = 2.0 * c.C2 + 2.0 * K * K;
  b.M = std::max(b.M1, b.M2);
  return b;
}

}  // namespace mfhypo::bounds
