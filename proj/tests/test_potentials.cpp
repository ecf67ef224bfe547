#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "mfhypo/oracle.hpp"
#include "mfhypo/potentials.hpp"

using namespace mfhypo;

namespace {

std::vector<PotentialSpec> every_family() {
  std::vector<PotentialSpec> out;
  for (int d : {1, 2, 3}) {
    out.push_back(make_quadratic(0.7, d));
    out.push_back(make_double_well(0.25, 0.5, d));
    out.push_back(make_gaussian_bump(1.3, 0.8, true, d));
    out.push_back(make_gaussian_bump(0.4, 1.5, false, d));
    out.push_back(make_cosine(0.6, 2.0, d));
  }
  return out;
}

std::vector<double> random_point(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (double& v : x) v = u(rng);
  return x;
}

double opnorm(const Eigen::MatrixXd& h) {
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
  return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

}  // namespace

TEST(Eval, QuadraticAtMinimum) {
  const std::vector<double> x{0.0, 0.0};
  const Evaluation e = eval(make_quadratic(1.0, 2), x);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.gradient.norm(), 0.0);
  EXPECT_TRUE(e.hessian.isApprox(Eigen::Matrix2d::Identity()));
}

TEST(Eval, AttractiveBumpAtOrigin) {
  const std::vector<double> x{0.0};
  const Evaluation e = eval(make_gaussian_bump(1.0, 1.0, true), x);
  EXPECT_DOUBLE_EQ(e.value, -1.0);
  EXPECT_DOUBLE_EQ(e.gradient[0], 0.0);
  EXPECT_DOUBLE_EQ(e.hessian(0, 0), 1.0);
}

TEST(Eval, DoubleWellAtUnit) {
  const std::vector<double> x{1.0};
  const Evaluation e = eval(make_double_well(0.25, 0.5), x);
  EXPECT_DOUBLE_EQ(e.value, -0.25);
  EXPECT_DOUBLE_EQ(e.gradient[0], 0.0);
  EXPECT_DOUBLE_EQ(e.hessian(0, 0), 2.0);
}

TEST(Eval, RejectsNonFiniteAndWrongDimension) {
  const auto U = make_quadratic(1.0, 2);
  const std::vector<double> nan_point{1.0, NAN};
  EXPECT_THROW(eval(U, nan_point), InvalidInput);
  const std::vector<double> short_point{1.0};
  EXPECT_THROW(eval(U, short_point), InvalidInput);
}

TEST(Eval, HessianSymmetric) {
  std::mt19937_64 rng(3);
  for (const auto& s : every_family()) {
    const auto x = random_point(rng, s.dim, 2.0);
    const Evaluation e = eval(s, x);
    EXPECT_LT((e.hessian - e.hessian.transpose()).cwiseAbs().maxCoeff(), 1e-15) << family_name(s);
  }
}

TEST(Validate, RejectsBadParameters) {
  EXPECT_THROW(validate(make_quadratic(-1.0)), InvalidInput);
  EXPECT_THROW(validate(make_gaussian_bump(1.0, 0.0, true)), InvalidInput);
  EXPECT_THROW(validate(make_double_well(0.0, 0.5)), InvalidInput);
  EXPECT_THROW(validate(make_cosine(1.0, 1.0, 1, Role::Confinement)), InvalidInput);
  EXPECT_THROW(validate(make_quadratic(0.0, 1, Role::Confinement)), InvalidInput);
  EXPECT_NO_THROW(validate(make_zero_interaction(2)));
}

TEST(Derivatives, FiniteDifferencesOnThousandPoints) {
  std::uint64_t seed = 100;
  for (const auto& s : every_family()) {
    const oracle::FdEntry e = oracle::fd_check(s, 1000, seed++);
    EXPECT_TRUE(e.pass) << family_name(s) << " d=" << s.dim << " grad " << e.gradient_rel_err << " hess "
                        << e.hessian_rel_err;
  }
}

TEST(Derivatives, InteractionsAreEven) {
  std::mt19937_64 rng(5);
  for (const auto& s : every_family()) {
    for (int k = 0; k < 200; ++k) {
      auto x = random_point(rng, s.dim, 3.0);
      std::vector<double> mx(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) mx[i] = -x[i];
      EXPECT_LT(std::abs(value(s, x) - value(s, mx)), 1e-12);
    }
  }
}

TEST(Constants, GaussianBumpInteraction) {
  for (double A : {0.1, 0.5, 2.0}) {
    const ConstantsBundle b = extract_constants(make_quadratic(1.0), make_gaussian_bump(A, 1.0, true));
    EXPECT_NEAR(b.K.value, A, 1e-15);
    EXPECT_NEAR(b.K_prime.value, A * std::exp(-0.5), 1e-15);
  }
}

TEST(Constants, QuadraticInteractionHasUnboundedGradient) {
  const ConstantsBundle b = extract_constants(make_quadratic(1.0), make_quadratic(0.3, 1, Role::Interaction));
  EXPECT_DOUBLE_EQ(b.K.value, 0.3);
  EXPECT_TRUE(std::isinf(b.K_prime.value));
}

TEST(Constants, QuadraticConfinementLyapunovPair) {
  for (double k : {0.5, 1.0, 3.0}) {
    const ConstantsBundle b = extract_constants(make_quadratic(k), make_zero_interaction());
    EXPECT_EQ(b.K1.value, 0.0);
    EXPECT_DOUBLE_EQ(b.K2.value, k);
    EXPECT_EQ(b.K1.provenance, Provenance::Analytic);
  }
}

TEST(Constants, RejectsMismatchedInputs) {
  EXPECT_THROW(extract_constants(make_quadratic(1.0, 2), make_zero_interaction(1)), InvalidInput);
  EXPECT_THROW(extract_constants(make_gaussian_bump(1.0, 1.0, true), make_zero_interaction()), InvalidInput);
}

TEST(Constants, BoundsHoldOnRandomPoints) {
  std::mt19937_64 rng(17);
  for (int d : {1, 2, 3}) {
    for (const auto& W : {make_gaussian_bump(0.8, 1.2, true, d), make_gaussian_bump(0.3, 0.7, false, d),
                          make_cosine(0.5, 1.5, d)}) {
      const ConstantsBundle b = extract_constants(make_double_well(0.25, 0.5, d), W);
      for (int k = 0; k < 1000; ++k) {
        const auto y = random_point(rng, d, 4.0 * characteristic_length(W));
        const Evaluation e = eval(W, y);
        EXPECT_LE(opnorm(e.hessian), b.K.value + 1e-9);
        EXPECT_LE(e.gradient.norm(), b.K_prime.value + 1e-9);
      }
    }
    const auto U = make_double_well(0.25, 0.5, d);
    const ConstantsBundle b = extract_constants(U, make_gaussian_bump(0.5, 1.0, true, d));
    for (int k = 0; k < 1000; ++k) {
      const auto x = random_point(rng, d, 6.0);
      const Evaluation e = eval(U, x);
      EXPECT_LE(opnorm(e.hessian), b.K1.value * e.gradient.norm() + b.K2.value + 1e-9);
    }
  }
}

TEST(Dissipativity, QuadraticConfinementIsExact) {
  for (double k : {0.5, 2.0}) {
    for (double r : {0.1, 1.0, 7.0}) {
      const B0Estimate e = dissipativity_rate(make_quadratic(k), make_zero_interaction(), r);
      EXPECT_DOUBLE_EQ(e.value, -k * r);
      EXPECT_TRUE(e.analytic);
    }
  }
}

TEST(Dissipativity, MeanValueBoundWithBoundedInteraction) {
  for (int d : {1, 2}) {
    const auto W = make_gaussian_bump(0.3, 1.0, true, d);
    const double K = hessian_opnorm_sup(W);
    for (double r : {0.05, 0.5, 1.0, 2.5, 6.0}) {
      const B0Estimate e = dissipativity_rate(make_quadratic(1.0, d), W, r);
      EXPECT_LE(e.value, -(1.0 - K) * r + 1e-10) << "d=" << d << " r=" << r;
      EXPECT_GE(e.value, -(1.0 + K) * r - 1e-10);
    }
  }
}

TEST(Dissipativity, VanishesAtCoincidence) {
  const B0Estimate e = dissipativity_rate(make_double_well(0.25, 0.5), make_gaussian_bump(0.2, 1.0, true), 1e-7);
  EXPECT_LT(std::abs(e.value), 1e-5);
  EXPECT_THROW(dissipativity_rate(make_quadratic(1.0), make_zero_interaction(), 0.0), InvalidInput);
}

TEST(Lipschitz, LinearRateClosedForm) {
  for (double a : {0.5, 1.0, 2.0}) {
    const LipschitzResult r = lipschitz_constant([a](double u) { return -a * u; });
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0 / a, 1e-8) << "a=" << a;
  }
}

TEST(Lipschitz, ExpandingRateDiverges) {
  const LipschitzResult r = lipschitz_constant([](double) { return 1.0; });
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isinf(r.value));
}

TEST(Convexity, QuadraticIsGloballyConvex) {
  const auto t = convexity_at_infinity_fit(make_quadratic(1.7), make_zero_interaction());
  ASSERT_TRUE(t.has_value());
  EXPECT_DOUBLE_EQ(t->cU, 1.7);
  EXPECT_EQ(t->c, 0.0);
  EXPECT_EQ(t->R, 0.0);
}

TEST(Convexity, DoubleWellTripleHoldsOnRandomPairs) {
  const auto U = make_double_well(0.25, 0.5);
  const auto t = convexity_at_infinity_fit(U, make_gaussian_bump(0.05, 1.0, true));
  ASSERT_TRUE(t.has_value());
  EXPECT_GT(t->cU, 0.0);
  EXPECT_GT(t->c, 0.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng), y = u(rng);
    if (!convexity_holds(*t, U, std::span(&x, 1), std::span(&y, 1))) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Convexity, TwoDimensionalDoubleWell) {
  const auto U = make_double_well(0.25, 0.5, 2);
  const auto t = convexity_at_infinity_fit(U, make_zero_interaction(2));
  ASSERT_TRUE(t.has_value());
  std::mt19937_64 rng(29);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto x = random_point(rng, 2, 5.0), y = random_point(rng, 2, 5.0);
    if (!convexity_holds(*t, U, x, y)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}
