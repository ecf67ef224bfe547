#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mfhypo/core.hpp"

using namespace mfhypo;

TEST(Provenance, OnlyEstimatesAreNonCertifying) {
  EXPECT_TRUE(is_certifying(Provenance::Analytic));
  EXPECT_TRUE(is_certifying(Provenance::UserSupplied));
  EXPECT_TRUE(is_certifying(Provenance::NumericVerified));
  EXPECT_TRUE(is_certifying(Provenance::CriterionDerived));
  EXPECT_FALSE(is_certifying(Provenance::NumericEstimate));
}

TEST(Provenance, WeakerPicksTheLessTrustedSource) {
  EXPECT_EQ(weaker(Provenance::Analytic, Provenance::NumericEstimate), Provenance::NumericEstimate);
  EXPECT_EQ(weaker(Provenance::CriterionDerived, Provenance::Analytic), Provenance::CriterionDerived);
  EXPECT_EQ(weaker(Provenance::UserSupplied, Provenance::NumericVerified), Provenance::NumericVerified);
  EXPECT_EQ(weaker(Provenance::Analytic, Provenance::Analytic), Provenance::Analytic);
}

TEST(CounterNormal, PureFunctionOfKey) {
  const StreamKey k{42, 3, 1, 0, 17};
  EXPECT_EQ(counter_normal(k), counter_normal(k));
  EXPECT_EQ(counter_normal(k), counter_normal(stream_prefix(42, 3, 1, 0), 17));
  StreamKey other = k;
  other.step = 18;
  EXPECT_NE(counter_normal(k), counter_normal(other));
  other = k;
  other.particle = 2;
  EXPECT_NE(counter_normal(k), counter_normal(other));
}

TEST(CounterNormal, StandardNormalMoments) {
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  const std::uint64_t p = stream_prefix(9, 0, 0, 0);
  for (int i = 0; i < n; ++i) {
    const double z = counter_normal(p, static_cast<std::uint64_t>(i));
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  s1 /= n;
  s2 /= n;
  s4 /= n;
  EXPECT_NEAR(s1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(CounterNormal, DistinctStreamsAreUncorrelated) {
  const int n = 100000;
  const std::uint64_t a = stream_prefix(1, 0, 0, 0), b = stream_prefix(1, 0, 1, 0);
  double c = 0.0;
  for (int i = 0; i < n; ++i) c += counter_normal(a, i) * counter_normal(b, i);
  EXPECT_NEAR(c / n, 0.0, 4.0 / std::sqrt(n));
}

TEST(UniformOpen, NeverHitsEndpoints) {
  EXPECT_GT(uniform_open(0), 0.0);
  EXPECT_LT(uniform_open(~0ULL), 1.0);
}

TEST(Numeric, GaussLegendreIntegratesPolynomialsExactly) {
  const double v = numeric::gauss_legendre([](double x) { return x * x * x * x - 2.0 * x + 1.0; }, 0.0, 2.0);
  EXPECT_NEAR(v, 32.0 / 5.0 - 4.0 + 2.0, 1e-13);
  EXPECT_NEAR(numeric::gauss_legendre([](double x) { return std::exp(x); }, 0.0, 1.0), std::numbers::e - 1.0, 1e-14);
}

TEST(Numeric, GoldenMaxFindsInteriorMaximum) {
  const auto e = numeric::golden_max([](double x) { return -(x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 1.0);
  EXPECT_NEAR(e.arg, 0.3, 1e-6);
  EXPECT_NEAR(e.value, 2.0, 1e-12);
}

TEST(Numeric, ScanMaxRefinesAroundBestGridPoint) {
  const auto grid = numeric::linspace(0.0, 3.0, 31);
  const auto e = numeric::scan_max([](double r) { return r * std::exp(-r * r / 2.0); }, grid);
  EXPECT_NEAR(e.arg, 1.0, 1e-6);
  EXPECT_NEAR(e.value, std::exp(-0.5), 1e-12);
}

TEST(Numeric, LinspaceAndLogspaceEndpoints) {
  const auto l = numeric::linspace(-1.0, 1.0, 5);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_DOUBLE_EQ(l.front(), -1.0);
  EXPECT_DOUBLE_EQ(l[2], 0.0);
  EXPECT_DOUBLE_EQ(l.back(), 1.0);
  const auto g = numeric::logspace(1.0, 100.0, 3);
  EXPECT_NEAR(g[1], 10.0, 1e-12);
  EXPECT_NEAR(g[2], 100.0, 1e-12);
}

TEST(Numeric, NelderMeadMaximisesSmoothBowl) {
  auto f = [](std::span<const double> p) { return -(p[0] - 1.0) * (p[0] - 1.0) - 2.0 * (p[1] + 0.5) * (p[1] + 0.5); };
  const auto r = numeric::nelder_mead_max(f, {0.0, 0.0}, {0.5, 0.5});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.arg[0], 1.0, 1e-5);
  EXPECT_NEAR(r.arg[1], -0.5, 1e-5);
}

TEST(Helpers, PartsAndFiniteness) {
  EXPECT_EQ(positive_part(-2.0), 0.0);
  EXPECT_EQ(positive_part(2.0), 2.0);
  EXPECT_EQ(negative_part(-2.0), 2.0);
  EXPECT_EQ(negative_part(3.0), 0.0);
  const std::vector<double> bad{1.0, NAN};
  EXPECT_THROW(require_finite(bad, "x"), InvalidInput);
}
