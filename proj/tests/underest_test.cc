#include "polymin/underest.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polymin/bnb.hpp"
#include "polymin/bounds.hpp"
#include "polymin/instance.hpp"
#include "test_polys.hpp"

namespace polymin {
namespace {

using testing::RandomCoercive;
using testing::UnivariateObjective;

Polynomial P(const char* text, int n) { return ParsePolynomial(text, n); }

std::span<const std::int64_t> Span(const std::vector<std::int64_t>& v) { return v; }

double BruteForceMin(const Polynomial& f, std::int64_t r) {
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t a = -r; a <= r; ++a) {
    for (std::int64_t b = -r; b <= r; ++b) {
      best = std::min(best, Evaluate(f, Span({a, b})));
    }
  }
  return best;
}

GTEST_TEST(RoundTest, TiesAwayFromZero) {
  const std::vector<double> h = {0.5, -0.5, 1.49, -2.5, 2.51, 0.0};
  EXPECT_EQ(RoundHalfAway(h), (std::vector<std::int64_t>{1, -1, 1, -3, 3, 0}));
}

GTEST_TEST(EvalGTest, Examples) {
  Underestimator g;
  g.h = {0.5};
  g.exponents = {Monomial(1), Monomial::Unit(1, 0)};
  g.b = {1.25, 2.0};
  g.w = {1.0, 0.0};
  const std::vector<double> at_h = {0.5};
  EXPECT_EQ(EvalG(g, at_h), 1.25);
  g.b = {0.0, 2.0};
  EXPECT_EQ(EvalG(g, Span({2})), 4.5);
  EXPECT_EQ(g.degree(), 2);
  EXPECT_EQ(g.ToPolynomial(), P("2*x1^2 - 2*x1 + 0.5", 1));
  EXPECT_EQ(MinOverIntegerCompletion(g, Span({})), EvalG(g, Span({1})));
}

GTEST_TEST(ChooseHTest, Examples) {
  const auto a = ChooseH(P("x1^2 - 0.6*x1 + x2^2 + 3.4*x2", 2), {.radius = 4.0});
  EXPECT_NEAR(a[0], 0.3, 1e-6);
  EXPECT_NEAR(a[1], -1.7, 1e-6);
  const Polynomial u = UnivariateObjective();
  const auto b = ChooseH(u, {.radius = 4.0});
  EXPECT_NEAR(b[0], 0.3, 1e-5);
  const auto c = ChooseH(P("x1^4", 1));
  EXPECT_NEAR(c[0], 0.0, 1e-2);
  for (const auto& [f, h] : {std::pair{u, b}, std::pair{P("x1^4", 1), c}}) {
    for (double gi : NumericGradient(f, h)) EXPECT_LE(std::abs(gi), 1e-6);
  }
}

GTEST_TEST(GlobTest, UnivariateExample) {
  const Polynomial f = UnivariateObjective();
  const std::vector<double> h = {0.3};
  const UnderestimateResult r = SolveGlob(f, h);
  ASSERT_TRUE(r.ok()) << r.status;
  EXPECT_NEAR(r.value, 0.07, 0.005);
  EXPECT_NEAR(r.lower_bound, r.value - 1e-6, 1e-15);
  ASSERT_EQ(r.g.exponents.size(), 4u);
  EXPECT_NEAR(r.g.b[1], 0.75, 0.01);
  EXPECT_LT(r.g.b[2], 1e-6);
  EXPECT_LT(r.g.b[3], 1e-6);
  EXPECT_LE(r.certificate_residual, 1e-6);
  EXPECT_LE(r.g.degree(1e-6), *f.degree());
}

GTEST_TEST(GlobTest, TrivialExamples) {
  const std::vector<double> half = {0.5};
  const UnderestimateResult a = SolveGlob(P("x1^2 - x1 + 0.25", 1), half);
  ASSERT_TRUE(a.ok());
  EXPECT_NEAR(a.value, 0.25, 1e-6);

  const std::vector<double> zero = {0.0, 0.0};
  const UnderestimateResult b = SolveGlob(P("x1^2 + x2^2 + 1", 2), zero);
  ASSERT_TRUE(b.ok());
  EXPECT_NEAR(b.value, 1.0, 1e-6);
  for (std::size_t i = 1; i < b.g.w.size(); ++i) EXPECT_EQ(b.g.w[i], 0.0);
  EXPECT_THROW(SolveGlob(P("x1^3", 1), std::vector<double>{0.0}), std::invalid_argument);
}

GTEST_TEST(SlsTest, UnivariateExample) {
  const Polynomial f = UnivariateObjective();
  const std::vector<double> h = {0.3};
  const double z = Evaluate(f, Span({0}));
  const UnderestimateResult r = SolveSls(f, h, z, 2);
  ASSERT_TRUE(r.ok()) << r.status;
  EXPECT_TRUE(r.certified);
  EXPECT_NEAR(r.value, 2.84, 0.05);
  EXPECT_LE(r.value, z + 1e-6);
  EXPECT_LE(r.certificate_residual, 1e-6);
  EXPECT_EQ(r.g.kind, UnderestimatorKind::Sls);
  EXPECT_LE(r.g.degree(1e-6), *f.degree() + 2);
  // sigma is SOS: it is a nonnegative quadratic in one variable.
  const double s2 = r.sigma.coefficient(Monomial::Unit(1, 0, 2));
  const double s1 = r.sigma.coefficient(Monomial::Unit(1, 0, 1));
  const double s0 = r.sigma.coefficient(Monomial(1));
  EXPECT_GE(s2, -1e-9);
  EXPECT_GE(s0, -1e-9);
  EXPECT_LE(s1 * s1, 4.0 * s2 * s0 + 1e-6);

  const Quality q_sls = QualityRatio(f, h, r.value, Span({0}));
  EXPECT_NEAR(q_sls.value, 1.0, 0.02);
  const UnderestimateResult glob = SolveGlob(f, h);
  const Quality q_glob = QualityRatio(f, h, glob.value, Span({0}));
  EXPECT_NEAR(q_glob.value, 0.025, 0.003);
  EXPECT_FALSE(q_glob.clamped);
}

GTEST_TEST(SlsTest, ReducesToGlobAndRejectsLowZ) {
  const Polynomial f = UnivariateObjective();
  const std::vector<double> h = {0.3};
  const double z = Evaluate(f, Span({0}));
  const UnderestimateResult glob = SolveGlob(f, h);
  const UnderestimateResult none = SolveSls(f, h, z, -1);
  EXPECT_EQ(none.g.kind, UnderestimatorKind::Glob);
  EXPECT_NEAR(none.value, glob.value, 1e-7);
  EXPECT_THROW(SolveSls(f, h, z - 1.0, 2), std::invalid_argument);

  const std::vector<double> half = {0.5};
  const Polynomial sq = P("x1^2 - x1 + 0.25", 1);
  const UnderestimateResult r = SolveSls(sq, half, Evaluate(sq, Span({1})), 2);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.value, 0.25, 1e-5);
}

GTEST_TEST(QualityTest, Examples) {
  const Polynomial f = P("x1^2", 1);
  const std::vector<double> h = {0.0};
  EXPECT_TRUE(QualityRatio(f, h, 0.0, Span({0})).exact);
  const Polynomial shifted = P("x1^2 - 0.6*x1 + 0.09", 1);
  const std::vector<double> h3 = {0.3};
  const Quality q = QualityRatio(shifted, h3, Evaluate(shifted, h3), Span({0}));
  EXPECT_EQ(q.value, 0.0);
  EXPECT_FALSE(q.clamped);
  const Quality over = QualityRatio(shifted, h3, 1.0, Span({0}));
  EXPECT_TRUE(over.clamped);
  EXPECT_EQ(over.value, 1.0);
}

// Underestimation, dominance, validity and slice monotonicity on random
// coercive instances with n = 2, d = 4.
GTEST_TEST(UnderestPropertiesTest, RandomInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const Polynomial f = RandomCoercive(2, 4, rng);
    const NormBoundReport nb = ComputeNormBound(f, 2);
    ASSERT_EQ(nb.definite, Definiteness::CertifiedPositive);
    const double radius = std::max(1.0, *nb.radius);
    const std::vector<double> h = ChooseH(f, {.radius = radius, .seed = 3});
    const std::vector<std::int64_t> rh = RoundHalfAway(h);
    const double z = Evaluate(f, Span(rh));
    const UnderestimateResult glob = SolveGlob(f, h);
    const UnderestimateResult sls = SolveSls(f, h, z, 2);
    ASSERT_TRUE(glob.ok()) << glob.status;
    // A solve that stalls short of the gap tolerance still has to leave a
    // certificate that holds.
    ASSERT_TRUE(sls.usable()) << sls.status;
    EXPECT_TRUE(glob.certified);
    EXPECT_GE(sls.value, glob.value - 10 * 1e-8 * (1.0 + std::abs(glob.value)));

    const double brute = BruteForceMin(f, *nb.box_radius);
    EXPECT_LE(glob.lower_bound, brute);
    EXPECT_LE(sls.lower_bound, brute);

    std::uniform_real_distribution<double> box(-radius, radius);
    for (int t = 0; t < 10000; ++t) {
      const std::vector<double> x = {box(rng), box(rng)};
      const double fx = Evaluate(f, x);
      EXPECT_GE(fx - EvalG(glob.g, x), -1e-6);
      if (fx <= z) EXPECT_GE(fx - EvalG(sls.g, x), -1e-6);
    }

    for (const Underestimator* g : {&glob.g, &sls.g}) {
      for (std::size_t i = 0; i < g->b.size(); ++i) {
        if (!g->exponents[i].is_constant()) EXPECT_GE(g->b[i], -1e-9);
      }
      // g(x) >= g(x with x_k moved to round(h_k)) on a +-10 grid.
      for (std::int64_t a = -10; a <= 10; ++a) {
        for (std::int64_t b = -10; b <= 10; ++b) {
          const double gx = EvalG(*g, Span({a, b}));
          EXPECT_GE(gx, EvalG(*g, Span({rh[0], b})) - 1e-9 * (1.0 + std::abs(gx)));
          EXPECT_GE(gx, EvalG(*g, Span({a, rh[1]})) - 1e-9 * (1.0 + std::abs(gx)));
        }
      }
    }
  }
}

GTEST_TEST(UnderestTranslationTest, BoundsFollowTheShift) {
  const Polynomial f = UnivariateObjective();
  const std::vector<double> far = {-20.0};
  const Polynomial moved = Translate(f, far);  // minimum near x = 20.3
  const std::vector<double> h = {20.3};
  const UnderestimateResult glob = SolveGlob(moved, h);
  ASSERT_TRUE(glob.certified) << glob.status;
  EXPECT_NEAR(glob.value, 0.0675, 1e-5);
  const double z = Evaluate(moved, Span({20}));
  const UnderestimateResult sls = SolveSls(moved, h, z, 2);
  ASSERT_TRUE(sls.certified) << sls.status;
  EXPECT_NEAR(sls.value, 2.8396, 1e-3);
  EXPECT_EQ(sls.g.h, h);
  // f - g - sigma (z - f) is a sum of squares, so nonnegative everywhere.
  for (double x = 10.0; x <= 30.0; x += 0.25) {
    const std::vector<double> p = {x};
    const double fx = Evaluate(moved, p);
    const double rest = fx - EvalG(sls.g, p) - Evaluate(sls.sigma, p) * (z - fx);
    EXPECT_GE(rest, -1e-6 * (1.0 + std::abs(fx))) << x;
    EXPECT_GE(Evaluate(sls.sigma, p), -1e-9) << x;
  }
}

GTEST_TEST(UnderestTranslationTest, RandomInstanceFarFromOrigin) {
  // Seed 44 of the (2, 4) generator: h is near (-272, -12) and f(h) is
  // about -1.3e6.
  const Polynomial f = GenerateInstance({2, 4, 44});
  const NormBoundReport nb = ComputeNormBound(f, 2);
  ASSERT_EQ(nb.definite, Definiteness::CertifiedPositive);
  const std::vector<double> h = ChooseH(f, {.radius = *nb.radius});
  EXPECT_GT(std::abs(h[0]), 100.0);
  const double z = Evaluate(f, Span(RoundHalfAway(h)));
  const UnderestimateResult glob = SolveGlob(f, h);
  const UnderestimateResult sls = SolveSls(f, h, z, 2);
  ASSERT_TRUE(glob.usable()) << glob.status;
  ASSERT_TRUE(sls.usable()) << sls.status;
  const double minimum = BruteForce(f, *nb.radius, 2).u;
  EXPECT_LE(glob.lower_bound, minimum);
  EXPECT_LE(sls.lower_bound, minimum);
  EXPECT_GE(sls.value, glob.value - 1e-7 * (1.0 + std::abs(glob.value)));
}

GTEST_TEST(UnderestJsonTest, RoundTrip) {
  const Polynomial f = UnivariateObjective();
  const std::vector<double> h = {0.3};
  const UnderestimateResult r = SolveSls(f, h, Evaluate(f, Span({0})), 2);
  const nlohmann::json j = ToJson(r);
  EXPECT_EQ(j["g"]["kind"], "sls");
  const Underestimator back = UnderestimatorFromJson(nlohmann::json::parse(j["g"].dump()));
  EXPECT_EQ(back.b, r.g.b);
  EXPECT_EQ(back.h, r.g.h);
  EXPECT_EQ(back.exponents, r.g.exponents);
  EXPECT_EQ(back.z, r.g.z);
  EXPECT_EQ(EvalG(back, Span({0})), r.value);
  EXPECT_THROW(UnderestimatorFromJson(nlohmann::json{{"kind", "sep"}}), std::invalid_argument);
}

}  // namespace
}  // namespace polymin
