#include "polymin/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_polys.hpp"

namespace polymin {
namespace {

using testing::DiophantineObjective;
using testing::RandomCoercive;
using testing::VarietyObjective;

Polynomial P(const char* text, int n) { return ParsePolynomial(text, n); }

Polynomial Component(const Polynomial& f, int j) {
  for (const auto& c : HomogeneousComponents(f)) {
    if (c.degree == j) return c.poly;
  }
  return Polynomial(f.num_vars());
}

double PNorm(std::span<const std::int64_t> x, int p) {
  double s = 0.0;
  for (auto xi : x) s += std::pow(std::abs(static_cast<double>(xi)), p);
  return std::pow(s, 1.0 / p);
}

// Dense random polynomial of degree d in n variables whose leading form is
// sum x_i^d plus a small perturbation, so that it stays positive definite.
GTEST_TEST(CjAlgebraicTest, CoefficientNorm) {
  EXPECT_EQ(CjCoefficientNorm(P("3*x1 - 2*x2", 2)), -5.0);
  EXPECT_EQ(CjCoefficientNorm(Polynomial(2)), 0.0);
  EXPECT_EQ(CjCoefficientNorm(P("x1^4 - 3*x1^2*x2^2 + 2*x2^4", 2)), -6.0);
}

GTEST_TEST(CjAlgebraicTest, MonomialSphereMaximizer) {
  const auto a = MonomialSphereMaximizer(Monomial({1, 1}), 2);
  EXPECT_NEAR(a[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(a[1], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(MonomialSphereMax(Monomial({1, 1}), 2), 0.5, 1e-15);
  EXPECT_EQ(MonomialSphereMaximizer(Monomial({2, 0}), 2), (std::vector<double>{1.0, 0.0}));
  const auto c = MonomialSphereMaximizer(Monomial({1, 1}), 4);
  EXPECT_NEAR(c[0], std::pow(2.0, -0.25), 1e-15);
  EXPECT_NEAR(MonomialSphereMax(Monomial({1, 1}), 4), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(MonomialSphereMaximizer(Monomial(2), 2), std::invalid_argument);
}

GTEST_TEST(CjAlgebraicTest, MonomialRefined) {
  EXPECT_NEAR(CjMonomialRefined(P("-x1*x2", 2), 2), -0.5, 1e-15);
  EXPECT_EQ(CjMonomialRefined(P("x1^2 + x2^2", 2), 2), -2.0);
  EXPECT_NEAR(CjMonomialRefined(P("-x1^2*x2", 2), 2), -(2.0 / 3.0) * std::sqrt(1.0 / 3.0),
              1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial fj(3);
    for (const Monomial& m : MonomialsUpToDegree(3, 3, 3)) fj.AddTerm(m, u(rng));
    for (double p : {1.0, 2.0, 3.5, 6.0}) {
      EXPECT_GE(CjMonomialRefined(fj, p), CjCoefficientNorm(fj) - 1e-15);
    }
  }
}

GTEST_TEST(BestCjTest, ZeroComponentAndProvenance) {
  const CjVector c = BestCj(P("x1^4 + x2^4 + x1^2", 2), 2, 4);
  ASSERT_EQ(c.degree(), 4);
  EXPECT_EQ(c[1], 0.0);
  EXPECT_EQ(c.entries[0].source, CjSource::Max);
  EXPECT_EQ(c[3], 0.0);
  EXPECT_NEAR(c[2], 0.0, 1e-6);
  EXPECT_EQ(c.entries[1].source, CjSource::SphereSos);
  EXPECT_NEAR(c[4], 0.5, 1e-6);
  EXPECT_TRUE(c.entries[3].nie.has_value());
}

GTEST_TEST(BestCjTest, VarietyVector) {
  const CjVector c = BestCj(VarietyObjective(), 2, 4);
  const std::vector<double> expected = {0.0, -2.0, -0.77, 1.0};
  ASSERT_EQ(c.degree(), 4);
  for (int j = 1; j <= 4; ++j) EXPECT_NEAR(c[j], expected[j - 1], 0.05) << "j=" << j;
}

GTEST_TEST(BestCjTest, DiophantineVector) {
  const CjVector c = BestCj(DiophantineObjective(), 6, 8);
  const std::vector<double> expected = {-60.49, -13.03, -41.76, -7.85, -24.45, 2.59};
  ASSERT_EQ(c.degree(), 6);
  for (int j = 1; j <= 6; ++j) {
    EXPECT_NEAR(c[j], expected[j - 1], 0.5) << "j=" << j;
    // With p = d the Nie program bounds f_6 on the same sphere.
    if (j < 6) EXPECT_EQ(c.entries[j - 1].source, CjSource::SphereSos) << "j=" << j;
  }
  EXPECT_NE(c.entries[5].source, CjSource::CoefficientNorm);
  EXPECT_NE(c.entries[5].source, CjSource::MonomialRefined);
  EXPECT_NEAR(LargestNonnegRoot(c.values()), 9.90, 0.05);
}

GTEST_TEST(BestCjTest, SoundOnSphereSamples) {
  std::mt19937_64 rng(17);
  for (int p : {2, 4}) {
    const Polynomial f = RandomCoercive(2, 4, rng);
    const CjVector c = BestCj(f, p, 6);
    for (int j = 1; j <= 4; ++j) {
      const Polynomial fj = Component(f, j);
      const auto lowest = LowestSphereSamplesParallel(CompiledPolynomial(fj), p, 100000, 1, 5);
      ASSERT_EQ(lowest.size(), 1u);
      EXPECT_GE(lowest[0].value, c[j] - 1e-6) << "p=" << p << " j=" << j;
    }
  }
}

GTEST_TEST(SphereSampleTest, PointsLieOnTheSphere) {
  for (int p : {2, 4, 6}) {
    for (std::int64_t i = 0; i < 100; ++i) {
      const std::vector<double> x = SpherePoint(3, p, 9, i);
      double s = 0.0;
      for (double xi : x) s += std::pow(std::abs(xi), p);
      EXPECT_NEAR(s, 1.0, 1e-12);
      EXPECT_EQ(x, SpherePoint(3, p, 9, i));
    }
  }
  EXPECT_NE(SpherePoint(3, 2, 9, 0), SpherePoint(3, 2, 9, 1));
  EXPECT_NE(SpherePoint(3, 2, 9, 0), SpherePoint(3, 2, 10, 0));
}

GTEST_TEST(SphereSampleTest, ParallelMatchesSerial) {
  std::mt19937_64 rng(23);
  const CompiledPolynomial f(RandomCoercive(3, 4, rng));
  for (std::int64_t count : {0, 1, 1023, 1024, 1025, 20000}) {
    for (std::size_t keep : {0u, 1u, 8u}) {
      const auto serial = LowestSphereSamples(f, 4, count, keep, 3);
      const auto parallel = LowestSphereSamplesParallel(f, 4, count, keep, 3);
      ASSERT_EQ(serial.size(), std::min<std::size_t>(keep, count));
      ASSERT_EQ(serial.size(), parallel.size());
      for (std::size_t k = 0; k < serial.size(); ++k) {
        EXPECT_EQ(serial[k].index, parallel[k].index);
        EXPECT_EQ(serial[k].value, parallel[k].value);
        if (k > 0) EXPECT_LE(serial[k - 1].value, serial[k].value);
        EXPECT_EQ(serial[k].value, f(SpherePoint(3, 4, 3, serial[k].index)));
      }
    }
  }
}

GTEST_TEST(RootTest, Examples) {
  EXPECT_EQ(LargestNonnegRoot({0.0, 1.0}), 0.0);
  EXPECT_NEAR(LargestNonnegRoot({-2.0, -3.0, 0.0, 1.0}), 2.0, 1e-9);
  EXPECT_EQ(LargestNonnegRoot({5.0}), 0.0);
  EXPECT_EQ(LargestNonnegRoot({1.0, 1.0, 1.0}), 0.0);
  // Double positive root: (lambda - 3)^2 lambda.
  EXPECT_NEAR(LargestNonnegRoot({9.0, -6.0, 1.0}), 3.0, 1e-6);
  EXPECT_THROW(LargestNonnegRoot({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(LargestNonnegRoot({}), std::invalid_argument);
}

GTEST_TEST(RootTest, RootPropertiesOnRandomVectors) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 8;
    std::vector<double> c(d);
    for (double& v : c) v = u(rng);
    c.back() = std::abs(c.back()) + 0.1;
    const double r = LargestNonnegRoot(c);
    ASSERT_GE(r, 0.0);
    const auto q = [&](double x) {
      double v = 0.0;
      for (int j = d; j >= 1; --j) v = v * x + c[j - 1];
      return v * x;
    };
    double scale = 0.0;
    for (int j = 1; j <= d; ++j) scale += std::abs(c[j - 1]) * std::pow(std::max(1.0, r), j);
    EXPECT_LE(std::abs(q(r)), 1e-9 * scale);
    for (double t : {1e-6, 1e-3, 0.1, 1.0, 10.0, 100.0}) {
      EXPECT_GT(q(r + t * std::max(1.0, r)), 0.0);
    }
  }
}

GTEST_TEST(RootTest, Monotonicity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> lift(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 6;
    std::vector<double> c(d);
    for (double& v : c) v = u(rng);
    c.back() = std::abs(c.back()) + 0.1;
    std::vector<double> raised = c;
    for (int j = 0; j + 1 < d; ++j) raised[j] += trial % 2 == 0 ? lift(rng) : 0.0;
    raised[trial % (d - 1)] += lift(rng);
    EXPECT_LE(LargestNonnegRoot(raised), LargestNonnegRoot(c) + 1e-9);
  }
}

GTEST_TEST(MarshallTest, Examples) {
  EXPECT_EQ(MarshallRadius(P("x1^4 - 3*x1^2 + 2*x1", 1), 1.0), 5.0);
  EXPECT_EQ(MarshallRadius(P("x1^4 + 1", 1), 1.0), 1.0);
  // Coefficient-norm radius of the same f with shared c_d: q = l^4 - 3l^2 - 2l.
  const Polynomial f = P("x1^4 - 3*x1^2 + 2*x1", 1);
  std::vector<double> c = {CjCoefficientNorm(Component(f, 1)),
                           CjCoefficientNorm(Component(f, 2)), 0.0, 1.0};
  EXPECT_NEAR(LargestNonnegRoot(c), 2.0, 1e-9);
  EXPECT_THROW(MarshallRadius(P("x1^4", 1), 0.0), std::invalid_argument);
}

// R <= R_lit with c_j = -||f_j||_1 and the same c_d.
GTEST_TEST(MarshallTest, DominatesCoefficientNormRadius) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int strict = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    const int d = 2 * (1 + trial % 3);
    Polynomial f(n);
    for (const Monomial& m : MonomialsUpToDegree(n, d - 1)) f.AddTerm(m, u(rng));
    for (int i = 0; i < n; ++i) f.AddTerm(Monomial::Unit(n, i, d), 1.0);
    const double c_d = 0.5 + std::abs(u(rng));
    std::vector<double> c(d);
    for (int j = 1; j < d; ++j) c[j - 1] = CjCoefficientNorm(Component(f, j));
    c[d - 1] = c_d;
    const double r = LargestNonnegRoot(c);
    const double r_lit = MarshallRadius(f, c_d);
    EXPECT_LE(r, r_lit + 1e-9);
    if (d > 2 && r > 1.0 && r < r_lit - 1e-9) ++strict;
  }
  EXPECT_GT(strict, 0);
}

GTEST_TEST(OrthantTest, Examples) {
  const auto ob = OrthantRadii(P("x1^4 + x1^3", 1), 2, 1.0);
  ASSERT_EQ(ob.size(), 2u);
  EXPECT_EQ(ob[0].tau, std::vector<int>{1});
  EXPECT_EQ(ob[0].c[2], 0.0);
  EXPECT_EQ(ob[0].radius, 0.0);
  EXPECT_EQ(ob[1].tau, std::vector<int>{-1});
  EXPECT_NEAR(ob[1].radius, 1.0, 1e-9);

  const auto pos = OrthantRadii(P("x1^4 + x2^4 + x1*x2 + 2*x1 + x2^2", 2), 2, 1.0);
  ASSERT_EQ(pos.size(), 4u);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(pos[0].c[j], 0.0);
  EXPECT_EQ(pos[0].radius, 0.0);
  EXPECT_THROW(OrthantRadii(P("x1^2", 1), 2, -1.0), std::invalid_argument);
  EXPECT_THROW(OrthantRadii(Polynomial(17), 2, 1.0), std::invalid_argument);
}

GTEST_TEST(OrthantTest, BoundedByRefinedRadius) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Polynomial f = RandomCoercive(2, 4, rng);
    const double c_d = 0.5;
    std::vector<double> c(4);
    for (int j = 1; j < 4; ++j) c[j - 1] = CjMonomialRefined(Component(f, j), 2);
    c[3] = c_d;
    const double r = LargestNonnegRoot(c);
    for (const auto& ob : OrthantRadii(f, 2, c_d)) EXPECT_LE(ob.radius, r + 1e-9);
  }
}

GTEST_TEST(NormBoundTest, Examples) {
  const NormBoundReport a = ComputeNormBound(P("x1^2 + x2^2", 2), 2);
  EXPECT_EQ(a.definite, Definiteness::CertifiedPositive);
  ASSERT_TRUE(a.radius.has_value());
  EXPECT_EQ(*a.radius, 0.0);
  EXPECT_EQ(*a.box_radius, 0);
  EXPECT_EQ(*a.marshall_radius, 1.0);

  const NormBoundReport v = ComputeNormBound(VarietyObjective(), 2);
  ASSERT_EQ(v.definite, Definiteness::CertifiedPositive);
  EXPECT_NEAR(*v.radius, 1.86, 0.05);
  EXPECT_EQ(*v.box_radius, 1);
  EXPECT_EQ(v.orthants.size(), 8u);
}

GTEST_TEST(NormBoundTest, DiophantineRadius) {
  const NormBoundReport r = ComputeNormBound(DiophantineObjective(), 6, 8);
  ASSERT_EQ(r.definite, Definiteness::CertifiedPositive);
  EXPECT_NEAR(*r.radius, 9.90, 0.05);
  EXPECT_EQ(*r.box_radius, 9);
  EXPECT_FALSE(r.marshall_radius.has_value());
  EXPECT_EQ(r.level, 8);
}

GTEST_TEST(NormBoundTest, IndefiniteAndUndecided) {
  const NormBoundReport w = ComputeNormBound(P("-x1^4 + x2^4", 2), 2);
  EXPECT_EQ(w.definite, Definiteness::CertifiedNotPsd);
  ASSERT_TRUE(w.witness.has_value());
  EXPECT_LT(Evaluate(P("-x1^4 + x2^4", 2), *w.witness), 0.0);
  EXPECT_FALSE(w.radius.has_value());

  // x1^4 is semidefinite but not definite in two variables.
  const NormBoundReport u = ComputeNormBound(P("x1^4 + x2^2", 2), 2, 8);
  EXPECT_EQ(u.definite, Definiteness::Undecided);
  EXPECT_FALSE(u.witness.has_value());
  EXPECT_EQ(u.certify_level, 8);

  EXPECT_THROW(ComputeNormBound(P("x1^3 + x2^2", 2), 2), DegreeError);
  EXPECT_THROW(ComputeNormBound(P("3", 2), 2), DegreeError);
  try {
    ComputeNormBound(P("x1^5", 1), 2);
  } catch (const DegreeError& e) {
    EXPECT_EQ(e.degree(), 5);
  }
}

// Every integer point with f(x) < f(0) lies inside the certified radius, and
// inside the radius of its orthant.
GTEST_TEST(NormBoundTest, EnclosesImprovingIntegerPoints) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial f = RandomCoercive(2, 4, rng) * 0.25;
    const NormBoundReport r = ComputeNormBound(f, 2);
    ASSERT_EQ(r.definite, Definiteness::CertifiedPositive);
    const double f0 = Evaluate(f, std::vector<double>{0.0, 0.0});
    const std::int64_t b = *r.box_radius + 3;
    for (std::int64_t x1 = -b; x1 <= b; ++x1) {
      for (std::int64_t x2 = -b; x2 <= b; ++x2) {
        const std::vector<std::int64_t> x = {x1, x2};
        if (!(Evaluate(f, x) < f0)) continue;
        ++checked;
        EXPECT_LE(PNorm(x, 2), *r.radius + 1e-9);
        for (const auto& ob : r.orthants) {
          if (ob.tau[0] * x1 >= 0 && ob.tau[1] * x2 >= 0) {
            EXPECT_LE(PNorm(x, 2), ob.radius + 1e-9);
          }
        }
      }
    }
  }
  EXPECT_GT(checked, 0);
}

GTEST_TEST(NormBoundTest, JsonReport) {
  const nlohmann::json j = ToJson(ComputeNormBound(VarietyObjective(), 2));
  EXPECT_EQ(j["definite"], "CertifiedPositive");
  EXPECT_EQ(j["c"]["entries"].size(), 4u);
  EXPECT_EQ(j["c"]["entries"][0]["j"], 1);
  EXPECT_TRUE(j["R"].is_number());
  EXPECT_TRUE(j["R_lit"].is_number());
  EXPECT_EQ(j["box_radius"], 1);
  EXPECT_TRUE(j["witness"].is_null());
  EXPECT_EQ(j["orthants"].size(), 8u);
  const nlohmann::json back = nlohmann::json::parse(j.dump());
  EXPECT_EQ(back, j);
}

}  // namespace
}  // namespace polymin
