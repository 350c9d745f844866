#include "polymin/sos.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_polys.hpp"

namespace polymin {
namespace {

using testing::DiophantineObjective;
using testing::UnivariateObjective;
using testing::VarietyObjective;

Polynomial P(const char* text, int n) { return ParsePolynomial(text, n); }

Polynomial Component(const Polynomial& f, int j) {
  return HomogeneousComponents(f).at(j).poly;
}

// Uniform sample on the unit p-sphere: Gaussian direction rescaled.
std::vector<double> SpherePoint(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  double s = 0.0;
  for (double& xi : x) {
    xi = g(rng);
    s += std::pow(std::abs(xi), p);
  }
  const double r = std::pow(s, 1.0 / p);
  for (double& xi : x) xi /= r;
  return x;
}

double SampledSphereMin(const Polynomial& f, int p, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < samples; ++t) {
    best = std::min(best, Evaluate(f, SpherePoint(f.num_vars(), p, rng)));
  }
  return best;
}

void ExpectCertificate(const SosBound& b) {
  ASSERT_TRUE(b.ok()) << b.status;
  EXPECT_LE(b.certificate_residual, 1e-6);
  for (const auto& g : b.grams) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.gram);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

SosProgram ScalarProgram(const Polynomial& f, int* y) {
  SosProgram prog(f.num_vars());
  *y = prog.NewFree("y");
  AffinePolynomial expr(f);
  expr.AddTerm(Monomial(f.num_vars()), LinearExpr::Var(*y, -1.0));
  prog.AddSosConstraint(expr);
  prog.SetObjective(LinearExpr::Var(*y));
  return prog;
}

GTEST_TEST(MonomialBasisTest, SizeAndOrder) {
  const MonomialBasis b = MonomialBasis::Full(3, 2);
  EXPECT_EQ(b.size(), 10u);
  EXPECT_TRUE(std::is_sorted(b.elements.begin(), b.elements.end()));
}

GTEST_TEST(SosCompileTest, SolvesSmallPrograms) {
  int y = 0;
  EXPECT_NEAR(ScalarProgram(P("x1^2 + 2*x1 + 2", 1), &y).Solve().objective, 1.0, 1e-7);
  EXPECT_NEAR(ScalarProgram(P("x1^2", 1), &y).Solve().objective, 0.0, 1e-7);
  EXPECT_NEAR(ScalarProgram(P("x1^2 - 2*x1 + 4", 1), &y).Solve().objective, 3.0, 1e-7);
  const SosSolution s = ScalarProgram(P("x1^4 - 2*x1^2 + 1", 1), &y).Solve();
  ASSERT_EQ(s.status, SdpStatus::Optimal);
  EXPECT_NEAR(s.objective, 0.0, 1e-6);
  EXPECT_LE(s.certificate_residual, 1e-6);
}

GTEST_TEST(SosCompileTest, CompiledProblemIsValidSdp) {
  int y = 0;
  const auto comp = ScalarProgram(P("x1^4 - 2*x1^2 + 1", 1), &y).Compile();
  EXPECT_FALSE(comp.infeasible);
  comp.sdp.Validate();
  // Parity split: {1, x^2} and {x}.
  ASSERT_EQ(comp.gram_blocks.size(), 2u);
  EXPECT_EQ(comp.gram_blocks[0].basis.size(), 2u);
  EXPECT_EQ(comp.gram_blocks[1].basis.size(), 1u);
}

GTEST_TEST(SosCompileTest, RejectsDegreeAboveBound) {
  SosProgram prog(1);
  EXPECT_THROW(prog.AddSosConstraint(AffinePolynomial(P("x1^4", 1)), 1),
               std::invalid_argument);
}

GTEST_TEST(SosCompileTest, StructurallyInfeasible) {
  // x1 * x2^3 cannot be matched once x1^2 has zero coefficient.
  int y = 0;
  EXPECT_EQ(ScalarProgram(P("x1*x2^3 + x2^4", 2), &y).Solve().status,
            SdpStatus::Infeasible);
  // Odd polynomial: unbounded below, no SOS certificate.
  SosProgram prog(1);
  const int v = prog.NewFree("y");
  AffinePolynomial expr(P("x1^2 - x1^4", 1));
  expr.AddTerm(Monomial(1), LinearExpr::Var(v, -1.0));
  prog.AddSosConstraint(expr);
  prog.SetObjective(LinearExpr::Var(v));
  EXPECT_NE(prog.Solve().status, SdpStatus::Optimal);
}

GTEST_TEST(SosCompileTest, SosMultiplierAndNonnegVariables) {
  // max t s.t. x^2 - t - s (1 - x^2) in Sigma, s >= 0 (a scalar SOS):
  // on |x| <= 1 the minimum of x^2 is 0.
  SosProgram prog(1);
  const int t = prog.NewFree("t");
  const AffinePolynomial s = prog.NewSosPolynomial({Monomial(1)}, "s");
  AffinePolynomial expr(P("x1^2", 1));
  expr.AddTerm(Monomial(1), LinearExpr::Var(t, -1.0));
  expr -= s * P("1 - x1^2", 1);
  prog.AddSosConstraint(expr);
  const int b = prog.NewNonneg("b");
  prog.SetObjective(LinearExpr::Var(t) + LinearExpr::Var(b, -1.0));
  const SosSolution sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-6);
  EXPECT_NEAR(sol.values[b], 0.0, 1e-6);
  EXPECT_GE(sol.values[1], -1e-8);
}

GTEST_TEST(UnconstrainedBoundTest, Examples) {
  const SosBound a = UnconstrainedLowerBound(P("x1^2 + x2^2 + 1", 2));
  ExpectCertificate(a);
  EXPECT_NEAR(a.value, 1.0, 1e-7);
  const SosBound b = UnconstrainedLowerBound(P("x1^2 - x1 + 0.25", 1));
  ExpectCertificate(b);
  EXPECT_NEAR(b.value, 0.0, 1e-7);

  const Polynomial f = UnivariateObjective();
  const SosBound c = UnconstrainedLowerBound(f);
  ExpectCertificate(c);
  const std::vector<double> h = {0.3};
  // f(0.3) = 0 exactly, so the bound lies in [-1e-4, f(0.3) + solver slack].
  EXPECT_LE(c.value, Evaluate(f, h) + 1e-6);
  EXPECT_GE(c.value, -1e-4);
  EXPECT_THROW(UnconstrainedLowerBound(P("x1^3", 1)), std::invalid_argument);
  EXPECT_EQ(UnconstrainedLowerBound(P("4", 1)).value, 4.0);
}

GTEST_TEST(UnconstrainedBoundTest, SoundOnBoxSamples) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Polynomial f(2);
    for (const Monomial& m : MonomialsUpToDegree(2, 4)) f.AddTerm(m, u(rng));
    f.AddTerm(Monomial::Unit(2, 0, 4), 1.5);
    f.AddTerm(Monomial::Unit(2, 1, 4), 1.5);
    const SosBound b = UnconstrainedLowerBound(f);
    ExpectCertificate(b);
    std::uniform_real_distribution<double> box(-3.0, 3.0);
    for (int t = 0; t < 10000; ++t) {
      const std::vector<double> x = {box(rng), box(rng)};
      ASSERT_GE(Evaluate(f, x), b.value - 1e-6);
    }
  }
}

GTEST_TEST(SphereBoundTest, Examples) {
  const SosBound a = SphereMinBound(P("x1^2 + x2^2", 2), 2, 2);
  ExpectCertificate(a);
  EXPECT_NEAR(a.value, 1.0, 1e-6);

  const SosBound v = SphereMinBound(Component(VarietyObjective(), 2), 2, 4);
  ExpectCertificate(v);
  EXPECT_NEAR(v.value, -2.0, 0.05);

  const SosBound d = SphereMinBound(Component(DiophantineObjective(), 6), 6, 8);
  ExpectCertificate(d);
  EXPECT_NEAR(d.value, 2.59, 0.1);

  EXPECT_EQ(SphereMinBound(Polynomial(3), 2, 4).value, 0.0);
  EXPECT_THROW(SphereMinBound(P("x1^2 + x1", 1), 2, 2), std::invalid_argument);
  EXPECT_THROW(SphereMinBound(P("x1^2", 1), 3, 4), std::invalid_argument);
}

GTEST_TEST(SphereBoundTest, SoundOnSphereSamples) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int j = 1; j <= 4; ++j) {
    Polynomial fj(3);
    for (const Monomial& m : MonomialsUpToDegree(3, j, j)) fj.AddTerm(m, u(rng));
    const SosBound b = SphereMinBound(fj, 2, 4);
    ExpectCertificate(b);
    EXPECT_GE(SampledSphereMin(fj, 2, 10000, 77 + j), b.value - 1e-6);
  }
}

GTEST_TEST(NieBoundTest, Examples) {
  const SosBound a = NieBound(P("x1^4 + x2^4 + x3^4", 3));
  ExpectCertificate(a);
  EXPECT_NEAR(a.value, 1.0, 1e-6);
  const SosBound b = NieBound(P("x1^4 + x2^4 + x1^2*x2^2", 2));
  ExpectCertificate(b);
  EXPECT_GE(b.value, 1.0 - 1e-7);
  const SosBound c = NieBound(P("x1^2 + 4*x1*x2 + x2^2", 2));
  ExpectCertificate(c);
  EXPECT_LE(c.value, -1.0 + 1e-7);
  EXPECT_THROW(NieBound(P("x1^3", 1)), std::invalid_argument);
  EXPECT_THROW(NieBound(P("x1^2 + x1", 1)), std::invalid_argument);
}

GTEST_TEST(ConvergenceSweepTest, ConstantOnSphere) {
  for (const SosBound& b : ConvergenceSweep(P("x1^2 + x2^2", 2), 2, {2, 4, 6})) {
    ASSERT_TRUE(b.ok());
    EXPECT_NEAR(b.value, 1.0, 1e-6);
  }
}

GTEST_TEST(ConvergenceSweepTest, DiophantineLinearPart) {
  const auto sweep = ConvergenceSweep(Component(DiophantineObjective(), 1), 6, {6, 8});
  ASSERT_EQ(sweep.size(), 2u);
  ASSERT_TRUE(sweep[0].ok());
  ASSERT_TRUE(sweep[1].ok());
  EXPECT_LE(sweep[0].value, sweep[1].value + 1e-7);
  EXPECT_NEAR(sweep[1].value, -60.49, 0.5);
}

GTEST_TEST(ConvergenceSweepTest, RandomQuarticIsMonotoneAndSound) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial f4(3);
  for (const Monomial& m : MonomialsUpToDegree(3, 4, 4)) f4.AddTerm(m, u(rng));
  const auto sweep = ConvergenceSweep(f4, 2, {4, 6, 8});
  const double sampled = SampledSphereMin(f4, 2, 10000, 99);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    ASSERT_TRUE(sweep[i].ok());
    EXPECT_LE(sweep[i].value, sampled + 1e-6);
    if (i > 0) EXPECT_GE(sweep[i].value, sweep[i - 1].value - 1e-7);
  }
}

}  // namespace
}  // namespace polymin
