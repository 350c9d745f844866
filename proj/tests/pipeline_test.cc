#include "polymin/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_polys.hpp"

namespace polymin {
namespace {

using testing::DiophantineObjective;
using testing::UnivariateObjective;

GTEST_TEST(RngTest, SplitMixReference) {
  // Published first outputs of SplitMix64 for seed 0.
  SplitMix64 sm(0);
  EXPECT_EQ(sm.Next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(sm.Next(), 0x6e789e6aa1b965f4ULL);
}

GTEST_TEST(RngTest, UniformRange) {
  Xoshiro256 rng(7);
  double lo = 1.0, hi = -1.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = rng.UniformSigned();
    ASSERT_GT(v, -1.0);
    ASSERT_LT(v, 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  EXPECT_LT(lo, -0.999);
  EXPECT_GT(hi, 0.999);
  EXPECT_NEAR(sum / 100000, 0.0, 0.01);
  Xoshiro256 a(3), b(3), c(4);
  EXPECT_EQ(a.Next(), b.Next());
  EXPECT_NE(a.Next(), c.Next());
}

GTEST_TEST(RngTest, NormalMomentsAndSubstreams) {
  Xoshiro256 rng(11);
  double sum = 0.0, sq = 0.0, quad = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    const double v = rng.Normal();
    ASSERT_TRUE(std::isfinite(v));
    sum += v;
    sq += v * v;
    quad += v * v * v * v;
  }
  EXPECT_NEAR(sum / kDraws, 0.0, 0.01);
  EXPECT_NEAR(sq / kDraws, 1.0, 0.02);
  EXPECT_NEAR(quad / kDraws, 3.0, 0.1);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(SubstreamSeed(5, i));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_EQ(SubstreamSeed(5, 3), SubstreamSeed(5, 3));
  EXPECT_NE(SubstreamSeed(5, 3), SubstreamSeed(6, 3));
}

GTEST_TEST(GenerateInstanceTest, DeterministicWithPurePowers) {
  const InstanceSpec spec{2, 2, 42};
  const Polynomial a = GenerateInstance(spec);
  EXPECT_EQ(a, GenerateInstance(spec));
  EXPECT_EQ(a.terms().size(), 6u);
  EXPECT_NE(a, GenerateInstance({2, 2, 43}));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (const auto& [n, d] : {std::pair{2, 4}, std::pair{3, 2}, std::pair{3, 6}}) {
      const Polynomial f = GenerateInstance({n, d, seed});
      EXPECT_TRUE(SatisfiesPurePowerCondition(f, d));
      EXPECT_EQ(f.degree(), d);
      for (const auto& [m, c] : f.terms()) {
        EXPECT_GT(c, -1.0);
        EXPECT_LT(c, 1.0);
      }
    }
  }
  EXPECT_THROW(GenerateInstance({2, 3, 0}), std::invalid_argument);
  EXPECT_THROW(GenerateInstance({0, 2, 0}), std::invalid_argument);
}

GTEST_TEST(PipelineTest, UnivariateAllStrategies) {
  PipelineOptions opts;
  opts.strategies = {Strategy::UnderestimatorGlob, Strategy::UnderestimatorSls,
                     Strategy::ContinuousRelaxation, Strategy::BruteForce};
  const RunRecord r = RunPipeline(UnivariateObjective(), opts, "univariate");
  ASSERT_EQ(r.norm.definite, Definiteness::CertifiedPositive);
  ASSERT_TRUE(r.x_star);
  EXPECT_EQ(*r.x_star, (std::vector<std::int64_t>{0}));
  ASSERT_EQ(r.runs.size(), 4u);
  for (const StrategyRun& run : r.runs) {
    EXPECT_EQ(run.status, "ok") << run.message;
    EXPECT_EQ(run.result->u, *r.u);
  }
  EXPECT_NEAR(r.glob->value, 0.07, 0.02);
  EXPECT_NEAR(r.sls->value, 2.84, 0.05);
  EXPECT_GE(r.sls->quality->value, r.glob->quality->value - 1e-6);

  const std::vector<std::string> rows = BenchCsvRows(r);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].substr(0, 17), "univariate,1,6,gl");
  EXPECT_EQ(rows[3].substr(rows[3].size() - 3), ",ok");
  EXPECT_EQ(BenchCsvHeader().substr(0, 18), "# polymin-bench v1");
}

GTEST_TEST(PipelineTest, StopsWhenNotCertified) {
  const RunRecord r = RunPipeline(ParsePolynomial("x1^4 - x2^4 + x1", 2), {});
  EXPECT_EQ(r.norm.definite, Definiteness::CertifiedNotPsd);
  EXPECT_TRUE(r.norm.witness);
  EXPECT_TRUE(r.runs.empty());
  EXPECT_FALSE(r.glob);
}

GTEST_TEST(RunRecordTest, RoundTrip) {
  PipelineOptions opts;
  opts.p = 6;
  opts.k_max = 8;
  opts.strategies = {Strategy::UnderestimatorSls, Strategy::BruteForce};
  const InstanceSpec spec{2, 6, 0};
  const RunRecord r = RunPipeline(DiophantineObjective(), opts, "diophantine", spec);
  ASSERT_TRUE(r.u);
  EXPECT_EQ(*r.u, 0.0);
  const nlohmann::json j = ToJson(r);
  EXPECT_EQ(j["schema"], "polymin.run/1");
  const RunRecord back = RunRecordFromJson(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(ToJson(back), j);
  EXPECT_EQ(back.f, r.f);
  EXPECT_EQ(back.sls->g.b, r.sls->g.b);
  EXPECT_EQ(back.runs[1].result->x_star, r.runs[1].result->x_star);
  EXPECT_EQ(back.spec->seed, 0u);
  EXPECT_THROW(RunRecordFromJson(nlohmann::json{{"schema", "other"}}), std::invalid_argument);
}

}  // namespace
}  // namespace polymin
