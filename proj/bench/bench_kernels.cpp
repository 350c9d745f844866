#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "polymin/bnb.hpp"
#include "polymin/bounds.hpp"
#include "polymin/instance.hpp"
#include "polymin/sos.hpp"

namespace polymin {
namespace {

// The SDP behind max t s.t. f - t in Sigma for a random (n, d) instance,
// with random positive definite iterates.
struct SchurInput {
  SdpProblem sdp;
  std::vector<Eigen::MatrixXd> z_inv;
  std::vector<Eigen::MatrixXd> x;
};

SchurInput MakeSchurInput(int n, int d) {
  const Polynomial f = GenerateInstance({n, d, 1});
  SosProgram prog(n);
  const int t = prog.NewFree("t");
  AffinePolynomial expr(f);
  expr.AddTerm(Monomial(n), LinearExpr::Var(t, -1.0));
  prog.AddSosConstraint(expr);
  prog.SetObjective(LinearExpr::Var(t));

  SchurInput in{prog.Compile().sdp, {}, {}};
  Xoshiro256 rng(2);
  for (const LmiBlock& b : in.sdp.blocks) {
    for (auto* out : {&in.z_inv, &in.x}) {
      const Eigen::MatrixXd r =
          Eigen::MatrixXd::NullaryExpr(b.size, b.size, [&] { return rng.Normal(); });
      out->push_back(r * r.transpose() + Eigen::MatrixXd::Identity(b.size, b.size));
    }
  }
  return in;
}

template <bool kParallel>
void BM_SchurAssembly(benchmark::State& state) {
  const SchurInput in = MakeSchurInput(static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(1)));
  const SchurAssembler schur(in.sdp);
  Eigen::MatrixXd m;
  for (auto _ : state) {
    if constexpr (kParallel) {
      schur.AssembleParallel(in.z_inv, in.x, m);
    } else {
      schur.AssembleSerial(in.z_inv, in.x, m);
    }
    benchmark::DoNotOptimize(m.data());
  }
  state.counters["m"] = schur.num_vars();
}
BENCHMARK(BM_SchurAssembly<false>)
    ->Args({2, 10})->Args({3, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurAssembly<true>)
    ->Args({2, 10})->Args({3, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);

template <bool kParallel>
void BM_BruteForce(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Polynomial f = GenerateInstance({n, 4, 3});
  const double radius = static_cast<double>(state.range(1));
  std::int64_t points = 0;
  for (auto _ : state) {
    const BnbResult r = kParallel ? BruteForceParallel(f, radius, 2) : BruteForce(f, radius, 2);
    points = r.nodes_expanded;
    benchmark::DoNotOptimize(r.u);
  }
  state.counters["points"] = static_cast<double>(points);
}
BENCHMARK(BM_BruteForce<false>)->Args({2, 300})->Args({3, 40})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForce<true>)->Args({2, 300})->Args({3, 40})->Unit(benchmark::kMillisecond);

template <bool kParallel>
void BM_SphereSampling(benchmark::State& state) {
  const CompiledPolynomial f(GenerateInstance({3, 6, 4}));
  const std::int64_t count = state.range(0);
  for (auto _ : state) {
    const auto lowest = kParallel ? LowestSphereSamplesParallel(f, 2, count, 8, 5)
                                  : LowestSphereSamples(f, 2, count, 8, 5);
    benchmark::DoNotOptimize(lowest.data());
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_SphereSampling<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SphereSampling<true>)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace polymin

BENCHMARK_MAIN();
