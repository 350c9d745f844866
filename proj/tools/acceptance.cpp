// Acceptance checks: prints one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "polymin/pipeline.hpp"

namespace polymin {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::string Join(const std::vector<double>& v, const char* format = "%.4g") {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + Fmt(format, v[i] + 0.0);
  return s + ")";
}

std::string Join(const std::vector<std::int64_t>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Failed expectations and informational notes of one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (ok) return;
    std::lock_guard lock(mutex_);
    if (failures_.size() < 4) failures_.push_back(what);
    ++failed_;
  }
  void Note(const std::string& note) {
    std::lock_guard lock(mutex_);
    notes_.push_back(note);
  }
  bool passed() const { return failed_ == 0; }
  std::string Summary() const {
    std::string s;
    for (const std::string& n : notes_) s += (s.empty() ? "" : "; ") + n;
    if (failed_ > 0) {
      s += Fmt("%s%d failed:", s.empty() ? "" : "; ", failed_);
      for (const std::string& f : failures_) s += " [" + f + "]";
    }
    return s;
  }

 private:
  std::mutex mutex_;
  int failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

Polynomial ReadFixture(const std::string& dir, const std::string& name, int num_vars) {
  std::ifstream file(dir + "/" + name);
  if (!file) throw std::runtime_error("cannot open fixture " + dir + "/" + name);
  std::stringstream text;
  text << file.rdbuf();
  return ParsePolynomial(text.str(), num_vars);
}

// The first `count` instances of shape (n, d), by increasing seed, whose
// leading form is certified positive definite; gives up after `max_seeds`
// seeds or `max_seconds`. Reports are computed with p = 2.
struct CertifiedInstance {
  InstanceSpec spec;
  Polynomial f;
  NormBoundReport report;
};

std::vector<CertifiedInstance> FirstCertified(int n, int d, int count, std::uint64_t first_seed,
                                              int max_seeds, double max_seconds,
                                              const NormBoundOptions& options = {}) {
  const auto start = Clock::now();
  std::vector<CertifiedInstance> out;
  std::uint64_t next = first_seed;
  const std::uint64_t last = first_seed + static_cast<std::uint64_t>(max_seeds);
  while (static_cast<int>(out.size()) < count && next < last && Seconds(start) < max_seconds) {
    const int batch = static_cast<int>(
        std::min<std::uint64_t>(last - next, static_cast<std::uint64_t>(count - out.size())));
    std::vector<std::optional<CertifiedInstance>> round(batch);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < batch; ++i) {
      const InstanceSpec spec{n, d, next + static_cast<std::uint64_t>(i)};
      Polynomial f = GenerateInstance(spec);
      NormBoundReport r = ComputeNormBound(f, 2, 0, options);
      if (r.definite == Definiteness::CertifiedPositive) {
        round[i] = CertifiedInstance{spec, std::move(f), std::move(r)};
      }
    }
    next += static_cast<std::uint64_t>(batch);
    for (auto& c : round) {
      if (c && static_cast<int>(out.size()) < count) out.push_back(std::move(*c));
    }
  }
  return out;
}

// Weak duality and PSD feasibility of every SDP solve it observes.
class SdpAudit {
 public:
  SdpOptions Attach(SdpOptions options) {
    options.observer = [this](const SdpProblem& p, const SdpSolution& s) { Observe(p, s); };
    return options;
  }

  std::string Summary() const {
    return Fmt("%d SDP solves audited (%d optimal, %d without iterates): %d weak duality and "
               "%d PSD violations",
               solves_, optimal_, empty_, duality_violations_, psd_violations_);
  }
  bool passed() const {
    return solves_ > 0 && duality_violations_ == 0 && psd_violations_ == 0;
  }

 private:
  static double MinEigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  }

  // With F(y) = F_0 + sum y_i F_i and r_i = sum_k tr(F_ki X_k) + b_i,
  // tr(F_0 X) - b^T y = tr(F(y) X) - y^T r for any X, hence for X >= 0
  //   b^T y - tr(F_0 X) <= max(0, -lambda_min(F(y))) tr(X) + |y^T r|.
  void Observe(const SdpProblem& problem, const SdpSolution& sol) {
    const std::size_t nb = problem.blocks.size();
    bool duality_ok = true, psd_ok = true, empty = false;
    if (sol.dual_matrices.size() != nb || sol.y.size() != problem.num_vars) {
      empty = true;
    } else {
      Eigen::VectorXd r = problem.objective;
      double f0x = 0.0, slack = 0.0, scale = 1.0;
      for (std::size_t k = 0; k < nb; ++k) {
        const LmiBlock& b = problem.blocks[k];
        const Eigen::MatrixXd& x = sol.dual_matrices[k];
        Eigen::MatrixXd fy = b.constant.ToDense();
        f0x += (fy.cwiseProduct(x)).sum();
        for (const auto& [var, mat] : b.coefficients) {
          const Eigen::MatrixXd fi = mat.ToDense();
          r[var] += fi.cwiseProduct(x).sum();
          fy += sol.y[var] * fi;
        }
        const double x_min = MinEigenvalue(x);
        if (x_min < -1e-10 * (1.0 + x.norm())) psd_ok = false;
        const double f_min = MinEigenvalue(fy);
        slack += std::max(0.0, -f_min) * x.trace();
        scale += fy.norm() * x.norm();
        if (sol.status == SdpStatus::Optimal && f_min < -(1e-8 + 1e-12 * fy.norm())) {
          psd_ok = false;
        }
      }
      const double bty = problem.objective.dot(sol.y);
      slack += std::abs(sol.y.dot(r));
      duality_ok = bty - f0x <= slack + 1e-9 * (scale + std::abs(bty) + std::abs(f0x));
    }
    std::lock_guard lock(mutex_);
    ++solves_;
    if (sol.status == SdpStatus::Optimal) ++optimal_;
    if (empty) ++empty_;
    if (!duality_ok) ++duality_violations_;
    if (!psd_ok) ++psd_violations_;
  }

  std::mutex mutex_;
  int solves_ = 0, optimal_ = 0, empty_ = 0;
  int duality_violations_ = 0, psd_violations_ = 0;
};

struct Outcome {
  bool passed = false;
  std::string summary;
};

Outcome Finish(const Check& check) { return {check.passed(), check.Summary()}; }

// Diophantine worked example.
Outcome Criterion1(const std::string& fixtures) {
  const auto start = Clock::now();
  Check check;
  PipelineOptions opts;
  opts.p = 6;
  opts.k_max = 8;
  opts.strategies = {Strategy::UnderestimatorSls};
  const RunRecord r =
      RunPipeline(ReadFixture(fixtures, "diophantine.poly", 2), opts, "diophantine");
  const std::vector<double> expected = {-60.49, -13.03, -41.76, -7.85, -24.45, 2.59};
  check.Expect(r.norm.c.size() == expected.size(), "c has 6 entries");
  for (std::size_t j = 0; j < std::min(expected.size(), r.norm.c.size()); ++j) {
    check.Expect(std::abs(r.norm.c[j] - expected[j]) <= 0.5,
                 Fmt("c_%zu = %.4f, expected %.2f", j + 1, r.norm.c[j], expected[j]));
  }
  check.Expect(r.norm.radius && *r.norm.radius >= 9.4 && *r.norm.radius <= 10.4,
               Fmt("R = %.4f", r.norm.radius.value_or(-1.0)));
  check.Expect(r.runs.size() == 1 && r.runs[0].status == "ok", "sls run ok");
  check.Expect(r.u && *r.u == 0.0, Fmt("u = %.17g", r.u.value_or(NAN)));
  check.Expect(r.x_star && *r.x_star == std::vector<std::int64_t>{-1, 1}, "x* = (-1, 1)");
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 60.0, Fmt("runtime %.1f s > 60 s", elapsed));
  check.Note("c = " + Join(r.norm.c, "%.2f") + Fmt(", R = %.3f", r.norm.radius.value_or(NAN)));
  if (r.x_star && r.u) check.Note("x* = " + Join(*r.x_star) + Fmt(", u = %.17g", *r.u));
  return Finish(check);
}

// Variety example.
Outcome Criterion2(const std::string& fixtures) {
  const auto start = Clock::now();
  Check check;
  const NormBoundReport r = ComputeNormBound(ReadFixture(fixtures, "variety.poly", 3), 2);
  const std::vector<double> c = r.c.values();
  const std::vector<double> expected = {0.0, -2.0, -0.77, 1.0};
  check.Expect(c.size() == expected.size(), "c has 4 entries");
  for (std::size_t j = 0; j < std::min(expected.size(), c.size()); ++j) {
    check.Expect(std::abs(c[j] - expected[j]) <= 0.05,
                 Fmt("c_%zu = %.4f, expected %.2f", j + 1, c[j], expected[j]));
  }
  check.Expect(r.radius && *r.radius >= 1.76 && *r.radius <= 1.96,
               Fmt("R = %.4f", r.radius.value_or(-1.0)));
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 30.0, Fmt("runtime %.1f s > 30 s", elapsed));
  check.Note("c = " + Join(c, "%.3f") + Fmt(", R = %.3f", r.radius.value_or(NAN)));
  return Finish(check);
}

// Univariate example.
Outcome Criterion3(const std::string& fixtures) {
  const auto start = Clock::now();
  Check check;
  const Polynomial f = ReadFixture(fixtures, "univariate.poly", 1);
  const NormBoundReport nb = ComputeNormBound(f, 2);
  check.Expect(nb.definite == Definiteness::CertifiedPositive, "leading form certified");
  const std::vector<double> h = ChooseH(f, {.radius = std::max(1.0, nb.radius.value_or(1.0))});
  check.Expect(h.size() == 1 && std::abs(h[0] - 0.3) <= 1e-3, Fmt("h = %.6f", h.at(0)));
  const std::vector<std::int64_t> origin = {0};
  const double f0 = Evaluate(f, std::span<const std::int64_t>(origin));
  const UnderestimateResult glob = SolveGlob(f, h);
  const UnderestimateResult sls = SolveSls(f, h, f0, 2);
  check.Expect(glob.usable() && std::abs(glob.value - 0.07) <= 0.02,
               Fmt("glob bound %.4f", glob.value));
  check.Expect(sls.usable() && std::abs(sls.value - 2.84) <= 0.05,
               Fmt("sls bound %.4f", sls.value));

  PipelineOptions opts;
  opts.strategies = {Strategy::UnderestimatorGlob, Strategy::UnderestimatorSls,
                     Strategy::ContinuousRelaxation, Strategy::BruteForce};
  const RunRecord r = RunPipeline(f, opts, "univariate");
  check.Expect(r.runs.size() == 4, "four strategy runs");
  for (const StrategyRun& run : r.runs) {
    const std::string name(ToString(run.strategy));
    check.Expect(run.status == "ok" && run.result, name + " run ok");
    if (!run.result) continue;
    check.Expect(run.result->x_star == origin, name + " x* = " + Join(run.result->x_star));
    check.Expect(std::abs(run.result->u - f0) <= 1e-9, name + Fmt(" u = %.17g", run.result->u));
  }
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 30.0, Fmt("runtime %.1f s > 30 s", elapsed));
  check.Note(Fmt("h = %.6f, glob %.4f, sls %.4f, x* = 0, u = %.7f", h.at(0), glob.value,
                 sls.value, f0));
  return Finish(check);
}

// Radius dominance over random instances.
Outcome Criterion4() {
  const auto start = Clock::now();
  Check check;
  for (const auto& [n, d] : {std::pair{2, 2}, {2, 4}, {3, 4}, {2, 10}}) {
    const auto cell = FirstCertified(n, d, 200, 0, 200 * 50, 600.0);
    check.Expect(cell.size() == 200, Fmt("(%d,%d): only %zu certified instances", n, d,
                                         cell.size()));
    std::vector<double> ratios;
    for (const auto& in : cell) {
      const double r = in.report.radius.value_or(INFINITY);
      const double lit = in.report.marshall_radius.value_or(-INFINITY);
      check.Expect(r <= lit, Fmt("(%d,%d) seed %llu: R = %.6g > R_lit = %.6g", n, d,
                                 static_cast<unsigned long long>(in.spec.seed), r, lit));
      ratios.push_back(lit / r);
    }
    check.Note(Fmt("(%d,%d): %zu instances, median R_lit/R %.3g", n, d, cell.size(),
                   Median(ratios)));
  }
  // (3, 8): ordering asserted strictly, magnitude logged as a soft check.
  const auto cell = FirstCertified(3, 8, 20, 0, 4000, 600.0);
  std::vector<double> ratios;
  for (const auto& in : cell) {
    const double r = in.report.radius.value_or(INFINITY);
    const double lit = in.report.marshall_radius.value_or(-INFINITY);
    check.Expect(r <= lit, Fmt("(3,8) seed %llu: R = %.6g > R_lit = %.6g",
                               static_cast<unsigned long long>(in.spec.seed), r, lit));
    ratios.push_back(lit / r);
  }
  const double median = Median(ratios);
  check.Note(Fmt("(3,8): %zu instances, median R_lit/R %.3g (soft check >= 10: %s)",
                 cell.size(), median, cell.empty() ? "not run" : median >= 10 ? "met" : "missed"));
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 1800.0, Fmt("runtime %.1f s > 30 min", elapsed));
  return Finish(check);
}

// Oracle equivalence of glob, sls and cr with brute force.
Outcome Criterion5() {
  const auto start = Clock::now();
  Check check;
  PipelineOptions opts;
  opts.strategies = {Strategy::UnderestimatorGlob, Strategy::UnderestimatorSls,
                     Strategy::ContinuousRelaxation, Strategy::BruteForce};
  // Brute force is the oracle here, so it may enumerate large balls.
  opts.lattice_cap = 1'000'000'000;
  for (const auto& [n, d, count] : {std::tuple{2, 4, 50}, {3, 2, 20}}) {
    const auto cell = FirstCertified(n, d, count, 0, count * 50, 600.0);
    check.Expect(static_cast<int>(cell.size()) == count,
                 Fmt("(%d,%d): only %zu certified instances", n, d, cell.size()));
    std::vector<RunRecord> records(cell.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < cell.size(); ++i) {
      records[i] = RunPipeline(cell[i].f, opts, std::to_string(cell[i].spec.seed), cell[i].spec);
    }
    int agreeing = 0;
    for (const RunRecord& r : records) {
      const StrategyRun& bf = r.runs.back();
      bool all = bf.status == "ok";
      check.Expect(bf.status == "ok", "bf failed on seed " + r.id + ": " + bf.message);
      for (std::size_t s = 0; s + 1 < r.runs.size() && bf.result; ++s) {
        const StrategyRun& run = r.runs[s];
        const bool same = run.status == "ok" && run.result && run.result->u == bf.result->u;
        all = all && same;
        check.Expect(same, Fmt("%s on (%d,%d) seed %s: %s u = %.17g vs bf %.17g",
                               std::string(ToString(run.strategy)).c_str(), n, d,
                               r.id.c_str(), run.status.c_str(),
                               run.result ? run.result->u : NAN, bf.result->u));
      }
      agreeing += all;
    }
    check.Note(Fmt("(%d,%d): %d/%zu instances with glob = sls = cr = bf", n, d, agreeing,
                   records.size()));
  }
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 1200.0, Fmt("runtime %.1f s > 20 min", elapsed));
  return Finish(check);
}

Polynomial Component(const Polynomial& f, int j) {
  for (const auto& c : HomogeneousComponents(f)) {
    if (c.degree == j) return c.poly;
  }
  return Polynomial(f.num_vars());
}

// Property suites.
Outcome Criterion6() {
  const auto start = Clock::now();
  Check check;
  SdpAudit audit;
  const SdpOptions sdp = audit.Attach({});
  NormBoundOptions nbo;
  nbo.sdp = sdp;

  Xoshiro256 rng(6);

  // c_j soundness against 10^5 sphere samples.
  int cj_checked = 0;
  std::vector<std::vector<double>> c_vectors;
  for (const auto& [n, d, p] : {std::tuple{2, 4, 2}, {2, 4, 4}, {3, 4, 2}, {2, 6, 2}}) {
    for (std::uint64_t seed = 100; seed < 103; ++seed) {
      const Polynomial f = GenerateInstance({n, d, seed});
      const CjVector c = BestCj(f, p, std::max(d, p) + 2, sdp);
      for (int j = 1; j <= d; ++j) {
        const Polynomial fj = Component(f, j);
        if (fj.is_zero()) continue;
        const auto lowest = LowestSphereSamplesParallel(CompiledPolynomial(fj), p, 100000, 1,
                                                        seed * 16 + static_cast<unsigned>(j));
        check.Expect(!lowest.empty() && lowest[0].value >= c[j] - 1e-6,
                     Fmt("(%d,%d) p=%d seed %llu: c_%d = %.9g above sampled min %.9g", n, d, p,
                         static_cast<unsigned long long>(seed), j, c[j],
                         lowest.empty() ? NAN : lowest[0].value));
        ++cj_checked;
      }
      if (p == 2 && c[d] > 0.0) c_vectors.push_back(c.values());
    }
  }
  check.Note(Fmt("%d c_j checked against 1e5 sphere samples", cj_checked));

  // Underestimators: sampling, Sls dominance, then branch and bound with
  // pruning re-expansion and the binary-search budget.
  std::vector<CertifiedInstance> instances = FirstCertified(2, 4, 5, 300, 250, 120.0, nbo);
  for (auto& in : FirstCertified(3, 2, 5, 300, 250, 120.0, nbo)) instances.push_back(in);
  check.Expect(instances.size() == 10, Fmt("only %zu property instances", instances.size()));

  // The radius cannot grow when any c_j improves.
  for (const CertifiedInstance& in : instances) c_vectors.push_back(in.report.c.values());
  int improvements = 0;
  for (const std::vector<double>& c : c_vectors) {
    const double r0 = LargestNonnegRoot(c);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> better = c;
      for (double& cj : better) {
        if (rng.Uniform01() < 0.5) cj += rng.Uniform01() * (1.0 + std::abs(cj));
      }
      const double r1 = LargestNonnegRoot(better);
      check.Expect(r1 <= r0 * (1.0 + 1e-9) + 1e-12,
                   Fmt("radius grew from %.9g to %.9g", r0, r1));
      ++improvements;
    }
  }
  check.Expect(improvements > 0, "no c-vector to improve");
  check.Note(Fmt("radius monotone over %d improved c-vectors", improvements));

  int samples = 0, sublevel_samples = 0, pruned_checked = 0;
  std::int64_t budget_exceeded = 0;
  UnderestOptions uo;
  uo.sdp = sdp;
  BnbOptions bo;
  bo.sdp = sdp;
  bo.record_pruned = true;
  for (const CertifiedInstance& in : instances) {
    const Polynomial& f = in.f;
    const int n = f.num_vars();
    const std::string tag = Fmt("(%d,%d) seed %llu", n, in.spec.degree,
                                static_cast<unsigned long long>(in.spec.seed));
    const double radius = std::max(1.0, *in.report.radius);
    const std::vector<double> h = ChooseH(f, {.radius = radius});
    const std::vector<std::int64_t> rh = RoundHalfAway(h);
    const double z = Evaluate(f, std::span<const std::int64_t>(rh));
    const UnderestimateResult glob = SolveGlob(f, h, {}, uo);
    const UnderestimateResult sls = SolveSls(f, h, z, 2, {}, uo);
    check.Expect(glob.usable(), tag + " glob not usable");
    check.Expect(sls.usable(), tag + " sls not usable");
    check.Expect(sls.value >= glob.value - 10 * sdp.gap_tol * (1.0 + std::abs(glob.value)),
                 tag + Fmt(" sls %.12g below glob %.12g", sls.value, glob.value));

    for (int t = 0; t < 20000; ++t) {
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) {
        x[i] = t % 2 ? radius * rng.UniformSigned() : h[i] + rng.Normal();
      }
      const double fx = Evaluate(f, x);
      const double tol = 1e-6 * (1.0 + std::abs(fx));
      check.Expect(EvalG(glob.g, x) <= fx + tol, tag + Fmt(" glob exceeds f by %.3g",
                                                           EvalG(glob.g, x) - fx));
      if (fx <= z) {
        check.Expect(EvalG(sls.g, x) <= fx + tol, tag + Fmt(" sls exceeds f by %.3g",
                                                            EvalG(sls.g, x) - fx));
        ++sublevel_samples;
      }
      ++samples;
    }

    std::vector<BnbResult> runs;
    if (glob.usable()) runs.push_back(Minimize(f, *in.report.radius, 2, glob.g, bo));
    if (sls.usable()) runs.push_back(Minimize(f, *in.report.radius, 2, sls.g, bo));
    runs.push_back(MinimizeContinuousRelaxation(f, h, *in.report.radius, 2, bo));
    for (const BnbResult& r : runs) {
      budget_exceeded += r.budget_exceeded;
      for (const PrunedNode& node : r.pruned_nodes) {
        const double used = PowerSum(node.prefix, 2);
        if (LatticeLimit(*in.report.radius, 2, used) < 0) continue;
        const double sub_radius =
            std::sqrt(std::max(0.0, *in.report.radius * *in.report.radius - used));
        const BnbResult sub = BruteForce(FixPrefix(f, node.prefix), sub_radius + 1e-9, 2);
        check.Expect(sub.u >= node.incumbent - bo.safety,
                     tag + " " + std::string(ToString(r.strategy)) + " pruned prefix " +
                         Join(node.prefix) + Fmt(" holds %.17g < %.17g", sub.u, node.incumbent));
        ++pruned_checked;
      }
    }
  }
  check.Expect(budget_exceeded == 0, Fmt("%lld slices over the evaluation budget",
                                         static_cast<long long>(budget_exceeded)));
  check.Note(Fmt("%d underestimator samples (%d in sublevel sets), %d pruned subtrees "
                 "re-expanded",
                 samples, sublevel_samples, pruned_checked));

  // Binary search within ceil(log2 L) + 2 evaluations per endpoint on
  // synthetic unimodal slices.
  int searches = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const auto limit = static_cast<std::int64_t>(rng.Next() % 100001) >> (trial % 17);
    const double h = rng.UniformSigned() * static_cast<double>(limit + 3);
    const double a = rng.Uniform01(), b = 1e-3 * rng.Uniform01();
    const auto slice = [&](std::int64_t t) {
      const double s = (static_cast<double>(t) - h) * (static_cast<double>(t) - h);
      return a * s + b * s * s;
    };
    const double u = rng.Uniform01() * a * static_cast<double>((limit + 1) * (limit + 1));
    const PruneInterval pi = FindPruneInterval(slice, h, limit, u);
    if (limit > 0) {
      check.Expect(pi.lower_evals <= EndpointBudget(limit) &&
                       pi.upper_evals <= EndpointBudget(limit),
                   Fmt("L = %lld: %d and %d evaluations", static_cast<long long>(limit),
                       pi.lower_evals, pi.upper_evals));
    }
    if (pi.range) {
      check.Expect(slice(pi.range->first) <= u && slice(pi.range->second) <= u &&
                       (pi.range->first == -limit || slice(pi.range->first - 1) > u) &&
                       (pi.range->second == limit || slice(pi.range->second + 1) > u),
                   Fmt("L = %lld: wrong interval", static_cast<long long>(limit)));
    }
    ++searches;
  }
  check.Note(Fmt("%d synthetic binary searches", searches));

  check.Expect(audit.passed(), audit.Summary());
  check.Note(audit.Summary());
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 300.0, Fmt("runtime %.1f s > 5 min", elapsed));
  return Finish(check);
}

// Certified fraction against degree.
Outcome Criterion7() {
  const auto start = Clock::now();
  Check check;
  for (int n : {2, 3}) {
    std::map<int, double> fraction;
    for (int d : {2, 4, 6}) {
      std::vector<char> certified(300, 0);
#pragma omp parallel for schedule(dynamic, 4)
      for (int s = 0; s < 300; ++s) {
        const Polynomial f = GenerateInstance({n, d, static_cast<std::uint64_t>(s)});
        certified[s] = ComputeNormBound(f, 2).definite == Definiteness::CertifiedPositive;
      }
      fraction[d] = std::count(certified.begin(), certified.end(), 1) / 300.0;
    }
    check.Expect(fraction[2] >= fraction[4] && fraction[4] >= fraction[6],
                 Fmt("n = %d not non-increasing", n));
    check.Note(Fmt("n = %d: certified %.3f, %.3f, %.3f at d = 2, 4, 6", n, fraction[2],
                   fraction[4], fraction[6]));
  }
  const double elapsed = Seconds(start);
  check.Expect(elapsed <= 900.0, Fmt("runtime %.1f s > 15 min", elapsed));
  return Finish(check);
}

}  // namespace
}  // namespace polymin

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for polymin"};
  std::vector<int> only;
  std::string fixtures = POLYMIN_FIXTURE_DIR;
  app.add_option("--only", only, "Criteria to run (default: all)")
      ->delimiter(',')
      ->check(CLI::Range(1, 7));
  app.add_option("--fixtures", fixtures, "Directory holding the example .poly files");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7};

  using namespace polymin;
  const std::vector<std::function<Outcome()>> criteria = {
      [&] { return Criterion1(fixtures); }, [&] { return Criterion2(fixtures); },
      [&] { return Criterion3(fixtures); }, Criterion4, Criterion5, Criterion6, Criterion7};
  bool all = true;
  for (int id : only) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = criteria[id - 1]();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    all = all && outcome.passed;
    std::printf("criterion %d: %s (%.1f s) %s\n", id, outcome.passed ? "PASS" : "FAIL",
                Seconds(start), outcome.summary.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
