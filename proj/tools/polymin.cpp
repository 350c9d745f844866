// polymin: exact integer minimization of polynomials with positive definite
// leading form.
//
//   polymin gen --n 2 --d 4 --seed 7 --count 3
//   polymin radius examples.poly --p 6 --kmax 8
//   polymin underestimate f.poly --sigma-deg 2
//   polymin solve f.poly --strategy sls --json run.json
//   polymin bench --n 2 --d 4 --count 50 --strategy glob,sls,bf --csv out.csv

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymin/pipeline.hpp"

namespace {

using namespace polymin;

constexpr int kExitError = 1;
constexpr int kExitNotPsd = 2;
constexpr int kExitUndecided = 3;

struct InputArgs {
  std::string source;
  int num_vars = 0;  // 0 infers n from the text
};

Polynomial ReadInput(const InputArgs& in) {
  std::string text = in.source;
  if (std::filesystem::is_regular_file(in.source)) {
    std::ifstream file(in.source);
    std::stringstream buf;
    buf << file.rdbuf();
    text = buf.str();
  }
  const int n = in.num_vars > 0 ? in.num_vars : std::max(1, MaxVariableIndex(text));
  return ParsePolynomial(text, n);
}

void Emit(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

int ExitCode(Definiteness d) {
  switch (d) {
    case Definiteness::CertifiedPositive: return 0;
    case Definiteness::CertifiedNotPsd: return kExitNotPsd;
    case Definiteness::Undecided: return kExitUndecided;
  }
  return kExitError;
}

std::string Join(const std::vector<std::int64_t>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<Strategy> ParseStrategies(const std::vector<std::string>& names) {
  std::vector<Strategy> out;
  for (const std::string& name : names) out.push_back(ParseStrategy(name));
  return out;
}

void PrintNorm(const NormBoundReport& r) {
  std::printf("definiteness: %s\n", ToString(r.definite).c_str());
  std::printf("c:");
  for (double c : r.c.values()) std::printf(" %.6g", c + 0.0);
  std::printf("\n");
  if (r.radius) {
    std::printf("R = %.6g (box %lld)\n", *r.radius, static_cast<long long>(*r.box_radius));
  }
  if (r.marshall_radius) std::printf("R_lit = %.6g\n", *r.marshall_radius);
  if (r.witness) {
    std::printf("witness:");
    for (double x : *r.witness) std::printf(" %.6g", x);
    std::printf("\n");
  }
}

int CmdGen(int n, int d, std::uint64_t seed, int count, const std::string& json) {
  nlohmann::json all = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    const InstanceSpec spec{n, d, seed + static_cast<std::uint64_t>(i)};
    const Polynomial f = GenerateInstance(spec);
    if (json.empty()) {
      std::printf("# n=%d d=%d seed=%llu\n%s\n", n, d,
                  static_cast<unsigned long long>(spec.seed), FormatPolynomial(f).c_str());
    }
    all.push_back({{"n", n}, {"d", d}, {"seed", spec.seed}, {"f", FormatPolynomial(f)}});
  }
  Emit(json, {{"schema", "polymin.instances/1"}, {"instances", all}});
  return 0;
}

int CmdRadius(const InputArgs& in, int p, int k_max, const std::string& json) {
  const Polynomial f = ReadInput(in);
  try {
    const NormBoundReport r = ComputeNormBound(f, p, k_max);
    if (json != "-") PrintNorm(r);
    nlohmann::json j = ToJson(r);
    j["schema"] = "polymin.radius/1";
    Emit(json, j);
    return ExitCode(r.definite);
  } catch (const DegreeError& e) {
    Emit(json.empty() ? "-" : json,
         {{"schema", "polymin.error/1"}, {"error", "degree"}, {"message", e.what()}});
    return kExitUndecided;
  }
}

int CmdUnderestimate(const InputArgs& in, const PipelineOptions& opts,
                     const std::vector<std::int64_t>& z_point, const std::string& json) {
  const Polynomial f = ReadInput(in);
  const NormBoundReport nb = ComputeNormBound(f, opts.p, opts.k_max);
  if (nb.definite != Definiteness::CertifiedPositive) {
    PrintNorm(nb);
    return ExitCode(nb.definite);
  }
  const std::vector<double> h =
      ChooseH(f, {.radius = std::max(1.0, *nb.radius), .seed = opts.seed});
  if (!z_point.empty() && static_cast<int>(z_point.size()) != f.num_vars()) {
    throw std::invalid_argument("--z-point needs one coordinate per variable");
  }
  const std::vector<std::int64_t> zx = z_point.empty() ? RoundHalfAway(h) : z_point;
  const double z = Evaluate(f, std::span<const std::int64_t>(zx));
  UnderestOptions uo;
  uo.safety = opts.safety;
  const UnderestimateResult glob = SolveGlob(f, h, {}, uo);
  const UnderestimateResult sls = SolveSls(f, h, z, opts.sigma_degree, {}, uo);
  if (json != "-") {
    std::printf("h:");
    for (double x : h) std::printf(" %.9g", x);
    std::printf("\nglob bound %.9g (%s)\nsls  bound %.9g (%s, z = %.9g)\n", glob.value,
                std::string(ToString(glob.status)).c_str(), sls.value,
                std::string(ToString(sls.status)).c_str(), z);
  }
  Emit(json, {{"schema", "polymin.underestimate/1"},
              {"h", h},
              {"z", z},
              {"glob", ToJson(glob)},
              {"sls", ToJson(sls)}});
  return 0;
}

int CmdSolve(const InputArgs& in, const PipelineOptions& opts, const std::string& json) {
  const Polynomial f = ReadInput(in);
  RunRecord r;
  try {
    r = RunPipeline(f, opts, in.source);
  } catch (const DegreeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUndecided;
  }
  if (r.norm.definite != Definiteness::CertifiedPositive) {
    std::fprintf(stderr, "leading form: %s; not solving\n", ToString(r.norm.definite).c_str());
    Emit(json, ToJson(r));
    return ExitCode(r.norm.definite);
  }
  if (json != "-") {
    std::printf("R = %.6g\n", *r.norm.radius);
    for (const StrategyRun& run : r.runs) {
      std::printf("%-4s %-7s", std::string(ToString(run.strategy)).c_str(), run.status.c_str());
      if (run.result) {
        std::printf(" x* = %s  u = %.17g  nodes %lld  prunes %lld  g-evals %lld  %.3fs",
                    Join(run.result->x_star).c_str(), run.result->u,
                    static_cast<long long>(run.result->nodes_expanded),
                    static_cast<long long>(run.result->pruned),
                    static_cast<long long>(run.result->g_evals), run.result->elapsed);
      }
      if (!run.message.empty()) std::printf(" (%s)", run.message.c_str());
      std::printf("\n");
    }
  }
  Emit(json, ToJson(r));
  for (const StrategyRun& run : r.runs) {
    if (run.status != "ok") return kExitError;
  }
  return 0;
}

int CmdBench(const std::vector<int>& ns, const std::vector<int>& ds, int count,
             std::uint64_t seed, PipelineOptions opts, const std::string& csv,
             const std::string& json) {
  // Instances per (n, d): seeds seed, seed + 1, ... until `count` have a
  // certified positive definite leading form, giving up after 100 * count
  // seeds.
  for (int d : ds) {
    if (d < 2 || d % 2 != 0) throw std::invalid_argument("bench degrees must be even and >= 2");
  }
  for (int n : ns) {
    if (n < 1) throw std::invalid_argument("bench needs n >= 1");
  }
  std::vector<std::vector<RunRecord>> per_cell;
  for (int n : ns) {
    for (int d : ds) {
      std::vector<RunRecord> records;
      std::uint64_t next = seed;
      const std::uint64_t last = seed + 100 * static_cast<std::uint64_t>(count);
      while (static_cast<int>(records.size()) < count && next < last) {
        const int batch = count - static_cast<int>(records.size());
        std::vector<RunRecord> round(batch);
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < batch; ++i) {
          const InstanceSpec spec{n, d, next + static_cast<std::uint64_t>(i)};
          round[i] = RunPipeline(GenerateInstance(spec), opts, std::to_string(spec.seed), spec);
        }
        next += batch;
        for (RunRecord& r : round) {
          if (r.norm.definite == Definiteness::CertifiedPositive) records.push_back(std::move(r));
        }
      }
      per_cell.push_back(std::move(records));
    }
  }
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!csv.empty() && csv != "-") {
    file.open(csv);
    out = &file;
  }
  *out << BenchCsvHeader() << "\n";
  nlohmann::json all = nlohmann::json::array();
  for (const auto& cell : per_cell) {
    for (const RunRecord& r : cell) {
      for (const std::string& row : BenchCsvRows(r)) *out << row << "\n";
      if (!json.empty()) all.push_back(ToJson(r));
    }
  }
  Emit(json, {{"schema", "polymin.bench/1"}, {"records", all}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact integer minimization of polynomials with positive definite leading form"};
  app.require_subcommand(1);

  InputArgs in;
  PipelineOptions opts;
  std::string json, csv;
  std::vector<std::string> strategies;

  int gen_n = 2, gen_d = 4, gen_count = 1;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate seeded random instances");
  gen->add_option("--n", gen_n, "Number of variables")->check(CLI::PositiveNumber);
  gen->add_option("--d", gen_d, "Even degree");
  gen->add_option("--seed", gen_seed, "First seed");
  gen->add_option("--count", gen_count, "Number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--json", json, "Write JSON to this path ('-' for stdout)");

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("input", in.source, "Polynomial file or literal")->required();
    cmd->add_option("--n", in.num_vars, "Number of variables (default: inferred)");
    cmd->add_option("--p", opts.p, "Norm exponent")->check(CLI::PositiveNumber);
    cmd->add_option("--kmax", opts.k_max, "Largest sphere relaxation order (default d + 2)");
    cmd->add_option("--json", json, "Write JSON to this path ('-' for stdout)");
  };
  auto add_fit = [&](CLI::App* cmd) {
    cmd->add_option("--sigma-deg", opts.sigma_degree, "Degree of the SLS multiplier");
    cmd->add_option("--safety", opts.safety, "Margin subtracted from SOS bounds");
    cmd->add_option("--seed", opts.seed, "Seed of the choose_h multistart");
  };

  auto* radius = app.add_subcommand("radius", "Certify the leading form and bound minimizers");
  add_input(radius);
  auto* under = app.add_subcommand("underestimate", "Fit GLOB and SLS underestimators");
  add_input(under);
  add_fit(under);
  std::vector<std::int64_t> z_point;
  under->add_option("--z-point", z_point, "Integer point whose value is the SLS level z")
      ->delimiter(',');
  auto* solve = app.add_subcommand("solve", "Run the full pipeline and branch and bound");
  add_input(solve);
  add_fit(solve);
  solve->add_option("--strategy", strategies, "glob, sls, cr or bf (repeatable)")
      ->delimiter(',');
  solve->add_option("--time-limit", opts.time_limit, "Seconds per strategy");

  std::vector<int> bench_n = {2}, bench_d = {4};
  int bench_count = 50;
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "Benchmark strategies on random instances");
  bench->add_option("--n", bench_n, "Numbers of variables")->delimiter(',');
  bench->add_option("--d", bench_d, "Even degrees")->delimiter(',');
  bench->add_option("--count", bench_count, "Certified instances per (n, d)");
  bench->add_option("--seed", bench_seed, "First instance seed");
  bench->add_option("--p", opts.p, "Norm exponent");
  bench->add_option("--kmax", opts.k_max, "Largest sphere relaxation order");
  bench->add_option("--strategy", strategies, "Strategies (default glob,sls,bf)")
      ->delimiter(',');
  bench->add_option("--sigma-deg", opts.sigma_degree, "Degree of the SLS multiplier");
  bench->add_option("--safety", opts.safety, "Margin subtracted from SOS bounds");
  bench->add_option("--time-limit", opts.time_limit, "Seconds per strategy and instance");
  bench->add_option("--csv", csv, "Write CSV to this path (default stdout)");
  bench->add_option("--json", json, "Also write every run record as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!strategies.empty()) opts.strategies = ParseStrategies(strategies);
    if (*gen) return CmdGen(gen_n, gen_d, gen_seed, gen_count, json);
    if (*radius) return CmdRadius(in, opts.p, opts.k_max, json);
    if (*under) return CmdUnderestimate(in, opts, z_point, json);
    if (*solve) return CmdSolve(in, opts, json);
    if (*bench) {
      if (strategies.empty()) {
        opts.strategies = {Strategy::UnderestimatorGlob, Strategy::UnderestimatorSls,
                           Strategy::BruteForce};
      }
      return CmdBench(bench_n, bench_d, bench_count, bench_seed, opts, csv, json);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
