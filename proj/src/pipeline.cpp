#include "polymin/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace polymin {

SdpStatus ParseSdpStatus(std::string_view name) {
  for (SdpStatus s : {SdpStatus::Optimal, SdpStatus::Infeasible, SdpStatus::Unbounded,
                      SdpStatus::NumericalFailure, SdpStatus::IterationLimit}) {
    if (ToString(s) == name) return s;
  }
  throw std::invalid_argument("unknown solver status '" + std::string(name) + "'");
}

Definiteness ParseDefiniteness(std::string_view name) {
  for (Definiteness d : {Definiteness::CertifiedPositive, Definiteness::CertifiedNotPsd,
                         Definiteness::Undecided}) {
    if (ToString(d) == name) return d;
  }
  throw std::invalid_argument("unknown definiteness '" + std::string(name) + "'");
}

NormSummary Summarize(const NormBoundReport& report) {
  NormSummary s;
  s.definite = report.definite;
  s.certify_level = report.certify_level;
  s.level = report.level;
  s.c = report.c.values();
  s.radius = report.radius;
  s.marshall_radius = report.marshall_radius;
  s.box_radius = report.box_radius;
  s.witness = report.witness;
  return s;
}

namespace {

BoundSummary Summarize(const UnderestimateResult& r) {
  BoundSummary s;
  s.g = r.g;
  s.value = r.value;
  s.lower_bound = r.lower_bound;
  s.status = r.status;
  s.certified = r.certified;
  s.certificate_residual = r.certificate_residual;
  return s;
}

StrategyRun RunStrategy(Strategy strategy, const Polynomial& f, double radius,
                        const std::vector<double>& h, const RunRecord& rec,
                        const PipelineOptions& options) {
  StrategyRun run;
  run.strategy = strategy;
  BnbOptions bnb;
  bnb.safety = options.safety;
  bnb.time_limit = options.time_limit;
  bnb.sdp = options.sdp;
  bnb.lattice_cap = options.lattice_cap;
  try {
    switch (strategy) {
      case Strategy::UnderestimatorGlob:
      case Strategy::UnderestimatorSls: {
        const auto& bound = strategy == Strategy::UnderestimatorGlob ? rec.glob : rec.sls;
        run.root_bound = bound->value;
        if (!bound->certified && bound->status != SdpStatus::Optimal) {
          run.status = "failed";
          run.message = "underestimator solve returned " + std::string(ToString(bound->status));
          return run;
        }
        run.result = Minimize(f, radius, options.p, bound->g, bnb);
        break;
      }
      case Strategy::ContinuousRelaxation:
        try {
          run.root_bound = ContinuousRelaxationBound(f, {}, options.sdp);
        } catch (const std::runtime_error&) {
        }
        run.result = MinimizeContinuousRelaxation(f, h, radius, options.p, bnb);
        break;
      case Strategy::BruteForce:
        run.result = BruteForce(f, radius, options.p, bnb);
        break;
    }
  } catch (const std::exception& e) {
    run.status = "failed";
    run.message = e.what();
    return run;
  }
  run.status = run.result->timed_out ? "timeout" : "ok";
  return run;
}

}  // namespace

RunRecord RunPipeline(const Polynomial& f, const PipelineOptions& options, std::string id,
                      std::optional<InstanceSpec> spec) {
  RunRecord rec;
  rec.id = std::move(id);
  rec.spec = spec;
  rec.f = f;
  rec.p = options.p;
  NormBoundOptions nbo;
  nbo.sdp = options.sdp;
  const NormBoundReport nb = ComputeNormBound(f, options.p, options.k_max, nbo);
  rec.norm = Summarize(nb);
  if (nb.definite != Definiteness::CertifiedPositive) return rec;

  const double radius = *nb.radius;
  rec.h = ChooseH(f, {.radius = std::max(1.0, radius), .seed = options.seed});
  const std::vector<std::int64_t> rh = RoundHalfAway(rec.h);
  const double z = Evaluate(f, std::span<const std::int64_t>(rh));
  UnderestOptions uo;
  uo.sdp = options.sdp;
  uo.safety = options.safety;
  rec.glob = Summarize(SolveGlob(f, rec.h, {}, uo));
  rec.sls = Summarize(SolveSls(f, rec.h, z, options.sigma_degree, {}, uo));

  for (Strategy s : options.strategies) {
    rec.runs.push_back(RunStrategy(s, f, radius, rec.h, rec, options));
  }
  // The minimizer comes from brute force when it ran, else from the first
  // run that finished.
  const StrategyRun* best = nullptr;
  for (const StrategyRun& run : rec.runs) {
    if (run.status != "ok") continue;
    if (best == nullptr || run.strategy == Strategy::BruteForce) best = &run;
  }
  if (best != nullptr) {
    rec.x_star = best->result->x_star;
    rec.u = best->result->u;
    const std::span<const std::int64_t> xs(*rec.x_star);
    rec.glob->quality = QualityRatio(f, rec.h, rec.glob->value, xs);
    rec.sls->quality = QualityRatio(f, rec.h, rec.sls->value, xs);
    for (StrategyRun& run : rec.runs) {
      if (run.root_bound) run.quality = QualityRatio(f, rec.h, *run.root_bound, xs);
    }
  }
  return rec;
}

namespace {

template <typename T>
nlohmann::json Opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> GetOpt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Quality QualityFromJson(const nlohmann::json& j) {
  Quality q;
  q.value = j.at("value").get<double>();
  q.raw = j.at("raw").get<double>();
  q.clamped = j.at("clamped").get<bool>();
  q.exact = j.at("exact").get<bool>();
  return q;
}

nlohmann::json OptQuality(const std::optional<Quality>& q) {
  return q ? ToJson(*q) : nlohmann::json(nullptr);
}

std::optional<Quality> GetQuality(const nlohmann::json& j) {
  if (!j.contains("quality") || j.at("quality").is_null()) return std::nullopt;
  return QualityFromJson(j.at("quality"));
}

nlohmann::json ToJson(const BoundSummary& b) {
  return {{"g", ToJson(b.g)},
          {"value", b.value},
          {"lower_bound", b.lower_bound},
          {"status", ToString(b.status)},
          {"certified", b.certified},
          {"certificate_residual", b.certificate_residual},
          {"quality", OptQuality(b.quality)}};
}

BoundSummary BoundFromJson(const nlohmann::json& j) {
  BoundSummary b;
  b.g = UnderestimatorFromJson(j.at("g"));
  b.value = j.at("value").get<double>();
  b.lower_bound = j.at("lower_bound").get<double>();
  b.status = ParseSdpStatus(j.at("status").get<std::string>());
  b.certified = j.at("certified").get<bool>();
  b.certificate_residual = j.at("certificate_residual").get<double>();
  b.quality = GetQuality(j);
  return b;
}

}  // namespace

nlohmann::json ToJson(const Quality& q) {
  return {{"value", q.value}, {"raw", q.raw}, {"clamped", q.clamped}, {"exact", q.exact}};
}

nlohmann::json ToJson(const RunRecord& r) {
  nlohmann::json spec = nullptr;
  if (r.spec) spec = {{"n", r.spec->num_vars}, {"d", r.spec->degree}, {"seed", r.spec->seed}};
  nlohmann::json norm = {{"definite", ToString(r.norm.definite)},
                         {"certify_level", r.norm.certify_level},
                         {"level", r.norm.level},
                         {"c", r.norm.c},
                         {"R", Opt(r.norm.radius)},
                         {"R_lit", Opt(r.norm.marshall_radius)},
                         {"box_radius", Opt(r.norm.box_radius)},
                         {"witness", Opt(r.norm.witness)}};
  nlohmann::json runs = nlohmann::json::array();
  for (const StrategyRun& run : r.runs) {
    runs.push_back({{"strategy", ToString(run.strategy)},
                    {"status", run.status},
                    {"message", run.message},
                    {"root_bound", Opt(run.root_bound)},
                    {"quality", OptQuality(run.quality)},
                    {"result", run.result ? ToJson(*run.result) : nlohmann::json(nullptr)}});
  }
  return {{"schema", "polymin.run/1"},
          {"id", r.id},
          {"spec", spec},
          {"f", FormatPolynomial(r.f)},
          {"n", r.f.num_vars()},
          {"p", r.p},
          {"norm", norm},
          {"h", r.h},
          {"glob", r.glob ? ToJson(*r.glob) : nlohmann::json(nullptr)},
          {"sls", r.sls ? ToJson(*r.sls) : nlohmann::json(nullptr)},
          {"runs", runs},
          {"x_star", Opt(r.x_star)},
          {"u", Opt(r.u)}};
}

RunRecord RunRecordFromJson(const nlohmann::json& j) {
  if (j.value("schema", "") != "polymin.run/1") {
    throw std::invalid_argument("run record: unsupported schema");
  }
  RunRecord r;
  r.id = j.at("id").get<std::string>();
  if (!j.at("spec").is_null()) {
    const auto& s = j.at("spec");
    r.spec = InstanceSpec{s.at("n").get<int>(), s.at("d").get<int>(),
                          s.at("seed").get<std::uint64_t>()};
  }
  r.f = ParsePolynomial(j.at("f").get<std::string>(), j.at("n").get<int>());
  r.p = j.at("p").get<int>();
  const auto& norm = j.at("norm");
  r.norm.definite = ParseDefiniteness(norm.at("definite").get<std::string>());
  r.norm.certify_level = norm.at("certify_level").get<int>();
  r.norm.level = norm.at("level").get<int>();
  r.norm.c = norm.at("c").get<std::vector<double>>();
  r.norm.radius = GetOpt<double>(norm, "R");
  r.norm.marshall_radius = GetOpt<double>(norm, "R_lit");
  r.norm.box_radius = GetOpt<std::int64_t>(norm, "box_radius");
  r.norm.witness = GetOpt<std::vector<double>>(norm, "witness");
  r.h = j.at("h").get<std::vector<double>>();
  if (!j.at("glob").is_null()) r.glob = BoundFromJson(j.at("glob"));
  if (!j.at("sls").is_null()) r.sls = BoundFromJson(j.at("sls"));
  for (const auto& run : j.at("runs")) {
    StrategyRun s;
    s.strategy = ParseStrategy(run.at("strategy").get<std::string>());
    s.status = run.at("status").get<std::string>();
    s.message = run.at("message").get<std::string>();
    s.root_bound = GetOpt<double>(run, "root_bound");
    s.quality = GetQuality(run);
    if (!run.at("result").is_null()) s.result = BnbResultFromJson(run.at("result"));
    r.runs.push_back(std::move(s));
  }
  r.x_star = GetOpt<std::vector<std::int64_t>>(j, "x_star");
  r.u = GetOpt<double>(j, "u");
  return r;
}

std::string BenchCsvHeader() {
  return "# polymin-bench v1\n"
         "seed,n,d,strategy,R,R_lit,bound,Q,u,nodes,time,status";
}

namespace {

std::string Num(std::optional<double> v, const char* format = "%.17g") {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), format, *v);
  return buf;
}

}  // namespace

std::vector<std::string> BenchCsvRows(const RunRecord& r) {
  std::vector<std::string> rows;
  const std::string seed = r.spec ? std::to_string(r.spec->seed) : r.id;
  const int d = r.f.degree().value_or(0);
  for (const StrategyRun& run : r.runs) {
    std::ostringstream os;
    os << seed << ',' << r.f.num_vars() << ',' << d << ',' << ToString(run.strategy) << ','
       << Num(r.norm.radius) << ',' << Num(r.norm.marshall_radius) << ','
       << Num(run.root_bound) << ','
       << Num(run.quality ? std::optional<double>(run.quality->value) : std::nullopt) << ','
       << Num(run.result ? std::optional<double>(run.result->u) : std::nullopt) << ','
       << (run.result ? std::to_string(run.result->nodes_expanded) : std::string()) << ','
       << Num(run.result ? std::optional<double>(run.result->elapsed) : std::nullopt, "%.6f") << ','
       << run.status;
    rows.push_back(os.str());
  }
  return rows;
}

}  // namespace polymin
