#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polymin/bnb.hpp"
#include "polymin/bounds.hpp"
#include "polymin/instance.hpp"
#include "polymin/underest.hpp"

namespace polymin {

struct PipelineOptions {
  int p = 2;
  /// Sphere relaxation order for the norm bound; <= 0 selects d + 2.
  int k_max = 0;
  std::vector<Strategy> strategies = {Strategy::UnderestimatorGlob,
                                      Strategy::UnderestimatorSls};
  int sigma_degree = 2;
  double safety = 1e-6;
  /// Per-strategy wall-clock limit in seconds; nonpositive means none.
  double time_limit = 300.0;
  /// Seed of the choose_h multistart.
  std::uint64_t seed = 1;
  /// Brute force refuses balls holding more lattice points than this.
  std::int64_t lattice_cap = 10'000'000;
  SdpOptions sdp;
};

/// The parts of a NormBoundReport kept in a run record.
struct NormSummary {
  Definiteness definite = Definiteness::Undecided;
  int certify_level = 0;
  int level = 0;
  std::vector<double> c;  // c_1, ..., c_d
  std::optional<double> radius;
  std::optional<double> marshall_radius;
  std::optional<std::int64_t> box_radius;
  std::optional<std::vector<double>> witness;
};

NormSummary Summarize(const NormBoundReport& report);

struct BoundSummary {
  Underestimator g;
  double value = 0.0;
  double lower_bound = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  bool certified = false;
  double certificate_residual = 0.0;
  std::optional<Quality> quality;
};

struct StrategyRun {
  Strategy strategy = Strategy::BruteForce;
  /// "ok", "timeout" (unsuccessful, incumbent kept), or "failed".
  std::string status;
  std::string message;
  /// Lower bound at the root: g(round(h)) for glob and sls, the continuous
  /// relaxation for cr; absent for bf.
  std::optional<double> root_bound;
  std::optional<Quality> quality;
  std::optional<BnbResult> result;
};

struct RunRecord {
  std::string id;
  std::optional<InstanceSpec> spec;
  Polynomial f;
  int p = 2;
  NormSummary norm;
  std::vector<double> h;
  std::optional<BoundSummary> glob;
  std::optional<BoundSummary> sls;
  std::vector<StrategyRun> runs;
  /// Integer minimizer agreed on by the successful runs.
  std::optional<std::vector<std::int64_t>> x_star;
  std::optional<double> u;
};

/// Certify, bound the radius, fit the underestimators, then run every
/// requested strategy. Stops after the norm bound unless f_d is certified
/// positive definite.
RunRecord RunPipeline(const Polynomial& f, const PipelineOptions& options,
                      std::string id = {}, std::optional<InstanceSpec> spec = std::nullopt);

nlohmann::json ToJson(const Quality& q);
nlohmann::json ToJson(const RunRecord& r);
RunRecord RunRecordFromJson(const nlohmann::json& j);

/// Versioned header (a comment line, then the column names).
std::string BenchCsvHeader();
/// One row per strategy run of the record.
std::vector<std::string> BenchCsvRows(const RunRecord& r);

SdpStatus ParseSdpStatus(std::string_view name);
Definiteness ParseDefiniteness(std::string_view name);

}  // namespace polymin
