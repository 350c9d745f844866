#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polymin/poly.hpp"
#include "polymin/sdp.hpp"
#include "polymin/underest.hpp"

namespace polymin {

enum class Strategy { UnderestimatorGlob, UnderestimatorSls, ContinuousRelaxation, BruteForce };

/// Short names used on the command line: glob, sls, cr, bf.
std::string_view ToString(Strategy s);
/// Throws std::invalid_argument for an unknown name.
Strategy ParseStrategy(std::string_view name);

/// floor((R^p - used)^(1/p)): the largest t >= 0 with used + t^p <= R^p,
/// up to a slack of 1e-12 max(1, R^p) so that points on the sphere stay
/// inside. Returns -1 when even t = 0 does not fit.
std::int64_t LatticeLimit(double radius, int p, double used = 0.0);

/// sum |x_i|^p.
double PowerSum(std::span<const std::int64_t> x, int p);

/// Number of integer points with ||x||_p <= radius, counting stops once it
/// exceeds `cap` (the returned value is then cap + 1).
std::int64_t CountLatticePoints(int num_vars, double radius, int p,
                                std::int64_t cap = INT64_MAX);

/// The branching range of one slice: minimal L1 and maximal L2 in [-L, L]
/// with slice(t) <= u, plus instrumented evaluation counts. The slice must
/// be nonincreasing up to round(h) and nondecreasing after it.
struct PruneInterval {
  std::optional<std::pair<std::int64_t, std::int64_t>> range;
  /// slice(clamp(round(h), -L, L)), the slice minimum over [-L, L].
  double center_value = 0.0;
  /// Evaluations at the clamped centre round(h), which decides pruning.
  int center_evals = 0;
  /// Binary-search evaluations for each endpoint.
  int lower_evals = 0;
  int upper_evals = 0;
};

PruneInterval FindPruneInterval(const std::function<double(std::int64_t)>& slice, double h,
                                std::int64_t limit, double u);

/// ceil(log2 L) + 2, the evaluation budget per endpoint when L > 0.
int EndpointBudget(std::int64_t limit);

/// A node that was discarded: every integer point whose first coordinates
/// equal `prefix` lies outside the search.
struct PrunedNode {
  std::vector<std::int64_t> prefix;
  /// u at the moment of pruning.
  double incumbent = 0.0;
};

struct BnbOptions {
  /// Subtracted from every lower bound before it is compared with u.
  double safety = 1e-6;
  /// Wall-clock limit in seconds; nonpositive means none.
  double time_limit = 0.0;
  /// Keep every pruned node for offline re-expansion.
  bool record_pruned = false;
  /// brute_force refuses balls with more lattice points than this.
  std::int64_t lattice_cap = 10'000'000;
  /// Options of the per-node SOS solves of the continuous relaxation.
  SdpOptions sdp;
};

struct BnbResult {
  Strategy strategy = Strategy::BruteForce;
  std::vector<std::int64_t> x_star;
  /// f(x_star), re-evaluated at return.
  double u = 0.0;
  std::int64_t nodes_expanded = 0;
  std::int64_t g_evals = 0;
  std::int64_t pruned = 0;
  /// Endpoint searches whose evaluation count exceeded EndpointBudget.
  std::int64_t budget_exceeded = 0;
  /// Continuous-relaxation solves that did not return a usable bound.
  std::int64_t bound_failures = 0;
  double elapsed = 0.0;  // seconds
  bool timed_out = false;
  std::vector<PrunedNode> pruned_nodes;
};

/// Depth-first branch and bound with the monotone underestimator g, whose h
/// also supplies the initial incumbent round(h). R must enclose every integer
/// minimizer in the p-norm. Throws std::invalid_argument on negative or
/// non-finite R, odd p, or dimension mismatch.
BnbResult Minimize(const Polynomial& f, double radius, int p, const Underestimator& g,
                   const BnbOptions& options = {});

/// The same search with the continuous relaxation of each node as its lower
/// bound and every child in [-L, L] branched on.
BnbResult MinimizeContinuousRelaxation(const Polynomial& f, std::span<const double> h,
                                       double radius, int p, const BnbOptions& options = {});

/// Lower bound on f over the integer points with prefix `prefix`:
/// max lambda s.t. f(prefix, X) - lambda is SOS; f(prefix) when fully fixed.
/// Throws when the solver does not return Optimal.
double ContinuousRelaxationBound(const Polynomial& f, std::span<const std::int64_t> prefix,
                                 const SdpOptions& options = {});

/// Exact minimum over {x in Z^n : ||x||_p <= R}. Ties go to the point that
/// comes first in graded order: smaller ||x||_1, then lexicographically
/// smaller. Throws std::length_error when the ball holds more than
/// options.lattice_cap points.
BnbResult BruteForce(const Polynomial& f, double radius, int p, const BnbOptions& options = {});
/// OpenMP variant over the first coordinate; same result as BruteForce.
BnbResult BruteForceParallel(const Polynomial& f, double radius, int p,
                             const BnbOptions& options = {});

/// x comes before y in the brute-force tie-break order.
bool GradedBefore(std::span<const std::int64_t> x, std::span<const std::int64_t> y);

nlohmann::json ToJson(const BnbResult& r);
BnbResult BnbResultFromJson(const nlohmann::json& j);

}  // namespace polymin
