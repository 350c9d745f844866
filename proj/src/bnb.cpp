#include "polymin/bnb.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polymin/sos.hpp"

namespace polymin {

std::string_view ToString(Strategy s) {
  switch (s) {
    case Strategy::UnderestimatorGlob: return "glob";
    case Strategy::UnderestimatorSls: return "sls";
    case Strategy::ContinuousRelaxation: return "cr";
    case Strategy::BruteForce: return "bf";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::UnderestimatorGlob, Strategy::UnderestimatorSls,
                     Strategy::ContinuousRelaxation, Strategy::BruteForce}) {
    if (ToString(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

namespace {

double IntPow(std::int64_t t, int p) {
  double v = 1.0;
  const double a = static_cast<double>(t < 0 ? -t : t);
  for (int i = 0; i < p; ++i) v *= a;
  return v;
}

void CheckRadius(double radius, int p) {
  if (!std::isfinite(radius) || radius < 0.0) {
    throw std::invalid_argument("radius must be finite and nonnegative");
  }
  if (p < 1) throw std::invalid_argument("p must be at least 1");
}

}  // namespace

std::int64_t LatticeLimit(double radius, int p, double used) {
  const double total = std::pow(radius, p);
  const double rem = total - used;
  const double slack = 1e-12 * std::max(1.0, total);
  if (rem < -slack) return -1;
  auto t = static_cast<std::int64_t>(std::floor(std::pow(std::max(rem, 0.0), 1.0 / p)));
  while (IntPow(t + 1, p) <= rem + slack) ++t;
  while (t > 0 && IntPow(t, p) > rem + slack) --t;
  return t;
}

double PowerSum(std::span<const std::int64_t> x, int p) {
  double s = 0.0;
  for (std::int64_t v : x) s += IntPow(v, p);
  return s;
}

namespace {

std::int64_t CountFrom(int remaining, double radius, int p, double used, std::int64_t cap,
                       std::int64_t so_far) {
  const std::int64_t limit = LatticeLimit(radius, p, used);
  if (limit < 0) return so_far;
  if (remaining == 1) return so_far + 2 * limit + 1;
  for (std::int64_t t = -limit; t <= limit && so_far <= cap; ++t) {
    so_far = CountFrom(remaining - 1, radius, p, used + IntPow(t, p), cap, so_far);
  }
  return so_far;
}

}  // namespace

std::int64_t CountLatticePoints(int num_vars, double radius, int p, std::int64_t cap) {
  CheckRadius(radius, p);
  if (num_vars == 0) return 1;
  const std::int64_t count = CountFrom(num_vars, radius, p, 0.0, cap, 0);
  return count > cap ? cap + 1 : count;
}

int EndpointBudget(std::int64_t limit) {
  if (limit <= 0) return 0;
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(limit - 1))) + 2;
}

PruneInterval FindPruneInterval(const std::function<double(std::int64_t)>& slice, double h,
                                std::int64_t limit, double u) {
  PruneInterval out;
  if (limit < 0) return out;
  const std::vector<double> hv = {h};
  const std::int64_t c = std::clamp(RoundHalfAway(hv)[0], -limit, limit);
  out.center_value = slice(c);
  out.center_evals = 1;
  if (!(out.center_value <= u)) return out;

  // First t in [-L, c] with slice(t) <= u; slice(c) <= u is known.
  std::int64_t lo = -limit, hi = c;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    ++out.lower_evals;
    if (slice(mid) <= u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::int64_t l1 = lo;
  // Last t in [c, L] with slice(t) <= u.
  lo = c;
  hi = limit;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    ++out.upper_evals;
    if (slice(mid) <= u) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  out.range = std::pair{l1, lo};
  return out;
}

bool GradedBefore(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
  std::int64_t nx = 0, ny = 0;
  for (std::int64_t v : x) nx += v < 0 ? -v : v;
  for (std::int64_t v : y) ny += v < 0 ? -v : v;
  if (nx != ny) return nx < ny;
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Node {
  std::vector<std::int64_t> prefix;
  double used = 0.0;  // sum |r_i|^p
};

// Children t of `node` in [lo, hi], pushed so that the one closest to h
// (round(h) first on equal distance) is popped first.
void PushChildren(std::vector<Node>& stack, const Node& node, std::int64_t lo, std::int64_t hi,
                  double h, int p) {
  if (lo > hi) return;
  const std::vector<double> hv = {h};
  const std::int64_t r = RoundHalfAway(hv)[0];
  std::vector<std::int64_t> ts;
  ts.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t t = lo; t <= hi; ++t) ts.push_back(t);
  std::stable_sort(ts.begin(), ts.end(), [&](std::int64_t a, std::int64_t b) {
    const double da = std::abs(static_cast<double>(a) - h);
    const double db = std::abs(static_cast<double>(b) - h);
    if (da != db) return da > db;
    return (a == r) < (b == r);
  });
  for (std::int64_t t : ts) {
    Node child;
    child.prefix = node.prefix;
    child.prefix.push_back(t);
    child.used = node.used + IntPow(t, p);
    stack.push_back(std::move(child));
  }
}

void CheckInputs(const Polynomial& f, double radius, int p, std::size_t h_size) {
  CheckRadius(radius, p);
  if (p % 2 != 0) throw std::invalid_argument("branch and bound needs an even p");
  if (h_size != static_cast<std::size_t>(f.num_vars())) {
    throw std::invalid_argument("branch and bound: dimension mismatch");
  }
}

// The depth-first loop shared by both bounding schemes. `expand` handles an
// inner node and pushes its surviving children.
template <typename Expand>
BnbResult Search(const Polynomial& f, std::span<const double> h, const BnbOptions& options,
                 Strategy strategy, Expand&& expand) {
  const auto start = Clock::now();
  const int n = f.num_vars();
  const CompiledPolynomial fc(f);
  BnbResult res;
  res.strategy = strategy;
  res.x_star = RoundHalfAway(h);
  double u = fc(std::span<const std::int64_t>(res.x_star));

  std::vector<Node> stack(1);
  while (!stack.empty()) {
    if (options.time_limit > 0.0 && Seconds(start) > options.time_limit) {
      res.timed_out = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++res.nodes_expanded;
    if (static_cast<int>(node.prefix.size()) < n) {
      expand(node, u, stack, res);
    } else {
      const double fx = fc(std::span<const std::int64_t>(node.prefix));
      if (fx < u) {
        u = fx;
        res.x_star = node.prefix;
      }
    }
  }
  res.u = Evaluate(f, std::span<const std::int64_t>(res.x_star));
  res.elapsed = Seconds(start);
  return res;
}

void RecordPruned(BnbResult& res, const BnbOptions& options, std::vector<std::int64_t> prefix,
                  double u) {
  ++res.pruned;
  if (options.record_pruned) res.pruned_nodes.push_back({std::move(prefix), u});
}

}  // namespace

BnbResult Minimize(const Polynomial& f, double radius, int p, const Underestimator& g,
                   const BnbOptions& options) {
  CheckInputs(f, radius, p, g.h.size());
  if (g.b.size() != g.exponents.size()) {
    throw std::invalid_argument("branch and bound: malformed underestimator");
  }
  const std::vector<std::int64_t> rh = RoundHalfAway(g.h);
  const Strategy strategy = g.kind == UnderestimatorKind::Sls ? Strategy::UnderestimatorSls
                                                               : Strategy::UnderestimatorGlob;
  return Search(f, g.h, options, strategy,
                [&](const Node& node, double u, std::vector<Node>& stack, BnbResult& res) {
    const int m = static_cast<int>(node.prefix.size());
    const std::int64_t limit = LatticeLimit(radius, p, node.used);
    std::vector<std::int64_t> x = rh;
    std::copy(node.prefix.begin(), node.prefix.end(), x.begin());
    const auto slice = [&](std::int64_t t) {
      ++res.g_evals;
      x[m] = t;
      return EvalG(g, std::span<const std::int64_t>(x));
    };
    // g - safety <= u  <=>  g <= u + safety.
    const PruneInterval pi = FindPruneInterval(slice, g.h[m], limit, u + options.safety);
    if (limit > 0) {
      const int budget = EndpointBudget(limit);
      res.budget_exceeded += (pi.lower_evals > budget) + (pi.upper_evals > budget);
    }
    if (!pi.range) {
      RecordPruned(res, options, node.prefix, u);
      return;
    }
    const auto [l1, l2] = *pi.range;
    for (std::int64_t t = -limit; t <= limit; ++t) {
      if (t >= l1 && t <= l2) continue;
      std::vector<std::int64_t> child = node.prefix;
      child.push_back(t);
      RecordPruned(res, options, std::move(child), u);
    }
    PushChildren(stack, node, l1, l2, g.h[m], p);
  });
}

double ContinuousRelaxationBound(const Polynomial& f, std::span<const std::int64_t> prefix,
                                 const SdpOptions& options) {
  const Polynomial rest = FixPrefix(f, prefix);
  if (rest.num_vars() == 0 || rest.is_zero() || rest.degree().value_or(0) == 0) {
    return rest.coefficient(Monomial(rest.num_vars()));
  }
  const SosBound b = UnconstrainedLowerBound(rest, options);
  if (!b.ok()) {
    throw std::runtime_error("continuous relaxation: solver returned " +
                             std::string(ToString(b.status)));
  }
  return b.value;
}

BnbResult MinimizeContinuousRelaxation(const Polynomial& f, std::span<const double> h,
                                       double radius, int p, const BnbOptions& options) {
  CheckInputs(f, radius, p, h.size());
  return Search(f, h, options, Strategy::ContinuousRelaxation,
                [&](const Node& node, double u, std::vector<Node>& stack, BnbResult& res) {
    const int m = static_cast<int>(node.prefix.size());
    double bound = -std::numeric_limits<double>::infinity();
    try {
      bound = ContinuousRelaxationBound(f, node.prefix, options.sdp);
    } catch (const std::runtime_error&) {
      ++res.bound_failures;
    }
    if (bound - options.safety > u) {
      RecordPruned(res, options, node.prefix, u);
      return;
    }
    const std::int64_t limit = LatticeLimit(radius, p, node.used);
    PushChildren(stack, node, -limit, limit, h[m], p);
  });
}

namespace {

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> x;
  std::int64_t points = 0;

  void Offer(double v, const std::vector<std::int64_t>& y) {
    ++points;
    if (v < value || (v == value && GradedBefore(y, x))) {
      value = v;
      x = y;
    }
  }
  void Merge(const Best& o) {
    points += o.points;
    if (o.x.empty()) return;
    if (x.empty() || o.value < value || (o.value == value && GradedBefore(o.x, x))) {
      value = o.value;
      x = o.x;
    }
  }
};

void Enumerate(const CompiledPolynomial& fc, double radius, int p, std::vector<std::int64_t>& x,
               int k, double used, Best& best) {
  if (k == static_cast<int>(x.size())) {
    best.Offer(fc(std::span<const std::int64_t>(x)), x);
    return;
  }
  const std::int64_t limit = LatticeLimit(radius, p, used);
  for (std::int64_t t = -limit; t <= limit; ++t) {
    x[k] = t;
    Enumerate(fc, radius, p, x, k + 1, used + IntPow(t, p), best);
  }
}

BnbResult BruteForceImpl(const Polynomial& f, double radius, int p, const BnbOptions& options,
                         bool parallel) {
  CheckRadius(radius, p);
  const auto start = Clock::now();
  const int n = f.num_vars();
  if (CountLatticePoints(n, radius, p, options.lattice_cap) > options.lattice_cap) {
    throw std::length_error("brute force: lattice point count exceeds the cap");
  }
  const CompiledPolynomial fc(f);
  Best best;
  if (n == 0) {
    std::vector<std::int64_t> x;
    Enumerate(fc, radius, p, x, 0, 0.0, best);
  } else {
    const std::int64_t limit = LatticeLimit(radius, p, 0.0);
    std::vector<Best> slabs(static_cast<std::size_t>(2 * limit + 1));
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::int64_t i = 0; i < 2 * limit + 1; ++i) {
      std::vector<std::int64_t> x(n, 0);
      x[0] = i - limit;
      Enumerate(fc, radius, p, x, 1, IntPow(x[0], p), slabs[i]);
    }
    for (const Best& s : slabs) best.Merge(s);
  }
  BnbResult res;
  res.strategy = Strategy::BruteForce;
  res.x_star = best.x;
  res.u = Evaluate(f, std::span<const std::int64_t>(res.x_star));
  res.nodes_expanded = best.points;
  res.elapsed = Seconds(start);
  return res;
}

}  // namespace

BnbResult BruteForce(const Polynomial& f, double radius, int p, const BnbOptions& options) {
  return BruteForceImpl(f, radius, p, options, false);
}

BnbResult BruteForceParallel(const Polynomial& f, double radius, int p,
                             const BnbOptions& options) {
  return BruteForceImpl(f, radius, p, options, true);
}

nlohmann::json ToJson(const BnbResult& r) {
  nlohmann::json pruned = nlohmann::json::array();
  for (const PrunedNode& node : r.pruned_nodes) {
    pruned.push_back({{"prefix", node.prefix}, {"u", node.incumbent}});
  }
  return {{"strategy", ToString(r.strategy)},
          {"x_star", r.x_star},
          {"u", r.u},
          {"nodes", r.nodes_expanded},
          {"prunes", r.pruned},
          {"g_evals", r.g_evals},
          {"budget_exceeded", r.budget_exceeded},
          {"bound_failures", r.bound_failures},
          {"wall_time", r.elapsed},
          {"timed_out", r.timed_out},
          {"pruned_nodes", std::move(pruned)}};
}

BnbResult BnbResultFromJson(const nlohmann::json& j) {
  BnbResult r;
  r.strategy = ParseStrategy(j.at("strategy").get<std::string>());
  r.x_star = j.at("x_star").get<std::vector<std::int64_t>>();
  r.u = j.at("u").get<double>();
  r.nodes_expanded = j.at("nodes").get<std::int64_t>();
  r.pruned = j.at("prunes").get<std::int64_t>();
  r.g_evals = j.at("g_evals").get<std::int64_t>();
  r.budget_exceeded = j.value("budget_exceeded", std::int64_t{0});
  r.bound_failures = j.value("bound_failures", std::int64_t{0});
  r.elapsed = j.at("wall_time").get<double>();
  r.timed_out = j.at("timed_out").get<bool>();
  for (const auto& node : j.value("pruned_nodes", nlohmann::json::array())) {
    r.pruned_nodes.push_back({node.at("prefix").get<std::vector<std::int64_t>>(),
                              node.at("u").get<double>()});
  }
  return r;
}

}  // namespace polymin
