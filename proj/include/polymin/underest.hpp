#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "polymin/poly.hpp"
#include "polymin/sdp.hpp"

namespace polymin {

/// Componentwise nearest integer; ties (fraction exactly 0.5) round away
/// from zero.
std::vector<std::int64_t> RoundHalfAway(std::span<const double> h);

enum class UnderestimatorKind { Glob, Sls };

/// g = sum_{alpha in J} b_alpha (X - h)^(2 alpha), with b_alpha >= 0 for
/// alpha != 0. Each univariate slice of g is nonincreasing up to h_k and
/// nondecreasing after it, so over integers g is minimized at round(h).
struct Underestimator {
  UnderestimatorKind kind = UnderestimatorKind::Glob;
  std::vector<double> h;
  std::vector<Monomial> exponents;  // J
  std::vector<double> b;            // b[i] belongs to exponents[i]
  std::vector<double> w;            // (round(h) - h)^(2 alpha)
  /// Sublevel value z and deg sigma (Sls only).
  double z = 0.0;
  int sigma_degree = -1;

  int num_vars() const { return static_cast<int>(h.size()); }
  /// 2 max |alpha| over coefficients with |b_alpha| > tol.
  int degree(double tol = 1e-9) const;
  /// Expanded polynomial form.
  Polynomial ToPolynomial() const;
};

double EvalG(const Underestimator& g, std::span<const double> x);
double EvalG(const Underestimator& g, std::span<const std::int64_t> x);

/// Minimum of g over integer points whose first m coordinates are `prefix`:
/// the remaining coordinates sit at round(h).
double MinOverIntegerCompletion(const Underestimator& g,
                                std::span<const std::int64_t> prefix);

struct UnderestOptions {
  SdpOptions sdp;
  /// Subtracted from g(round(h)) before the bound is used.
  double safety = 1e-6;
};

struct UnderestimateResult {
  Underestimator g;
  /// g(round(h)) as solved.
  double value = 0.0;
  /// value - safety.
  double lower_bound = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  double certificate_residual = 0.0;
  /// The multiplier sigma (zero for Glob).
  Polynomial sigma;
  /// The returned point satisfies every block up to feas-tol and the SOS
  /// identity up to 1e-6, so g underestimates as claimed. Optimal solves
  /// qualify; a solve that stalls short of the gap tolerance can too, and
  /// then gives a valid but possibly weaker bound.
  bool certified = false;

  bool ok() const { return status == SdpStatus::Optimal; }
  bool usable() const { return ok() || certified; }
};

/// {alpha : |alpha| <= d / 2}, enough for deg g <= deg f.
std::vector<Monomial> DefaultExponents(int num_vars, int degree);

/// max sum w_alpha b_alpha  s.t.  f - g in Sigma, b_alpha >= 0 (alpha != 0).
/// Empty `exponents` selects DefaultExponents(n, deg f). Throws for odd deg f.
UnderestimateResult SolveGlob(const Polynomial& f, std::span<const double> h,
                              const std::vector<Monomial>& exponents = {},
                              const UnderestOptions& options = {});

/// max sum w_alpha b_alpha  s.t.  f - g - sigma (z - f) in Sigma, sigma in
/// Sigma with deg sigma <= sigma_degree. A negative sigma_degree drops sigma
/// and reproduces SolveGlob. Throws std::invalid_argument when z < f(round(h)).
UnderestimateResult SolveSls(const Polynomial& f, std::span<const double> h, double z,
                             int sigma_degree = 2,
                             const std::vector<Monomial>& exponents = {},
                             const UnderestOptions& options = {});

struct ChooseHOptions {
  /// Starts are the origin and uniform points in [-radius, radius]^n.
  double radius = 1.0;
  int starts = 20;
  std::uint64_t seed = 1;
  int max_iters = 200;
};

/// Approximate continuous minimizer of f by multistart damped Newton with
/// finite-difference derivatives; the candidate with the smallest f wins.
std::vector<double> ChooseH(const Polynomial& f, const ChooseHOptions& options = {});

/// Central-difference gradient of f at x.
std::vector<double> NumericGradient(const Polynomial& f, std::span<const double> x);

struct Quality {
  /// (g(round(h)) - f(h)) / (f(x*) - f(h)), clamped into [0, 1].
  double value = 0.0;
  double raw = 0.0;
  bool clamped = false;
  /// f(x*) = f(h) up to 1e-12: the integer and continuous minima coincide and
  /// the ratio is reported as 1.
  bool exact = false;
};

Quality QualityRatio(const Polynomial& f, std::span<const double> h, double g_value,
                     std::span<const std::int64_t> x_star);

nlohmann::json ToJson(const Underestimator& g);
Underestimator UnderestimatorFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const UnderestimateResult& r);

}  // namespace polymin
