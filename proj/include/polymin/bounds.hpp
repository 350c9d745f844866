#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polymin/poly.hpp"
#include "polymin/sdp.hpp"

namespace polymin {

/// Method that produced a lower bound c_j on f_j over the unit p-sphere.
/// Max marks entries where several methods attain the same maximum.
enum class CjSource { CoefficientNorm, MonomialRefined, SphereSos, NieBound, Max };

std::string ToString(CjSource source);

struct CjEntry {
  int degree = 0;
  double value = 0.0;
  CjSource source = CjSource::CoefficientNorm;
  double coefficient_norm = 0.0;
  double monomial_refined = 0.0;
  /// Validated sphere SOS bound when the solve succeeded.
  std::optional<double> sphere_sos;
  /// Nie bound converted to the p-sphere (leading degree only).
  std::optional<double> nie;
};

/// c_1, ..., c_d with f_j >= c_j on {sum |x_i|^p = 1}.
struct CjVector {
  int p = 2;
  std::vector<CjEntry> entries;  // entries[j - 1] holds c_j

  int degree() const { return static_cast<int>(entries.size()); }
  double operator[](int j) const { return entries.at(j - 1).value; }
  std::vector<double> values() const;
};

/// -||f_j||_1.
double CjCoefficientNorm(const Polynomial& fj);

/// The maximizer of x^alpha over the nonnegative part of the unit p-sphere:
/// x_i = (alpha_i / |alpha|)^(1/p). Throws for alpha = 0 or p < 1.
std::vector<double> MonomialSphereMaximizer(const Monomial& alpha, double p);

/// max of x^alpha over the unit p-sphere.
double MonomialSphereMax(const Monomial& alpha, double p);

/// sum -|a_alpha| * max_{sphere} |x^alpha|; never below CjCoefficientNorm.
double CjMonomialRefined(const Polynomial& fj, double p);

/// Entry-wise maximum of the algebraic bounds and, for even p, the sphere SOS
/// bound at relaxation order k; c_d also uses the Nie bound. Failed SOS solves
/// fall back to the algebraic bounds.
CjVector BestCj(const Polynomial& f, int p, int k, const SdpOptions& options = {});

/// Largest nonnegative real root of q(lambda) = sum_j c_j lambda^j, with
/// c[j - 1] = c_j. Throws std::invalid_argument unless c_d > 0.
double LargestNonnegRoot(const std::vector<double>& c);

/// max(1, sum_{0 < |alpha| < d} |a_alpha| / c_d). Throws unless c_d > 0.
double MarshallRadius(const Polynomial& f, double c_d);

struct OrthantBound {
  std::vector<int> tau;   // signs in {-1, +1}
  std::vector<double> c;  // c_1^tau, ..., c_d^tau (c_d shared)
  double radius = 0.0;
};

/// Radius per orthant H_tau = {x : tau_i x_i >= 0}, keeping only the terms
/// that can be negative there. Requires c_d > 0 and n <= 16.
std::vector<OrthantBound> OrthantRadii(const Polynomial& f, double p, double c_d);

enum class Definiteness { CertifiedPositive, CertifiedNotPsd, Undecided };

std::string ToString(Definiteness d);

/// Thrown when f has odd (or zero) degree: such f has no minimizer to bound.
class DegreeError : public std::invalid_argument {
 public:
  explicit DegreeError(int degree);
  int degree() const { return degree_; }

 private:
  int degree_;
};

struct NormBoundOptions {
  SdpOptions sdp;
  /// c_d must exceed this to count as certified.
  double certify_tol = 1e-9;
  /// Orthant radii are computed only up to this many variables.
  int orthant_max_vars = 8;
  int witness_samples = 4096;
  int witness_starts = 8;
  std::uint64_t seed = 1;
};

struct NormBoundReport {
  int num_vars = 0;
  int degree = 0;
  int p = 2;
  /// Sphere relaxation order that certified c_d > 0 (or the last one tried);
  /// 0 when the Nie bound alone certified it.
  int certify_level = 0;
  /// Order used for the final c-vector.
  int level = 0;
  Definiteness definite = Definiteness::Undecided;
  CjVector c;
  std::optional<double> radius;
  std::optional<double> marshall_radius;
  std::optional<std::int64_t> box_radius;
  std::vector<OrthantBound> orthants;
  std::optional<std::vector<double>> witness;
};

/// Norm bound on integer minimizers of f. Escalates the sphere relaxation
/// order over even k from max(d, p) to k_max (at least one level) until
/// c_d > 0 is certified, then computes every c_j at order k_max and the radius
/// R; integer minimizers satisfy ||x||_p <= R and |x_i| <= floor(R). When f_d
/// takes a negative value on the sphere the witness is returned instead.
/// k_max <= 0 selects d + 2. Throws DegreeError for odd or zero degree.
NormBoundReport ComputeNormBound(const Polynomial& f, int p, int k_max = 0,
                                 const NormBoundOptions& options = {});

struct SphereSample {
  double value = 0.0;
  std::int64_t index = 0;
};

/// Sample `index` of stream `seed`: a standard normal vector drawn from its
/// own substream and scaled onto the unit p-sphere.
std::vector<double> SpherePoint(int n, int p, std::uint64_t seed, std::int64_t index);

/// The `keep` lowest values of f over sphere samples 0, ..., count - 1,
/// ordered by value, then index.
std::vector<SphereSample> LowestSphereSamples(const CompiledPolynomial& f, int p,
                                              std::int64_t count, std::size_t keep,
                                              std::uint64_t seed);
/// OpenMP variant with the same output as LowestSphereSamples.
std::vector<SphereSample> LowestSphereSamplesParallel(const CompiledPolynomial& f, int p,
                                                      std::int64_t count, std::size_t keep,
                                                      std::uint64_t seed);

/// Nonzero x with f_d(x) < 0 found by sphere sampling and local descent.
std::optional<std::vector<double>> FindNegativeDirection(const Polynomial& fd, int p,
                                                        const NormBoundOptions& options);

nlohmann::json ToJson(const CjVector& c);
nlohmann::json ToJson(const NormBoundReport& report);

}  // namespace polymin
