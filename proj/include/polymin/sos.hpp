#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polymin/poly.hpp"
#include "polymin/sdp.hpp"

namespace polymin {

/// Graded-lex ordered monomials used as the vector m in f = m^T Q m.
struct MonomialBasis {
  int num_vars = 0;
  int max_degree = 0;
  std::vector<Monomial> elements;

  /// All monomials with |alpha| <= max_degree; size C(n + max_degree, n).
  static MonomialBasis Full(int num_vars, int max_degree);
  std::size_t size() const { return elements.size(); }
};

/// constant + sum_i coeffs[i] * v_i over decision variables v.
struct LinearExpr {
  double constant = 0.0;
  std::map<int, double> coeffs;

  static LinearExpr Var(int index, double scale = 1.0);
  bool is_constant() const { return coeffs.empty(); }
  double Evaluate(const std::vector<double>& values) const;

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator*=(double s);
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator*(LinearExpr a, double s) { return a *= s; }
};

/// Polynomial in X whose coefficients are affine in the decision variables.
class AffinePolynomial {
 public:
  using TermMap = std::map<Monomial, LinearExpr>;

  explicit AffinePolynomial(int num_vars = 0) : num_vars_(num_vars) {}
  AffinePolynomial(const Polynomial& p);  // NOLINT: fixed polynomial

  int num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  /// Degree counting monomials whose coefficient is not identically zero.
  std::optional<int> degree() const;

  void AddTerm(const Monomial& m, const LinearExpr& c);
  AffinePolynomial& operator+=(const AffinePolynomial& other);
  AffinePolynomial& operator-=(const AffinePolynomial& other);
  AffinePolynomial& operator*=(double s);
  friend AffinePolynomial operator+(AffinePolynomial a, const AffinePolynomial& b) {
    return a += b;
  }
  friend AffinePolynomial operator-(AffinePolynomial a, const AffinePolynomial& b) {
    return a -= b;
  }
  friend AffinePolynomial operator*(AffinePolynomial a, double s) { return a *= s; }
  friend AffinePolynomial operator*(const AffinePolynomial& a, const Polynomial& p);
  friend AffinePolynomial operator*(const Polynomial& p, const AffinePolynomial& a) {
    return a * p;
  }

  /// var * p for a single decision variable.
  static AffinePolynomial Scaled(int var, const Polynomial& p);
  Polynomial Evaluate(const std::vector<double>& values) const;

 private:
  int num_vars_ = 0;
  TermMap terms_;
};

/// Gram matrix realizing one SOS block: the block equals m^T gram m.
struct GramCertificate {
  int constraint = 0;
  std::vector<Monomial> basis;
  Eigen::MatrixXd gram;
};

struct SosSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> values;  // decision variables
  std::vector<GramCertificate> grams;
  /// Max over constraints and monomials of |expr(values) - sum m^T Q m|.
  double certificate_residual = 0.0;
  /// Sum over constraints and monomials of the same residual.
  double residual_l1 = 0.0;
  /// Smallest Gram eigenvalue over all blocks.
  double min_gram_eigenvalue = 0.0;
  /// sum over blocks of min(0, lambda_min(Q)) * |basis|; bounds m^T Q m
  /// from below wherever every basis monomial is at most 1 in magnitude.
  double gram_deficit = 0.0;
  SdpSolution sdp;
};

/// SOS program: maximize a linear objective in decision variables subject to
/// a list of affine polynomial expressions each being a sum of squares.
///
/// Compilation parameterizes each constraint by Gram matrices and eliminates
/// one Gram entry per coefficient equation (the diagonal one when available),
/// producing an LMI in the remaining free entries. Bases are shrunk by a
/// diagonal facial reduction (an entry Q_bb forced to zero zeroes its row)
/// and split by total-degree parity when the expression is even.
class SosProgram {
 public:
  explicit SosProgram(int num_vars) : num_vars_(num_vars) {}

  int num_vars() const { return num_vars_; }
  int num_decision_vars() const { return static_cast<int>(names_.size()); }
  const std::string& name(int var) const { return names_.at(var); }

  int NewFree(std::string name);
  int NewNonneg(std::string name);
  /// sum_m v_m X^m with one new free variable per monomial.
  AffinePolynomial NewFreePolynomial(const std::vector<Monomial>& monomials,
                                     const std::string& prefix);
  /// m^T S m with S >= 0 over `basis`; entries of S are new variables.
  AffinePolynomial NewSosPolynomial(const std::vector<Monomial>& basis,
                                    const std::string& prefix);

  /// Requires expr in Sigma. The Gram basis defaults to all monomials of
  /// degree <= ceil(deg(expr) / 2).
  int AddSosConstraint(const AffinePolynomial& expr,
                       std::optional<int> half_degree = std::nullopt);
  void SetObjective(const LinearExpr& objective) { objective_ = objective; }

  struct Compiled;
  /// Throws std::invalid_argument when a constraint's degree exceeds twice
  /// its half-degree bound.
  Compiled Compile() const;
  SosSolution Solve(const SdpOptions& options = {}) const;

  struct Compiled {
    SdpProblem sdp;
    /// Structurally infeasible (a coefficient equation reduced to 0 = c != 0).
    bool infeasible = false;
    double objective_constant = 0.0;
    /// Each decision variable as an affine function of the SDP variables y.
    std::vector<LinearExpr> decision_in_y;
    struct Block {
      int constraint = 0;
      std::vector<Monomial> basis;
      /// Upper-triangle Gram entries (row-major, i <= j) affine in y.
      std::vector<LinearExpr> entries;
    };
    std::vector<Block> gram_blocks;
  };

 private:
  struct SosVar {
    std::vector<Monomial> basis;
    std::vector<int> entry_vars;  // upper triangle, row-major
  };
  struct Constraint {
    AffinePolynomial expr;
    int half_degree = 0;
  };

  int num_vars_ = 0;
  std::vector<std::string> names_;
  std::vector<int> nonneg_;
  std::vector<SosVar> sos_vars_;
  std::vector<Constraint> constraints_;
  LinearExpr objective_;
};

/// Result of one of the named SOS programs.
struct SosBound {
  double value = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  int level = 0;  // relaxation order k where applicable
  double certificate_residual = 0.0;
  /// value corrected for the Gram eigenvalue deficit and the coefficient
  /// residual, valid on the unit p-sphere where |x^a| <= 1. For the Nie
  /// program, validated_value - value is the additive slack on that sphere;
  /// the unconstrained program reports value unchanged.
  double validated_value = 0.0;
  std::vector<GramCertificate> grams;
  /// The free multiplier q of the sphere program (zero elsewhere).
  Polynomial multiplier;
  double duality_gap = 0.0;
  int iterations = 0;

  bool ok() const { return status == SdpStatus::Optimal; }
};

/// max y  s.t.  f - y in Sigma. Requires even degree (or constant f).
SosBound UnconstrainedLowerBound(const Polynomial& f, const SdpOptions& options = {});

/// Lower bound on min f_j over {sum x_i^p = 1}:
///   max y  s.t.  f_j - y - q (1 - sum x_i^p) in Sigma,  q free, deg q <= k - p.
SosBound SphereMinBound(const Polynomial& fj, int p, int k,
                        const SdpOptions& options = {});

/// max gamma  s.t.  f_d - gamma * sum x_i^d in Sigma (f_d homogeneous, d even).
SosBound NieBound(const Polynomial& fd, const SdpOptions& options = {});

/// SphereMinBound for each k in an increasing list.
std::vector<SosBound> ConvergenceSweep(const Polynomial& fj, int p,
                                       const std::vector<int>& k_list,
                                       const SdpOptions& options = {});

}  // namespace polymin
