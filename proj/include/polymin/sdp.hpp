#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace polymin {

/// Symmetric matrix stored as upper-triangle triplets (row <= col). An
/// off-diagonal entry (r, c, v) stands for v at both (r, c) and (c, r).
class SparseSymMatrix {
 public:
  struct Entry {
    int row;
    int col;
    double value;
  };

  SparseSymMatrix() = default;
  explicit SparseSymMatrix(int size) : size_(size) {}

  int size() const { return size_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Accumulates v into (i, j) and its mirror; indices may come in any order.
  void Add(int i, int j, double v);
  /// Merges duplicate positions and drops exact zeros.
  void Compress();
  Eigen::MatrixXd ToDense() const;
  double FrobeniusNorm() const;

 private:
  int size_ = 0;
  std::vector<Entry> entries_;
};

/// One linear matrix inequality  constant + sum_i y_i * F_i  >= 0  (PSD).
/// Only variables with a nonzero coefficient matrix are listed. Size-1
/// blocks encode scalar inequalities.
struct LmiBlock {
  int size = 0;
  SparseSymMatrix constant;
  std::vector<std::pair<int, SparseSymMatrix>> coefficients;
};

/// maximize  b^T y  subject to  F_k0 + sum_i y_i F_ki >= 0  for every block k.
struct SdpProblem {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<LmiBlock> blocks;

  /// Throws std::invalid_argument when sizes or indices are inconsistent.
  void Validate() const;
  /// F_k(y) as a dense matrix.
  Eigen::MatrixXd EvaluateBlock(int k, const Eigen::VectorXd& y) const;
};

enum class SdpStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NumericalFailure,
  IterationLimit,
};

std::string_view ToString(SdpStatus status);
std::ostream& operator<<(std::ostream& os, SdpStatus status);

struct SdpSolution;

struct SdpOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iters = 200;
  /// Assemble the Schur complement with OpenMP. A single solve is otherwise
  /// sequential; leave this off when solves already run in parallel.
  bool parallel_schur = false;
  /// Called with every finished solve, possibly from several threads at once.
  std::function<void(const SdpProblem&, const SdpSolution&)> observer;
};

struct SdpIterate {
  double objective = 0.0;       // b^T y
  double dual_objective = 0.0;  // tr(F_0 X)
  double complementarity = 0.0; // tr(Z X) >= 0
  double step_primal = 0.0;
  double step_dual = 0.0;
  /// ||b - A(X)|| / (1 + ||b||), the equality residual of the X side.
  double x_infeasibility = 0.0;
  /// ||F(y) - Z|| / (1 + ||F_0||), the slack residual of the y side.
  double y_infeasibility = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Eigen::VectorXd y;
  double objective_value = 0.0;  // b^T y
  double dual_objective = 0.0;   // tr(F_0 X), an upper bound when X feasible
  /// F_k(y) per block; PSD up to feas_tol on Optimal.
  std::vector<Eigen::MatrixXd> block_witnesses;
  /// Dual matrices X_k >= 0 with tr(F_ki X) summed over k equal to -b_i.
  std::vector<Eigen::MatrixXd> dual_matrices;
  /// |b^T y - tr(F_0 X)| / (1 + |b^T y| + |tr(F_0 X)|).
  double duality_gap = 0.0;
  /// max(0, -min eigenvalue of F_k(y)) over blocks.
  double lmi_violation = 0.0;
  /// ||A(X) + b|| / (1 + ||b||).
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::vector<SdpIterate> history;
};

/// Primal-dual interior point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start).
SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Writes the problem in sparse SDPA format as  min c^T x  s.t.
/// sum x_i G_i - G_0 >= 0, i.e. c = -b, G_i = F_i, G_0 = -F_0.
void WriteSdpa(const SdpProblem& problem, std::ostream& os);

/// Schur complement M_ij = sum_k tr(F_ki Z_k^-1 F_kj X_k), the dominant cost
/// of each interior point iteration. Both variants produce bit-identical
/// matrices; the serial one is the reference.
class SchurAssembler {
 public:
  explicit SchurAssembler(const SdpProblem& problem);

  int num_vars() const { return num_vars_; }
  void AssembleSerial(const std::vector<Eigen::MatrixXd>& z_inv,
                      const std::vector<Eigen::MatrixXd>& x,
                      Eigen::MatrixXd& m) const;
  void AssembleParallel(const std::vector<Eigen::MatrixXd>& z_inv,
                        const std::vector<Eigen::MatrixXd>& x,
                        Eigen::MatrixXd& m) const;

 private:
  struct Elementary {
    int row;
    int col;
    double value;
  };
  struct BlockTerms {
    std::vector<int> vars;
    std::vector<std::vector<Elementary>> entries;
  };

  double PairTrace(const std::vector<Elementary>& a,
                   const std::vector<Elementary>& b,
                   const Eigen::MatrixXd& z_inv,
                   const Eigen::MatrixXd& x) const;
  void Symmetrize(Eigen::MatrixXd& m) const;

  int num_vars_ = 0;
  std::vector<BlockTerms> blocks_;
};

}  // namespace polymin
