#include "polymin/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace polymin {

void SparseSymMatrix::Add(int i, int j, double v) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= size_) {
    throw std::out_of_range("SparseSymMatrix::Add: index out of range");
  }
  entries_.push_back({i, j, v});
}

void SparseSymMatrix::Compress() {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  std::vector<Entry> merged;
  for (const Entry& e : entries_) {
    if (!merged.empty() && merged.back().row == e.row &&
        merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.value == 0.0; });
  entries_ = std::move(merged);
}

Eigen::MatrixXd SparseSymMatrix::ToDense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size_, size_);
  for (const Entry& e : entries_) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

double SparseSymMatrix::FrobeniusNorm() const { return ToDense().norm(); }

void SdpProblem::Validate() const {
  if (num_vars < 0) throw std::invalid_argument("SdpProblem: num_vars < 0");
  if (objective.size() != num_vars) {
    throw std::invalid_argument("SdpProblem: objective length != num_vars");
  }
  if (blocks.empty()) throw std::invalid_argument("SdpProblem: no blocks");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const LmiBlock& b = blocks[k];
    if (b.size <= 0) throw std::invalid_argument("SdpProblem: empty block");
    if (b.constant.size() != b.size) {
      throw std::invalid_argument("SdpProblem: constant size mismatch in block " +
                                  std::to_string(k));
    }
    std::vector<bool> seen(num_vars, false);
    for (const auto& [var, mat] : b.coefficients) {
      if (var < 0 || var >= num_vars) {
        throw std::invalid_argument("SdpProblem: variable index out of range");
      }
      if (seen[var]) {
        throw std::invalid_argument("SdpProblem: variable listed twice in block");
      }
      seen[var] = true;
      if (mat.size() != b.size) {
        throw std::invalid_argument("SdpProblem: coefficient size mismatch");
      }
    }
  }
}

Eigen::MatrixXd SdpProblem::EvaluateBlock(int k, const Eigen::VectorXd& y) const {
  const LmiBlock& b = blocks.at(k);
  Eigen::MatrixXd m = b.constant.ToDense();
  for (const auto& [var, mat] : b.coefficients) {
    for (const auto& e : mat.entries()) {
      m(e.row, e.col) += y[var] * e.value;
      if (e.row != e.col) m(e.col, e.row) += y[var] * e.value;
    }
  }
  return m;
}

std::string_view ToString(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unbounded: return "unbounded";
    case SdpStatus::NumericalFailure: return "numerical_failure";
    case SdpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

std::ostream& operator<<(std::ostream& os, SdpStatus status) {
  return os << ToString(status);
}

// ---------------------------------------------------------------------------
// Schur complement

SchurAssembler::SchurAssembler(const SdpProblem& problem)
    : num_vars_(problem.num_vars) {
  blocks_.reserve(problem.blocks.size());
  for (const LmiBlock& b : problem.blocks) {
    BlockTerms terms;
    for (const auto& [var, mat] : b.coefficients) {
      std::vector<Elementary> el;
      for (const auto& e : mat.entries()) {
        el.push_back({e.row, e.col, e.value});
        if (e.row != e.col) el.push_back({e.col, e.row, e.value});
      }
      if (el.empty()) continue;
      terms.vars.push_back(var);
      terms.entries.push_back(std::move(el));
    }
    blocks_.push_back(std::move(terms));
  }
}

// tr(A Z^-1 B X) with A = sum v E_pq and B = sum w E_st:
// tr(E_pq Z^-1 E_st X) = Z^-1(q, s) X(t, p).
double SchurAssembler::PairTrace(const std::vector<Elementary>& a,
                                 const std::vector<Elementary>& b,
                                 const Eigen::MatrixXd& z_inv,
                                 const Eigen::MatrixXd& x) const {
  double sum = 0.0;
  for (const Elementary& ea : a) {
    for (const Elementary& eb : b) {
      sum += ea.value * eb.value * z_inv(ea.col, eb.row) * x(eb.col, ea.row);
    }
  }
  return sum;
}

// Each unordered pair within a block is stored once, in whichever
// orientation the block order produced; fold both triangles together.
void SchurAssembler::Symmetrize(Eigen::MatrixXd& m) const {
  for (int i = 0; i < num_vars_; ++i) {
    for (int j = i + 1; j < num_vars_; ++j) {
      const double s = m(i, j) + m(j, i);
      m(i, j) = s;
      m(j, i) = s;
    }
  }
}

void SchurAssembler::AssembleSerial(const std::vector<Eigen::MatrixXd>& z_inv,
                                    const std::vector<Eigen::MatrixXd>& x,
                                    Eigen::MatrixXd& m) const {
  m.setZero(num_vars_, num_vars_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const BlockTerms& bt = blocks_[k];
    const int nv = static_cast<int>(bt.vars.size());
    for (int i = 0; i < nv; ++i) {
      for (int j = i; j < nv; ++j) {
        m(bt.vars[i], bt.vars[j]) +=
            PairTrace(bt.entries[i], bt.entries[j], z_inv[k], x[k]);
      }
    }
  }
  Symmetrize(m);
}

void SchurAssembler::AssembleParallel(const std::vector<Eigen::MatrixXd>& z_inv,
                                      const std::vector<Eigen::MatrixXd>& x,
                                      Eigen::MatrixXd& m) const {
  m.setZero(num_vars_, num_vars_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const BlockTerms& bt = blocks_[k];
    const int nv = static_cast<int>(bt.vars.size());
    // A variable occurs at most once per block, so thread i owns row vars[i].
#pragma omp parallel for schedule(dynamic, 4) if (nv > 32)
    for (int i = 0; i < nv; ++i) {
      for (int j = i; j < nv; ++j) {
        m(bt.vars[i], bt.vars[j]) +=
            PairTrace(bt.entries[i], bt.entries[j], z_inv[k], x[k]);
      }
    }
  }
  Symmetrize(m);
}

// ---------------------------------------------------------------------------
// Interior point method

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

// Operator view of the problem in the convention
//   min a^T y  s.t.  A^T(y) - C = Z >= 0,   max tr(C X)  s.t.  A(X) = a
// with C = -F_0, A_i = F_i and a = -b.
class Operators {
 public:
  explicit Operators(const SdpProblem& p) : p_(p) {
    for (const LmiBlock& b : p.blocks) c_.push_back(-b.constant.ToDense());
  }

  const Blocks& C() const { return c_; }

  Eigen::VectorXd A(const Blocks& g) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p_.num_vars);
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      for (const auto& [var, mat] : p_.blocks[k].coefficients) {
        double s = 0.0;
        for (const auto& e : mat.entries()) {
          s += e.row == e.col ? e.value * g[k](e.row, e.row)
                              : e.value * (g[k](e.row, e.col) + g[k](e.col, e.row));
        }
        out[var] += s;
      }
    }
    return out;
  }

  Blocks AT(const Eigen::VectorXd& y) const {
    Blocks out;
    for (const LmiBlock& b : p_.blocks) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.size, b.size);
      for (const auto& [var, mat] : b.coefficients) {
        for (const auto& e : mat.entries()) {
          m(e.row, e.col) += y[var] * e.value;
          if (e.row != e.col) m(e.col, e.row) += y[var] * e.value;
        }
      }
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  const SdpProblem& p_;
  Blocks c_;
};

double Trace(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * b[k].array()).sum();
  return s;
}

double FrobNorm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

// Largest alpha with M + alpha dM >= 0 given chol(M); +inf if unbounded.
double MaxStep(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& d) {
  Eigen::MatrixXd w = chol.matrixL().solve(d);
  w = chol.matrixL().solve(w.transpose().eval());
  w = 0.5 * (w + w.transpose()).eval();
  const double lmin = w.rows() == 1
                          ? w(0, 0)
                          : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                w, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double MinEigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

bool FactorAll(const Blocks& m, std::vector<Eigen::LLT<Eigen::MatrixXd>>& out) {
  out.clear();
  for (const auto& b : m) {
    out.emplace_back(b);
    if (out.back().info() != Eigen::Success) return false;
  }
  return true;
}

SdpSolution Solve(const SdpProblem& problem, const SdpOptions& options) {
  problem.Validate();
  const Operators ops(problem);
  const SchurAssembler schur(problem);
  const int m = problem.num_vars;
  const int nb = static_cast<int>(problem.blocks.size());
  const Eigen::VectorXd a = -problem.objective;
  const Blocks& c = ops.C();

  SdpSolution sol;
  sol.y = Eigen::VectorXd::Zero(m);

  // Variables that appear in no block: fixed at zero unless they carry
  // objective weight, in which case the objective is unbounded along them.
  std::vector<bool> active(m, false);
  std::vector<double> coeff_norm(m, 0.0);
  for (const LmiBlock& b : problem.blocks) {
    for (const auto& [var, mat] : b.coefficients) {
      const double nrm = mat.FrobeniusNorm();
      if (nrm > 0.0) active[var] = true;
      coeff_norm[var] = std::hypot(coeff_norm[var], nrm);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!active[i] && a[i] != 0.0) {
      sol.status = SdpStatus::Unbounded;
      return sol;
    }
  }

  // Starting point as in CSDP: scaled identities.
  int total = 0;
  for (const LmiBlock& b : problem.blocks) total += b.size;
  const double c_norm = FrobNorm(c);
  double alpha0 = 0.0, beta0 = c_norm;
  for (int i = 0; i < m; ++i) {
    alpha0 = std::max(alpha0, total * (1.0 + std::abs(a[i])) / (1.0 + coeff_norm[i]));
    beta0 = std::max(beta0, coeff_norm[i]);
  }
  alpha0 = std::max(alpha0, 1.0);
  beta0 = (1.0 + beta0) / std::sqrt(static_cast<double>(total));
  Blocks x, z;
  for (const LmiBlock& b : problem.blocks) {
    x.push_back(10.0 * alpha0 * Eigen::MatrixXd::Identity(b.size, b.size));
    z.push_back(10.0 * beta0 * Eigen::MatrixXd::Identity(b.size, b.size));
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  const double b_norm = problem.objective.norm();
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_x, chol_z;
  Blocks z_inv(nb);
  Eigen::MatrixXd schur_m;
  int stalled = 0;

  auto finish = [&](SdpStatus status, int iters) {
    sol.status = status;
    sol.iterations = iters;
    sol.y = y;
    sol.objective_value = problem.objective.dot(y);
    sol.dual_objective = -Trace(c, x);
    sol.duality_gap = std::abs(sol.dual_objective - sol.objective_value) /
                      (1.0 + std::abs(sol.objective_value) +
                       std::abs(sol.dual_objective));
    sol.block_witnesses.clear();
    sol.lmi_violation = 0.0;
    for (int k = 0; k < nb; ++k) {
      sol.block_witnesses.push_back(problem.EvaluateBlock(k, y));
      sol.lmi_violation =
          std::max(sol.lmi_violation, -MinEigenvalue(sol.block_witnesses.back()));
    }
    sol.dual_matrices = x;
    sol.dual_infeasibility = (a - ops.A(x)).norm() / (1.0 + b_norm);
    return sol;
  };

  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (!FactorAll(z, chol_z) || !FactorAll(x, chol_x)) {
      return finish(SdpStatus::NumericalFailure, iter);
    }
    for (int k = 0; k < nb; ++k) {
      z_inv[k] = chol_z[k].solve(Eigen::MatrixXd::Identity(z[k].rows(), z[k].rows()));
      z_inv[k] = 0.5 * (z_inv[k] + z_inv[k].transpose()).eval();
    }

    const Eigen::VectorXd ax = ops.A(x);
    const Eigen::VectorXd rp = a - ax;
    Blocks fd = ops.AT(y);
    for (int k = 0; k < nb; ++k) fd[k] -= c[k] + z[k];

    const double obj = problem.objective.dot(y);
    const double dual_obj = -Trace(c, x);
    const double comp = Trace(x, z);
    const double mu = comp / total;
    const double rel_gap =
        std::abs(dual_obj - obj) / (1.0 + std::abs(obj) + std::abs(dual_obj));
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf = FrobNorm(fd) / (1.0 + c_norm);

    if (rel_gap <= options.gap_tol && pinf <= options.feas_tol &&
        dinf <= options.feas_tol) {
      finish(SdpStatus::Optimal, iter);
      if (sol.lmi_violation <= options.feas_tol) return sol;
    }

    // Infeasibility certificates (CSDP-style ratio tests).
    const double tr_cx = Trace(c, x);
    if (tr_cx > 0.0 && ax.norm() / tr_cx < options.feas_tol) {
      return finish(SdpStatus::Infeasible, iter);
    }
    if (obj > 0.0) {
      Blocks ray = ops.AT(y);
      for (int k = 0; k < nb; ++k) ray[k] -= z[k];
      if (FrobNorm(ray) / obj < options.feas_tol) {
        return finish(SdpStatus::Unbounded, iter);
      }
    }

    if (options.parallel_schur) {
      schur.AssembleParallel(z_inv, x, schur_m);
    } else {
      schur.AssembleSerial(z_inv, x, schur_m);
    }
    for (int i = 0; i < m; ++i) {
      if (!active[i]) schur_m(i, i) = 1.0;
    }
    // Near the optimum M can lose definiteness to rounding when the optimal
    // face is degenerate; a small diagonal shift keeps the direction usable.
    Eigen::LLT<Eigen::MatrixXd> chol_m(schur_m);
    const double diag_scale = std::max(1.0, schur_m.diagonal().cwiseAbs().maxCoeff());
    for (double shift = 1e-14; chol_m.info() != Eigen::Success; shift *= 100.0) {
      if (shift > 1e-6) return finish(SdpStatus::NumericalFailure, iter);
      Eigen::MatrixXd shifted = schur_m;
      shifted.diagonal().array() += shift * diag_scale;
      chol_m.compute(shifted);
    }
    // Two rounds of iterative refinement against the unshifted M recover the
    // accuracy lost to ill-conditioning late in the run.
    auto solve_m = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
      Eigen::VectorXd dy = chol_m.solve(rhs);
      for (int r = 0; r < 2; ++r) dy += chol_m.solve(rhs - schur_m * dy);
      for (int i = 0; i < m; ++i) {
        if (!active[i]) dy[i] = 0.0;
      }
      return dy;
    };

    // Z^-1 Fd X is shared by predictor and corrector.
    Blocks zfx(nb);
    for (int k = 0; k < nb; ++k) zfx[k] = z_inv[k] * fd[k] * x[k];
    const Eigen::VectorXd a_zfx = ops.A(zfx);

    auto directions = [&](const Eigen::VectorXd& rhs, double sigma_mu,
                          const Blocks* corr, Eigen::VectorXd& dy, Blocks& dx,
                          Blocks& dz) {
      dy = solve_m(rhs);
      dz = ops.AT(dy);
      dx.resize(nb);
      for (int k = 0; k < nb; ++k) {
        dz[k] += fd[k];
        Eigen::MatrixXd d = -x[k] - z_inv[k] * dz[k] * x[k];
        if (sigma_mu != 0.0) d += sigma_mu * z_inv[k];
        if (corr != nullptr) d -= (*corr)[k];
        dx[k] = 0.5 * (d + d.transpose());
      }
    };
    auto step_lengths = [&](const Blocks& dx, const Blocks& dz, double& ap,
                            double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, MaxStep(chol_x[k], dx[k]));
        ad = std::min(ad, MaxStep(chol_z[k], dz[k]));
      }
    };

    // Predictor (affine scaling).
    Eigen::VectorXd dy;
    Blocks dx, dz;
    directions(-a - a_zfx, 0.0, nullptr, dy, dx, dz);
    double ap = 0.0, ad = 0.0;
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double comp_aff = 0.0;
    for (int k = 0; k < nb; ++k) {
      comp_aff += ((x[k] + ap * dx[k]).array() * (z[k] + ad * dz[k]).array()).sum();
    }
    const double sigma = std::clamp(std::pow(comp_aff / comp, 3.0), 0.0, 1.0);

    // Corrector with second-order term Z^-1 dZa dXa.
    Blocks corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = z_inv[k] * dz[k] * dx[k];
    const Eigen::VectorXd zinv_trace = ops.A(z_inv);
    const Eigen::VectorXd rhs =
        sigma * mu * zinv_trace - a - a_zfx - ops.A(corr);
    directions(rhs, sigma * mu, &corr, dy, dx, dz);
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, 0.95 * ap);
    ad = std::min(1.0, 0.95 * ad);

    for (int k = 0; k < nb; ++k) {
      x[k] += ap * dx[k];
      z[k] += ad * dz[k];
      x[k] = 0.5 * (x[k] + x[k].transpose()).eval();
      z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
    }
    y += ad * dy;

    sol.history.push_back({obj, dual_obj, comp, ap, ad, pinf, dinf});
    stalled = (ap < 1e-10 && ad < 1e-10) ? stalled + 1 : 0;
    if (stalled >= 3 || !y.allFinite()) {
      return finish(SdpStatus::NumericalFailure, iter + 1);
    }
  }
  return finish(SdpStatus::IterationLimit, options.max_iters);
}

}  // namespace

SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options) {
  SdpSolution sol = Solve(problem, options);
  if (options.observer) options.observer(problem, sol);
  return sol;
}

void WriteSdpa(const SdpProblem& problem, std::ostream& os) {
  problem.Validate();
  os << std::setprecision(17);
  os << problem.num_vars << "\n" << problem.blocks.size() << "\n";
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    os << (k ? " " : "") << problem.blocks[k].size;
  }
  os << "\n";
  for (int i = 0; i < problem.num_vars; ++i) {
    os << (i ? " " : "") << -problem.objective[i];
  }
  os << "\n";
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const LmiBlock& b = problem.blocks[k];
    SparseSymMatrix f0 = b.constant;
    f0.Compress();
    for (const auto& e : f0.entries()) {
      os << 0 << " " << k + 1 << " " << e.row + 1 << " " << e.col + 1 << " "
         << -e.value << "\n";
    }
    for (const auto& [var, mat] : b.coefficients) {
      SparseSymMatrix fi = mat;
      fi.Compress();
      for (const auto& e : fi.entries()) {
        os << var + 1 << " " << k + 1 << " " << e.row + 1 << " " << e.col + 1
           << " " << e.value << "\n";
      }
    }
  }
}

}  // namespace polymin
