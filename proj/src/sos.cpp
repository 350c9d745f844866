#include "polymin/sos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polymin {

MonomialBasis MonomialBasis::Full(int num_vars, int max_degree) {
  return {num_vars, max_degree, MonomialsUpToDegree(num_vars, max_degree)};
}

// ---------------------------------------------------------------------------
// LinearExpr / AffinePolynomial

LinearExpr LinearExpr::Var(int index, double scale) {
  LinearExpr e;
  if (scale != 0.0) e.coeffs[index] = scale;
  return e;
}

double LinearExpr::Evaluate(const std::vector<double>& values) const {
  double s = constant;
  for (const auto& [i, c] : coeffs) s += c * values.at(i);
  return s;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  constant += other.constant;
  for (const auto& [i, c] : other.coeffs) {
    auto [it, inserted] = coeffs.try_emplace(i, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) coeffs.erase(it);
    }
  }
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  if (s == 0.0) {
    *this = LinearExpr{};
    return *this;
  }
  constant *= s;
  for (auto& [i, c] : coeffs) c *= s;
  return *this;
}

namespace {

bool IsZero(const LinearExpr& e) { return e.constant == 0.0 && e.coeffs.empty(); }

}  // namespace

AffinePolynomial::AffinePolynomial(const Polynomial& p) : num_vars_(p.num_vars()) {
  for (const auto& [m, c] : p.terms()) {
    LinearExpr e;
    e.constant = c;
    terms_.emplace(m, e);
  }
}

std::optional<int> AffinePolynomial::degree() const {
  if (terms_.empty()) return std::nullopt;
  return terms_.rbegin()->first.degree();
}

void AffinePolynomial::AddTerm(const Monomial& m, const LinearExpr& c) {
  if (m.num_vars() != num_vars_) {
    throw std::invalid_argument("AffinePolynomial: monomial arity mismatch");
  }
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (IsZero(it->second)) terms_.erase(it);
}

AffinePolynomial& AffinePolynomial::operator+=(const AffinePolynomial& other) {
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

AffinePolynomial& AffinePolynomial::operator-=(const AffinePolynomial& other) {
  for (const auto& [m, c] : other.terms_) AddTerm(m, c * -1.0);
  return *this;
}

AffinePolynomial& AffinePolynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

AffinePolynomial operator*(const AffinePolynomial& a, const Polynomial& p) {
  if (a.num_vars_ != p.num_vars()) {
    throw std::invalid_argument("AffinePolynomial product: arity mismatch");
  }
  AffinePolynomial r(a.num_vars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mp, cp] : p.terms()) r.AddTerm(ma * mp, ca * cp);
  }
  return r;
}

AffinePolynomial AffinePolynomial::Scaled(int var, const Polynomial& p) {
  AffinePolynomial r(p.num_vars());
  for (const auto& [m, c] : p.terms()) r.AddTerm(m, LinearExpr::Var(var, c));
  return r;
}

Polynomial AffinePolynomial::Evaluate(const std::vector<double>& values) const {
  Polynomial p(num_vars_);
  for (const auto& [m, c] : terms_) p.AddTerm(m, c.Evaluate(values));
  return p;
}

// ---------------------------------------------------------------------------
// SosProgram

int SosProgram::NewFree(std::string name) {
  names_.push_back(std::move(name));
  return num_decision_vars() - 1;
}

int SosProgram::NewNonneg(std::string name) {
  const int v = NewFree(std::move(name));
  nonneg_.push_back(v);
  return v;
}

AffinePolynomial SosProgram::NewFreePolynomial(const std::vector<Monomial>& monomials,
                                               const std::string& prefix) {
  AffinePolynomial p(num_vars_);
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    p.AddTerm(monomials[i], LinearExpr::Var(NewFree(prefix + std::to_string(i))));
  }
  return p;
}

AffinePolynomial SosProgram::NewSosPolynomial(const std::vector<Monomial>& basis,
                                              const std::string& prefix) {
  SosVar sv;
  sv.basis = basis;
  AffinePolynomial p(num_vars_);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i; j < basis.size(); ++j) {
      const int v = NewFree(prefix + "[" + std::to_string(i) + "," +
                            std::to_string(j) + "]");
      sv.entry_vars.push_back(v);
      p.AddTerm(basis[i] * basis[j], LinearExpr::Var(v, i == j ? 1.0 : 2.0));
    }
  }
  sos_vars_.push_back(std::move(sv));
  return p;
}

int SosProgram::AddSosConstraint(const AffinePolynomial& expr,
                                 std::optional<int> half_degree) {
  if (expr.num_vars() != num_vars_) {
    throw std::invalid_argument("AddSosConstraint: arity mismatch");
  }
  const int deg = expr.degree().value_or(0);
  const int half = half_degree.value_or((deg + 1) / 2);
  if (half < 0 || deg > 2 * half) {
    throw std::invalid_argument("AddSosConstraint: degree " + std::to_string(deg) +
                                " exceeds Gram half-degree " + std::to_string(half));
  }
  constraints_.push_back({expr, half});
  return static_cast<int>(constraints_.size()) - 1;
}

namespace {

struct GramPair {
  int block;
  int i;
  int j;
  double weight;  // 1 on the diagonal, 2 off it
};

// Iteratively removes basis elements b whose diagonal entry Q_bb is forced to
// zero: the coefficient of b^2 is identically zero and (b, b) is the only
// pair producing b^2. A PSD Gram matrix then has a zero row at b.
std::vector<Monomial> DiagonalReduction(std::vector<Monomial> basis,
                                        const AffinePolynomial& expr) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<Monomial, int> pair_count;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = i; j < basis.size(); ++j) ++pair_count[basis[i] * basis[j]];
    }
    std::vector<Monomial> kept;
    for (const Monomial& b : basis) {
      const Monomial sq = b * b;
      const bool zero_coeff = !expr.terms().contains(sq);
      if (zero_coeff && pair_count[sq] == 1) {
        changed = true;
      } else {
        kept.push_back(b);
      }
    }
    basis = std::move(kept);
  }
  return basis;
}

bool HasOnlyEvenDegrees(const AffinePolynomial& expr) {
  return std::all_of(expr.terms().begin(), expr.terms().end(),
                     [](const auto& t) { return t.first.degree() % 2 == 0; });
}

void AddToBlock(LmiBlock& block, std::map<int, SparseSymMatrix>& coeffs, int i,
                int j, const LinearExpr& e) {
  if (e.constant != 0.0) block.constant.Add(i, j, e.constant);
  for (const auto& [var, c] : e.coeffs) {
    auto it = coeffs.try_emplace(var, SparseSymMatrix(block.size)).first;
    it->second.Add(i, j, c);
  }
}

}  // namespace

SosProgram::Compiled SosProgram::Compile() const {
  const int num_dec = num_decision_vars();
  Compiled out;

  // Gram blocks per constraint and the coefficient equations they induce.
  struct Equation {
    LinearExpr rhs;  // coefficient of the expression (in decision variables)
    std::vector<int> pairs;
  };
  std::vector<GramPair> pairs;
  std::vector<std::map<Monomial, Equation>> equations(constraints_.size());
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const Constraint& con = constraints_[c];
    std::vector<Monomial> basis =
        DiagonalReduction(MonomialsUpToDegree(num_vars_, con.half_degree), con.expr);
    std::vector<std::vector<Monomial>> parts;
    if (HasOnlyEvenDegrees(con.expr)) {
      std::vector<Monomial> even, odd;
      for (const Monomial& m : basis) (m.degree() % 2 ? odd : even).push_back(m);
      for (auto* part : {&even, &odd}) {
        if (!part->empty()) parts.push_back(std::move(*part));
      }
    } else if (!basis.empty()) {
      parts.push_back(std::move(basis));
    }
    auto& eqs = equations[c];
    for (const auto& [m, coeff] : con.expr.terms()) eqs[m].rhs = coeff;
    for (auto& part : parts) {
      const int block = static_cast<int>(out.gram_blocks.size());
      for (int i = 0; i < static_cast<int>(part.size()); ++i) {
        for (int j = i; j < static_cast<int>(part.size()); ++j) {
          eqs[part[i] * part[j]].pairs.push_back(static_cast<int>(pairs.size()));
          pairs.push_back({block, i, j, i == j ? 1.0 : 2.0});
        }
      }
      out.gram_blocks.push_back({static_cast<int>(c), std::move(part), {}});
    }
  }

  // Pivot selection: the diagonal pair if the monomial is a square, else the
  // first pair. Equations without pairs constrain decision variables only.
  std::vector<int> pivot_of_pair(pairs.size(), -1);  // index into pivot_eqs
  std::vector<std::pair<const Equation*, int>> pivot_eqs;  // (equation, pivot pair)
  std::vector<const LinearExpr*> dec_rows;
  for (const auto& eqs : equations) {
    for (const auto& [m, eq] : eqs) {
      if (eq.pairs.empty()) {
        if (!IsZero(eq.rhs)) dec_rows.push_back(&eq.rhs);
        continue;
      }
      int piv = eq.pairs.front();
      for (int pi : eq.pairs) {
        if (pairs[pi].i == pairs[pi].j) {
          piv = pi;
          break;
        }
      }
      pivot_of_pair[piv] = static_cast<int>(pivot_eqs.size());
      pivot_eqs.emplace_back(&eq, piv);
    }
  }

  // Gauss-Jordan elimination on the decision-only rows rhs = 0.
  std::vector<int> dec_pivot_row(num_dec, -1);
  Eigen::MatrixXd rows(static_cast<int>(dec_rows.size()), num_dec + 1);
  rows.setZero();
  for (int r = 0; r < rows.rows(); ++r) {
    rows(r, num_dec) = dec_rows[r]->constant;
    for (const auto& [v, c] : dec_rows[r]->coeffs) rows(r, v) = c;
  }
  {
    int r = 0;
    for (int col = 0; col < num_dec && r < rows.rows(); ++col) {
      int best = -1;
      double best_abs = 0.0;
      for (int i = r; i < rows.rows(); ++i) {
        const double a = std::abs(rows(i, col));
        const double scale = rows.row(i).head(num_dec).cwiseAbs().maxCoeff();
        if (a > 1e-12 * scale && a > best_abs) {
          best = i;
          best_abs = a;
        }
      }
      if (best < 0) continue;
      rows.row(r).swap(rows.row(best));
      rows.row(r) /= rows(r, col);
      for (int i = 0; i < rows.rows(); ++i) {
        if (i != r && rows(i, col) != 0.0) rows.row(i) -= rows(i, col) * rows.row(r);
      }
      dec_pivot_row[col] = r;
      ++r;
    }
    for (int i = r; i < rows.rows(); ++i) {
      const double lhs = rows.row(i).head(num_dec).cwiseAbs().maxCoeff();
      if (lhs <= 1e-12 && std::abs(rows(i, num_dec)) > 1e-9) out.infeasible = true;
    }
  }

  // SDP variables: free decision variables, then non-pivot Gram entries.
  int num_y = 0;
  std::vector<int> y_of_dec(num_dec, -1);
  for (int v = 0; v < num_dec; ++v) {
    if (dec_pivot_row[v] < 0) y_of_dec[v] = num_y++;
  }
  out.decision_in_y.resize(num_dec);
  for (int v = 0; v < num_dec; ++v) {
    if (y_of_dec[v] >= 0) {
      out.decision_in_y[v] = LinearExpr::Var(y_of_dec[v]);
      continue;
    }
    const int r = dec_pivot_row[v];
    LinearExpr e;
    e.constant = -rows(r, num_dec);
    for (int u = 0; u < num_dec; ++u) {
      if (u != v && rows(r, u) != 0.0) {
        if (y_of_dec[u] < 0) continue;  // other pivots are zero in RREF
        e += LinearExpr::Var(y_of_dec[u], -rows(r, u));
      }
    }
    out.decision_in_y[v] = e;
  }
  auto substitute = [&](const LinearExpr& in_dec) {
    LinearExpr e;
    e.constant = in_dec.constant;
    for (const auto& [v, c] : in_dec.coeffs) e += out.decision_in_y[v] * c;
    return e;
  };

  std::vector<LinearExpr> pair_expr(pairs.size());
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    if (pivot_of_pair[pi] < 0) pair_expr[pi] = LinearExpr::Var(num_y++);
  }
  for (const auto& [eq, piv] : pivot_eqs) {
    // w_piv Q_piv + sum w Q_other = rhs
    LinearExpr e = substitute(eq->rhs);
    for (int pi : eq->pairs) {
      if (pi != piv) e += pair_expr[pi] * -pairs[pi].weight;
    }
    pair_expr[piv] = e * (1.0 / pairs[piv].weight);
  }
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    auto& entries = out.gram_blocks[pairs[pi].block].entries;
    entries.push_back(pair_expr[pi]);
  }

  // LMI blocks; constant blocks are checked here and left out of the SDP.
  SdpProblem& sdp = out.sdp;
  sdp.num_vars = num_y;
  auto emit = [&](int size, auto&& entry_at) {
    LmiBlock block;
    block.size = size;
    block.constant = SparseSymMatrix(size);
    std::map<int, SparseSymMatrix> coeffs;
    for (int i = 0; i < size; ++i) {
      for (int j = i; j < size; ++j) AddToBlock(block, coeffs, i, j, entry_at(i, j));
    }
    block.constant.Compress();
    for (auto& [var, mat] : coeffs) {
      mat.Compress();
      if (!mat.empty()) block.coefficients.emplace_back(var, std::move(mat));
    }
    if (block.coefficients.empty()) {
      const Eigen::MatrixXd m = block.constant.ToDense();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12) out.infeasible = true;
      return;
    }
    sdp.blocks.push_back(std::move(block));
  };
  for (const auto& gb : out.gram_blocks) {
    const int s = static_cast<int>(gb.basis.size());
    std::vector<int> row_start(s + 1, 0);
    for (int i = 0; i < s; ++i) row_start[i + 1] = row_start[i] + (s - i);
    emit(s, [&](int i, int j) -> const LinearExpr& {
      return gb.entries[row_start[i] + (j - i)];
    });
  }
  for (const SosVar& sv : sos_vars_) {
    const int s = static_cast<int>(sv.basis.size());
    std::vector<int> row_start(s + 1, 0);
    for (int i = 0; i < s; ++i) row_start[i + 1] = row_start[i] + (s - i);
    emit(s, [&](int i, int j) -> const LinearExpr& {
      return out.decision_in_y[sv.entry_vars[row_start[i] + (j - i)]];
    });
  }
  for (int v : nonneg_) {
    emit(1, [&](int, int) -> const LinearExpr& { return out.decision_in_y[v]; });
  }

  const LinearExpr obj = substitute(objective_);
  out.objective_constant = obj.constant;
  sdp.objective = Eigen::VectorXd::Zero(num_y);
  for (const auto& [v, c] : obj.coeffs) sdp.objective[v] = c;
  return out;
}

SosSolution SosProgram::Solve(const SdpOptions& options) const {
  const Compiled comp = Compile();
  SosSolution sol;
  if (comp.infeasible) {
    sol.status = SdpStatus::Infeasible;
    return sol;
  }
  Eigen::VectorXd y;
  if (comp.sdp.blocks.empty()) {
    // No matrix constraints remain: only a linear objective in free variables.
    y = Eigen::VectorXd::Zero(comp.sdp.num_vars);
    sol.status = comp.sdp.objective.isZero() ? SdpStatus::Optimal : SdpStatus::Unbounded;
  } else {
    sol.sdp = SolveSdp(comp.sdp, options);
    sol.status = sol.sdp.status;
    y = sol.sdp.y;
  }
  const std::vector<double> yv(y.data(), y.data() + y.size());
  sol.objective = comp.objective_constant + comp.sdp.objective.dot(y);
  sol.values.resize(num_decision_vars());
  for (int v = 0; v < num_decision_vars(); ++v) {
    sol.values[v] = comp.decision_in_y[v].Evaluate(yv);
  }

  std::vector<Polynomial> realized(constraints_.size(), Polynomial(num_vars_));
  sol.min_gram_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& gb : comp.gram_blocks) {
    const int s = static_cast<int>(gb.basis.size());
    Eigen::MatrixXd q(s, s);
    int idx = 0;
    for (int i = 0; i < s; ++i) {
      for (int j = i; j < s; ++j) {
        q(i, j) = q(j, i) = gb.entries[idx++].Evaluate(yv);
        realized[gb.constraint].AddTerm(gb.basis[i] * gb.basis[j],
                                        (i == j ? 1.0 : 2.0) * q(i, j));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    sol.min_gram_eigenvalue = std::min(sol.min_gram_eigenvalue, lmin);
    sol.gram_deficit += std::min(0.0, lmin) * s;
    sol.grams.push_back({gb.constraint, gb.basis, std::move(q)});
  }
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const Polynomial diff = constraints_[c].expr.Evaluate(sol.values) - realized[c];
    for (const auto& [m, v] : diff.terms()) {
      sol.certificate_residual = std::max(sol.certificate_residual, std::abs(v));
      sol.residual_l1 += std::abs(v);
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Named programs

namespace {

SosBound ToBound(const SosSolution& s) {
  SosBound b;
  b.value = s.objective;
  b.status = s.status;
  b.certificate_residual = s.certificate_residual;
  b.validated_value = s.objective + s.gram_deficit - s.residual_l1;
  b.grams = s.grams;
  b.duality_gap = s.sdp.duality_gap;
  b.iterations = s.sdp.iterations;
  return b;
}

SosBound ExactBound(int num_vars, double value) {
  SosBound b;
  b.value = value;
  b.validated_value = value;
  b.status = SdpStatus::Optimal;
  b.multiplier = Polynomial(num_vars);
  return b;
}

}  // namespace

SosBound UnconstrainedLowerBound(const Polynomial& f, const SdpOptions& options) {
  const int n = f.num_vars();
  const int d = f.degree().value_or(0);
  if (d == 0) return ExactBound(n, f.coefficient(Monomial(n)));
  if (d % 2 != 0) {
    throw std::invalid_argument("UnconstrainedLowerBound: odd degree " +
                                std::to_string(d));
  }
  SosProgram prog(n);
  const int y = prog.NewFree("y");
  AffinePolynomial expr(f);
  expr.AddTerm(Monomial(n), LinearExpr::Var(y, -1.0));
  prog.AddSosConstraint(expr, d / 2);
  prog.SetObjective(LinearExpr::Var(y));
  SosBound b = ToBound(prog.Solve(options));
  b.validated_value = b.value;
  b.multiplier = Polynomial(n);
  return b;
}

SosBound SphereMinBound(const Polynomial& fj, int p, int k, const SdpOptions& options) {
  const int n = fj.num_vars();
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument("SphereMinBound: p must be even and >= 2");
  }
  if (!fj.is_homogeneous()) {
    throw std::invalid_argument("SphereMinBound: f_j must be homogeneous");
  }
  if (fj.is_zero()) {
    SosBound b = ExactBound(n, 0.0);
    b.level = k;
    return b;
  }
  const int j = *fj.degree();
  const bool even = j % 2 == 0;

  SosProgram prog(n);
  const int y = prog.NewFree("y");
  std::vector<Monomial> q_monomials;
  if (k - p >= 0) {
    for (const Monomial& m : MonomialsUpToDegree(n, k - p)) {
      if (!even || m.degree() % 2 == 0) q_monomials.push_back(m);
    }
  }
  const AffinePolynomial q = prog.NewFreePolynomial(q_monomials, "q");
  Polynomial sphere = Polynomial::Constant(n, 1.0);
  for (int i = 0; i < n; ++i) sphere.AddTerm(Monomial::Unit(n, i, p), -1.0);

  AffinePolynomial expr(fj);
  expr.AddTerm(Monomial(n), LinearExpr::Var(y, -1.0));
  expr -= q * sphere;
  int top = j;
  if (!q_monomials.empty()) top = std::max(top, q_monomials.back().degree() + p);
  prog.AddSosConstraint(expr, (top + 1) / 2);
  prog.SetObjective(LinearExpr::Var(y));

  const SosSolution s = prog.Solve(options);
  SosBound b = ToBound(s);
  b.level = k;
  b.multiplier = q.Evaluate(s.values.empty() ? std::vector<double>(prog.num_decision_vars(), 0.0)
                                             : s.values);
  return b;
}

SosBound NieBound(const Polynomial& fd, const SdpOptions& options) {
  const int n = fd.num_vars();
  const int d = fd.degree().value_or(0);
  if (!fd.is_homogeneous() || d == 0 || d % 2 != 0) {
    throw std::invalid_argument("NieBound: needs a nonzero form of even degree");
  }
  SosProgram prog(n);
  const int gamma = prog.NewFree("gamma");
  AffinePolynomial expr(fd);
  for (int i = 0; i < n; ++i) {
    expr.AddTerm(Monomial::Unit(n, i, d), LinearExpr::Var(gamma, -1.0));
  }
  prog.AddSosConstraint(expr, d / 2);
  prog.SetObjective(LinearExpr::Var(gamma));
  SosBound b = ToBound(prog.Solve(options));
  b.level = d;
  b.multiplier = Polynomial(n);
  return b;
}

std::vector<SosBound> ConvergenceSweep(const Polynomial& fj, int p,
                                       const std::vector<int>& k_list,
                                       const SdpOptions& options) {
  if (!std::is_sorted(k_list.begin(), k_list.end())) {
    throw std::invalid_argument("ConvergenceSweep: k_list must be increasing");
  }
  std::vector<SosBound> out;
  out.reserve(k_list.size());
  for (int k : k_list) out.push_back(SphereMinBound(fj, p, k, options));
  return out;
}

}  // namespace polymin
