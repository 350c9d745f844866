#include "polymin/underest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "polymin/sos.hpp"

namespace polymin {

std::vector<std::int64_t> RoundHalfAway(std::span<const double> h) {
  std::vector<std::int64_t> r(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) r[i] = std::llround(h[i]);
  return r;
}

int Underestimator::degree(double tol) const {
  int d = 0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (std::abs(b[i]) > tol) d = std::max(d, 2 * exponents[i].degree());
  }
  return d;
}

Polynomial Underestimator::ToPolynomial() const {
  Polynomial g(num_vars());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (b[i] != 0.0) g += b[i] * ShiftedMonomial(h, exponents[i]);
  }
  return g;
}

namespace {

template <typename T>
double EvalImpl(const Underestimator& g, std::span<const T> x) {
  if (x.size() != g.h.size()) throw std::invalid_argument("EvalG: arity mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < g.exponents.size(); ++t) {
    double term = g.b[t];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = static_cast<double>(x[i]) - g.h[i];
      for (int e = 0; e < g.exponents[t][static_cast<int>(i)]; ++e) term *= diff * diff;
    }
    s += term;
  }
  return s;
}

}  // namespace

double EvalG(const Underestimator& g, std::span<const double> x) { return EvalImpl(g, x); }

double EvalG(const Underestimator& g, std::span<const std::int64_t> x) {
  return EvalImpl(g, x);
}

double MinOverIntegerCompletion(const Underestimator& g,
                                std::span<const std::int64_t> prefix) {
  std::vector<std::int64_t> x = RoundHalfAway(g.h);
  std::copy(prefix.begin(), prefix.end(), x.begin());
  return EvalG(g, std::span<const std::int64_t>(x));
}

std::vector<Monomial> DefaultExponents(int num_vars, int degree) {
  return MonomialsUpToDegree(num_vars, degree / 2);
}

namespace {

std::vector<double> Weights(std::span<const double> h, const std::vector<Monomial>& exps) {
  const std::vector<std::int64_t> r = RoundHalfAway(h);
  std::vector<double> w;
  w.reserve(exps.size());
  for (const Monomial& a : exps) {
    double v = 1.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double diff = static_cast<double>(r[i]) - h[i];
      for (int e = 0; e < a[static_cast<int>(i)]; ++e) v *= diff * diff;
    }
    w.push_back(v);
  }
  return w;
}

UnderestimateResult Solve(const Polynomial& f, std::span<const double> h,
                          std::optional<double> z, int sigma_degree,
                          const std::vector<Monomial>& exponents_in,
                          const UnderestOptions& options) {
  const int n = f.num_vars();
  if (static_cast<int>(h.size()) != n) throw std::invalid_argument("underestimator: |h| != n");
  const int d = f.degree().value_or(0);
  if (d % 2 != 0) throw std::invalid_argument("underestimator: odd degree");
  const std::vector<Monomial> exps =
      exponents_in.empty() ? DefaultExponents(n, d) : exponents_in;

  UnderestimateResult res;
  Underestimator& g = res.g;
  g.kind = z ? UnderestimatorKind::Sls : UnderestimatorKind::Glob;
  g.h.assign(h.begin(), h.end());
  g.exponents = exps;
  g.w = Weights(h, exps);
  g.z = z.value_or(0.0);
  g.sigma_degree = z ? sigma_degree : -1;

  // The program is posed in Y = X - round(h) with the constant f(round(h))
  // moved into b_0, which keeps the coefficients moderate when h lies far
  // from the origin. Translation maps sums of squares to sums of squares.
  const std::vector<std::int64_t> r = RoundHalfAway(h);
  std::vector<double> shift(n), back(n), local_h(n);
  for (int i = 0; i < n; ++i) {
    shift[i] = static_cast<double>(r[i]);
    back[i] = -shift[i];
    local_h[i] = h[i] - shift[i];
  }
  Polynomial local = Translate(f, shift);
  const auto constant_it =
      std::find_if(exps.begin(), exps.end(), [](const Monomial& m) { return m.is_constant(); });
  const bool has_constant = constant_it != exps.end();
  const double offset = has_constant ? local.coefficient(Monomial(n)) : 0.0;
  local.AddTerm(Monomial(n), -offset);

  SosProgram prog(n);
  std::vector<int> bvar;
  AffinePolynomial expr(local);
  LinearExpr objective;
  int top = d;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    const std::string name = "b" + std::to_string(i);
    const int v = exps[i].is_constant() ? prog.NewFree(name) : prog.NewNonneg(name);
    bvar.push_back(v);
    expr -= AffinePolynomial::Scaled(v, ShiftedMonomial(local_h, exps[i]));
    objective += LinearExpr::Var(v, g.w[i]);
    top = std::max(top, 2 * exps[i].degree());
  }
  AffinePolynomial sigma(n);
  if (z && sigma_degree >= 0) {
    const std::vector<Monomial> basis = MonomialsUpToDegree(n, sigma_degree / 2);
    sigma = prog.NewSosPolynomial(basis, "s");
    expr -= sigma * (Polynomial::Constant(n, *z - offset) - local);
    top = std::max(top, d + 2 * (sigma_degree / 2));
  }
  prog.AddSosConstraint(expr, (top + 1) / 2);
  prog.SetObjective(objective);

  const SosSolution sol = prog.Solve(options.sdp);
  res.status = sol.status;
  res.certificate_residual = sol.certificate_residual;
  const bool blocks_hold = sol.sdp.block_witnesses.empty() ||
                           sol.sdp.lmi_violation <= options.sdp.feas_tol;
  const bool finite = std::all_of(sol.values.begin(), sol.values.end(),
                                  [](double v) { return std::isfinite(v); });
  res.certified = !sol.values.empty() && finite && sol.status != SdpStatus::Infeasible &&
                  sol.status != SdpStatus::Unbounded && blocks_hold &&
                  sol.certificate_residual <= 1e-6;
  g.b.assign(exps.size(), 0.0);
  if (!sol.values.empty()) {
    for (std::size_t i = 0; i < exps.size(); ++i) g.b[i] = sol.values[bvar[i]];
    if (has_constant) g.b[constant_it - exps.begin()] += offset;
    res.sigma = Translate(sigma.Evaluate(sol.values), back);
  } else {
    res.sigma = Polynomial(n);
  }
  res.value = EvalG(g, std::span<const std::int64_t>(r));
  res.lower_bound = res.value - options.safety;
  return res;
}

}  // namespace

UnderestimateResult SolveGlob(const Polynomial& f, std::span<const double> h,
                              const std::vector<Monomial>& exponents,
                              const UnderestOptions& options) {
  return Solve(f, h, std::nullopt, -1, exponents, options);
}

UnderestimateResult SolveSls(const Polynomial& f, std::span<const double> h, double z,
                             int sigma_degree, const std::vector<Monomial>& exponents,
                             const UnderestOptions& options) {
  const std::vector<std::int64_t> r = RoundHalfAway(h);
  const double fr = Evaluate(f, std::span<const std::int64_t>(r));
  if (z < fr) {
    throw std::invalid_argument("SolveSls: z below f(round(h))");
  }
  if (sigma_degree < 0) return SolveGlob(f, h, exponents, options);
  return Solve(f, h, z, sigma_degree, exponents, options);
}

std::vector<double> NumericGradient(const Polynomial& f, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + step;
    const double up = Evaluate(f, y);
    y[i] = x[i] - step;
    const double down = Evaluate(f, y);
    y[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

namespace {

Eigen::MatrixXd NumericHessian(const Polynomial& f, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd hess(n, n);
  std::vector<double> y = x;
  for (int i = 0; i < n; ++i) {
    const double step = 1e-4 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + step;
    const std::vector<double> up = NumericGradient(f, y);
    y[i] = x[i] - step;
    const std::vector<double> down = NumericGradient(f, y);
    y[i] = x[i];
    for (int j = 0; j < n; ++j) hess(j, i) = (up[j] - down[j]) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Damped Newton: the Hessian is shifted until positive definite and the step
// is halved until f decreases.
std::vector<double> Descend(const Polynomial& f, std::vector<double> x, int max_iters) {
  const int n = static_cast<int>(x.size());
  double fx = Evaluate(f, x);
  for (int it = 0; it < max_iters; ++it) {
    const std::vector<double> grad = NumericGradient(f, x);
    if (Norm(grad) <= 1e-10 * std::max(1.0, std::abs(fx))) break;
    Eigen::MatrixXd hess = NumericHessian(f, x);
    const Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(grad.data(), n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    const double lmin = es.eigenvalues().minCoeff();
    const double floor = 1e-8 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (lmin < floor) hess.diagonal().array() += floor - lmin;
    const Eigen::VectorXd dir = -hess.ldlt().solve(gv);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) y[i] = x[i] + t * dir[i];
      const double fy = Evaluate(f, y);
      if (fy < fx) {
        x = std::move(y);
        fx = fy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace

std::vector<double> ChooseH(const Polynomial& f, const ChooseHOptions& options) {
  const int n = f.num_vars();
  std::mt19937_64 rng(options.seed);
  const double r = std::max(options.radius, 1e-3);
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(1, options.starts); ++s) {
    std::vector<double> x(n, 0.0);
    if (s > 0) {
      for (double& xi : x) xi = u(rng);
    }
    x = Descend(f, std::move(x), options.max_iters);
    const double v = Evaluate(f, x);
    if (v < best_value) {
      best_value = v;
      best = std::move(x);
    }
  }
  return best;
}

Quality QualityRatio(const Polynomial& f, std::span<const double> h, double g_value,
                     std::span<const std::int64_t> x_star) {
  const double fh = Evaluate(f, h);
  const double den = Evaluate(f, x_star) - fh;
  Quality q;
  if (std::abs(den) <= 1e-12) {
    q.exact = true;
    q.value = q.raw = 1.0;
    return q;
  }
  q.raw = (g_value - fh) / den;
  q.value = std::clamp(q.raw, 0.0, 1.0);
  constexpr double kEps = 1e-6;
  q.clamped = q.raw < -kEps || q.raw > 1.0 + kEps;
  return q;
}

nlohmann::json ToJson(const Underestimator& g) {
  nlohmann::json exps = nlohmann::json::array();
  for (const Monomial& m : g.exponents) {
    exps.push_back(std::vector<int>(m.exponents().begin(), m.exponents().end()));
  }
  nlohmann::json j = {{"kind", g.kind == UnderestimatorKind::Glob ? "glob" : "sls"},
                      {"h", g.h},
                      {"J", exps},
                      {"b", g.b},
                      {"w", g.w}};
  if (g.kind == UnderestimatorKind::Sls) {
    j["z"] = g.z;
    j["sigma_degree"] = g.sigma_degree;
  }
  return j;
}

Underestimator UnderestimatorFromJson(const nlohmann::json& j) {
  Underestimator g;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "glob" && kind != "sls") {
    throw std::invalid_argument("underestimator kind must be glob or sls");
  }
  g.kind = kind == "glob" ? UnderestimatorKind::Glob : UnderestimatorKind::Sls;
  g.h = j.at("h").get<std::vector<double>>();
  for (const auto& e : j.at("J")) g.exponents.emplace_back(e.get<std::vector<int>>());
  g.b = j.at("b").get<std::vector<double>>();
  g.w = j.at("w").get<std::vector<double>>();
  if (g.b.size() != g.exponents.size() || g.w.size() != g.exponents.size()) {
    throw std::invalid_argument("underestimator: J, b and w sizes differ");
  }
  for (const Monomial& m : g.exponents) {
    if (m.num_vars() != g.num_vars()) {
      throw std::invalid_argument("underestimator: exponent arity differs from h");
    }
  }
  if (g.kind == UnderestimatorKind::Sls) {
    g.z = j.at("z").get<double>();
    g.sigma_degree = j.at("sigma_degree").get<int>();
  }
  return g;
}

nlohmann::json ToJson(const UnderestimateResult& r) {
  return {{"g", ToJson(r.g)},
          {"value", r.value},
          {"lower_bound", r.lower_bound},
          {"status", ToString(r.status)},
          {"certificate_residual", r.certificate_residual},
          {"certified", r.certified},
          {"sigma", FormatPolynomial(r.sigma)}};
}

}  // namespace polymin
