#include "polymin/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace polymin {
namespace {

// Repeated multiplication; every evaluation path in the library goes through
// this so that the same inputs give bit-identical sums.
inline double IntPow(double base, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

template <typename T>
double EvaluateImpl(const Polynomial& f, std::span<const T> x) {
  if (static_cast<int>(x.size()) != f.num_vars()) {
    throw std::invalid_argument("Evaluate: point has " +
                                std::to_string(x.size()) +
                                " coordinates, polynomial has " +
                                std::to_string(f.num_vars()) + " variables");
  }
  double sum = 0.0;
  for (const auto& [m, c] : f.terms()) {
    double v = c;
    for (int i = 0; i < f.num_vars(); ++i) {
      if (m[i] != 0) v *= IntPow(static_cast<double>(x[i]), m[i]);
    }
    sum += v;
  }
  return sum;
}

void EnumerateExponents(int num_vars, int degree, int var, std::vector<int>& cur,
                        std::vector<Monomial>& out) {
  if (var == num_vars - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    EnumerateExponents(num_vars, degree - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

Monomial::Monomial(int num_vars) : exponents_(num_vars, 0) {
  if (num_vars < 0) throw std::invalid_argument("Monomial: negative arity");
}

Monomial::Monomial(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::Unit(int num_vars, int i, int power) {
  std::vector<int> e(num_vars, 0);
  e.at(i) = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.num_vars() != num_vars()) {
    throw std::invalid_argument("Monomial product: arity mismatch");
  }
  std::vector<int> e(exponents_);
  for (int i = 0; i < num_vars(); ++i) e[i] += other.exponents_[i];
  return Monomial(std::move(e));
}

std::vector<Monomial> MonomialsUpToDegree(int num_vars, int max_degree,
                                          int min_degree) {
  std::vector<Monomial> out;
  if (num_vars == 0) {
    if (min_degree <= 0 && max_degree >= 0) out.emplace_back(0);
    return out;
  }
  std::vector<int> cur(num_vars, 0);
  for (int d = std::max(min_degree, 0); d <= max_degree; ++d) {
    EnumerateExponents(num_vars, d, 0, cur, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Polynomial::Polynomial(int num_vars, const TermMap& terms)
    : num_vars_(num_vars) {
  for (const auto& [m, c] : terms) {
    if (m.num_vars() != num_vars) {
      throw std::invalid_argument("Polynomial: monomial arity mismatch");
    }
    if (c != 0.0) terms_.emplace(m, c);
  }
}

Polynomial Polynomial::Constant(int num_vars, double value) {
  Polynomial p(num_vars);
  p.AddTerm(Monomial(num_vars), value);
  return p;
}

Polynomial Polynomial::Variable(int num_vars, int i) {
  Polynomial p(num_vars);
  p.AddTerm(Monomial::Unit(num_vars, i), 1.0);
  return p;
}

std::optional<int> Polynomial::degree() const {
  if (terms_.empty()) return std::nullopt;
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  const int d = terms_.begin()->first.degree();
  return std::all_of(terms_.begin(), terms_.end(),
                     [d](const auto& t) { return t.first.degree() == d; });
}

void Polynomial::AddTerm(const Monomial& m, double c) {
  if (m.num_vars() != num_vars_) {
    throw std::invalid_argument("AddTerm: monomial arity mismatch");
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::CheckArity(const Polynomial& other) const {
  if (other.num_vars_ != num_vars_) {
    throw std::invalid_argument("Polynomial arithmetic: arity mismatch (" +
                                std::to_string(num_vars_) + " vs " +
                                std::to_string(other.num_vars_) + ")");
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r(*this);
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckArity(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckArity(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.CheckArity(b);
  Polynomial r(a.num_vars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) r.AddTerm(ma * mb, ca * cb);
  }
  return r;
}

Polynomial pow(const Polynomial& base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("pow: negative exponent");
  Polynomial r = Polynomial::Constant(base.num_vars(), 1.0);
  for (int k = 0; k < exponent; ++k) r = r * base;
  return r;
}

double Evaluate(const Polynomial& f, std::span<const double> x) {
  return EvaluateImpl(f, x);
}

double Evaluate(const Polynomial& f, std::span<const std::int64_t> x) {
  return EvaluateImpl(f, x);
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& f)
    : num_vars_(f.num_vars()) {
  coefficients_.reserve(f.num_terms());
  exponents_.reserve(f.num_terms() * num_vars_);
  for (const auto& [m, c] : f.terms()) {
    coefficients_.push_back(c);
    for (int i = 0; i < num_vars_; ++i) exponents_.push_back(m[i]);
    max_exponent_total_ = std::max(max_exponent_total_, m.degree());
  }
}

double CompiledPolynomial::operator()(std::span<const double> x) const {
  double sum = 0.0;
  const int* e = exponents_.data();
  for (double c : coefficients_) {
    double v = c;
    for (int i = 0; i < num_vars_; ++i, ++e) {
      if (*e != 0) v *= IntPow(x[i], *e);
    }
    sum += v;
  }
  return sum;
}

double CompiledPolynomial::operator()(std::span<const std::int64_t> x) const {
  double buf[16];
  std::vector<double> heap;
  double* xs = buf;
  if (num_vars_ > 16) {
    heap.resize(num_vars_);
    xs = heap.data();
  }
  for (int i = 0; i < num_vars_; ++i) xs[i] = static_cast<double>(x[i]);
  return (*this)(std::span<const double>(xs, num_vars_));
}

std::vector<HomogeneousComponent> HomogeneousComponents(const Polynomial& f) {
  const auto d = f.degree();
  if (!d) return {};
  std::vector<HomogeneousComponent> out;
  out.reserve(*d + 1);
  for (int j = 0; j <= *d; ++j) out.push_back({j, Polynomial(f.num_vars())});
  for (const auto& [m, c] : f.terms()) out[m.degree()].poly.AddTerm(m, c);
  return out;
}

Polynomial LeadingForm(const Polynomial& f) {
  const auto d = f.degree();
  if (!d) throw std::invalid_argument("LeadingForm: zero polynomial");
  Polynomial lf(f.num_vars());
  for (const auto& [m, c] : f.terms()) {
    if (m.degree() == *d) lf.AddTerm(m, c);
  }
  return lf;
}

double OneNorm(const Polynomial& f) {
  double s = 0.0;
  for (const auto& [m, c] : f.terms()) s += std::abs(c);
  return s;
}

Polynomial Derivative(const Polynomial& f, int i) {
  Polynomial g(f.num_vars());
  for (const auto& [m, a] : f.terms()) {
    if (m[i] == 0) continue;
    std::vector<int> e(m.exponents().begin(), m.exponents().end());
    --e[i];
    g.AddTerm(Monomial(std::move(e)), a * m[i]);
  }
  return g;
}

Polynomial FixPrefix(const Polynomial& f, std::span<const std::int64_t> r) {
  const int n = f.num_vars();
  const int m = static_cast<int>(r.size());
  if (m > n) throw std::invalid_argument("FixPrefix: prefix longer than n");
  if (m == 0) return f;
  Polynomial out(n - m);
  for (const auto& [mono, c] : f.terms()) {
    double v = c;
    for (int i = 0; i < m; ++i) {
      if (mono[i] != 0) v *= IntPow(static_cast<double>(r[i]), mono[i]);
    }
    std::vector<int> rest(mono.exponents().begin() + m,
                          mono.exponents().end());
    out.AddTerm(Monomial(std::move(rest)), v);
  }
  return out;
}

Polynomial ShiftedMonomial(std::span<const double> h, const Monomial& alpha) {
  const int n = alpha.num_vars();
  if (static_cast<int>(h.size()) != n) {
    throw std::invalid_argument("ShiftedMonomial: shift has wrong length");
  }
  Polynomial result = Polynomial::Constant(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const int e = 2 * alpha[i];
    if (e == 0) continue;
    // (X_i - h_i)^e = sum_k C(e,k) X_i^k (-h_i)^(e-k)
    Polynomial factor(n);
    double binom = 1.0;
    for (int k = 0; k <= e; ++k) {
      if (k > 0) binom = binom * (e - k + 1) / k;
      factor.AddTerm(Monomial::Unit(n, i, k), binom * IntPow(-h[i], e - k));
    }
    result = result * factor;
  }
  return result;
}

Polynomial Translate(const Polynomial& f, std::span<const double> c) {
  const int n = f.num_vars();
  if (static_cast<int>(c.size()) != n) throw std::invalid_argument("Translate: wrong length");
  Polynomial result(n);
  for (const auto& [alpha, a] : f.terms()) {
    Polynomial term = Polynomial::Constant(n, a);
    for (int i = 0; i < n; ++i) {
      const int e = alpha[i];
      if (e == 0) continue;
      // (X_i + c_i)^e = sum_k C(e,k) X_i^k c_i^(e-k)
      Polynomial factor(n);
      double binom = 1.0;
      for (int k = 0; k <= e; ++k) {
        if (k > 0) binom = binom * (e - k + 1) / k;
        factor.AddTerm(Monomial::Unit(n, i, k), binom * IntPow(c[i], e - k));
      }
      term = term * factor;
    }
    result += term;
  }
  return result;
}

}  // namespace polymin
