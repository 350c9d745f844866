#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polymin {

/// A multi-index alpha = (alpha_1, ..., alpha_n) of nonnegative exponents.
///
/// Monomials are ordered graded-lexicographically: first by total degree,
/// then lexicographically on the exponent vector. Every polynomial in this
/// library iterates and accumulates its terms in that order, which makes
/// floating results reproducible.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(int num_vars);
  explicit Monomial(std::vector<int> exponents);

  /// x_i^power in n variables (0-based i).
  static Monomial Unit(int num_vars, int i, int power = 1);

  int num_vars() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[i]; }
  std::span<const int> exponents() const { return exponents_; }
  bool is_constant() const { return degree_ == 0; }

  Monomial operator*(const Monomial& other) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exponents_ == b.exponents_;
  }
  friend std::strong_ordering operator<=>(const Monomial& a,
                                          const Monomial& b) {
    if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
    return a.exponents_ <=> b.exponents_;
  }

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// All monomials in `num_vars` variables with min_degree <= |alpha| <=
/// max_degree, in graded-lex order.
std::vector<Monomial> MonomialsUpToDegree(int num_vars, int max_degree,
                                          int min_degree = 0);

/// Sparse real polynomial in a fixed number of variables.
///
/// The term map never stores zero coefficients, so the zero polynomial is the
/// empty map and its degree is reported as std::nullopt (minus infinity).
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double>;

  explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}
  Polynomial(int num_vars, const TermMap& terms);

  static Polynomial Constant(int num_vars, double value);
  /// The coordinate polynomial X_i (0-based).
  static Polynomial Variable(int num_vars, int i);

  int num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  std::optional<int> degree() const;
  double coefficient(const Monomial& m) const;
  bool is_homogeneous() const;

  /// Adds c * X^m, removing the entry if the coefficient cancels to zero.
  void AddTerm(const Monomial& m, double c);

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    return a += b;
  }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    return a -= b;
  }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

 private:
  void CheckArity(const Polynomial& other) const;

  int num_vars_ = 0;
  TermMap terms_;
};

Polynomial pow(const Polynomial& base, int exponent);

/// Sum of a_alpha * prod x_i^alpha_i, accumulated in graded-lex term order.
double Evaluate(const Polynomial& f, std::span<const double> x);
double Evaluate(const Polynomial& f, std::span<const std::int64_t> x);

/// Flattened polynomial for hot evaluation loops (brute force, sampling).
/// Produces bit-identical results to Evaluate().
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const Polynomial& f);

  int num_vars() const { return num_vars_; }
  int degree() const { return max_exponent_total_; }
  double operator()(std::span<const double> x) const;
  double operator()(std::span<const std::int64_t> x) const;

 private:
  int num_vars_ = 0;
  int max_exponent_total_ = 0;
  std::vector<double> coefficients_;
  std::vector<int> exponents_;  // row-major, num_terms x num_vars
};

struct HomogeneousComponent {
  int degree = 0;
  Polynomial poly;
};

/// f_0, ..., f_d with f = sum_j f_j; empty components are returned as zero
/// polynomials. The zero polynomial yields an empty list.
std::vector<HomogeneousComponent> HomogeneousComponents(const Polynomial& f);

/// The highest-degree homogeneous component. Throws for f = 0.
Polynomial LeadingForm(const Polynomial& f);

/// sum |a_alpha|.
double OneNorm(const Polynomial& f);

/// d f / d x_i (0-based i).
Polynomial Derivative(const Polynomial& f, int i);

/// Substitutes x_1 = r_1, ..., x_m = r_m and returns a polynomial in the
/// remaining n - m variables.
Polynomial FixPrefix(const Polynomial& f, std::span<const std::int64_t> r);

/// f(X + c).
Polynomial Translate(const Polynomial& f, std::span<const double> c);

/// Dense expansion of prod_i (X_i - h_i)^(2 alpha_i).
Polynomial ShiftedMonomial(std::span<const double> h, const Monomial& alpha);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses the term-list grammar
///   poly   := ['+'|'-'] term (('+'|'-') term)*
///   term   := coeff ['*' factor ('*' factor)*] | factor ('*' factor)*
///   factor := 'x' <index> ['^' <exponent>]
/// with 1-based variable indices, whitespace anywhere between tokens, and '#'
/// starting a comment that runs to the end of the line.
Polynomial ParsePolynomial(std::string_view text, int num_vars);

/// Largest variable index referenced in `text` (0 if none). Used to infer n.
int MaxVariableIndex(std::string_view text);

/// Canonical text form that ParsePolynomial() reads back bit-exactly.
std::string FormatPolynomial(const Polynomial& f);

}  // namespace polymin
