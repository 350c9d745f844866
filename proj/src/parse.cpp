#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "polymin/poly.hpp"

namespace polymin {
namespace {

constexpr int kMaxExponent = 1 << 16;

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::size_t pos() const { return pos_; }

  void SkipSpace() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int Peek() {
    SkipSpace();
    return pos_ < text_.size() ? text_[pos_] : -1;
  }

  bool Accept(char c) {
    if (Peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool AtNumber() {
    const int c = Peek();
    return c == '.' || std::isdigit(c);
  }

  double Number() {
    SkipSpace();
    const std::size_t start = pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_,
                                     text_.data() + text_.size(), value,
                                     std::chars_format::general);
    if (ec == std::errc::result_out_of_range) {
      throw ParseError("coefficient out of range", start);
    }
    if (ec != std::errc() || !std::isfinite(value)) {
      throw ParseError("malformed coefficient", start);
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  int Integer(const char* what) {
    SkipSpace();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      throw ParseError(std::string("expected ") + what, start);
    }
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_,
                                     text_.data() + text_.size(), value);
    if (ec == std::errc::result_out_of_range ||
        value > std::numeric_limits<int>::max()) {
      throw ParseError(std::string(what) + " overflow", start);
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return static_cast<int>(value);
  }

  [[noreturn]] void Fail(const std::string& what) {
    SkipSpace();
    throw ParseError(what, pos_);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

// factor := 'x' <index> ['^' <exponent>], folded into `exponents`.
void ParseFactor(Lexer& lex, int num_vars, std::vector<int>& exponents,
                 int* max_index) {
  if (!lex.Accept('x')) lex.Fail("expected variable 'x<k>'");
  const std::size_t index_pos = lex.pos();
  const int k = lex.Integer("variable index");
  if (k < 1) throw ParseError("variable indices start at 1", index_pos);
  if (max_index != nullptr) *max_index = std::max(*max_index, k);
  int e = 1;
  if (lex.Accept('^')) {
    const std::size_t exp_pos = lex.pos();
    e = lex.Integer("exponent");
    if (e > kMaxExponent) throw ParseError("exponent overflow", exp_pos);
  }
  if (max_index != nullptr) return;
  if (k > num_vars) {
    throw ParseError("variable x" + std::to_string(k) + " exceeds n = " +
                         std::to_string(num_vars),
                     index_pos);
  }
  exponents[k - 1] += e;
  if (exponents[k - 1] > kMaxExponent) {
    throw ParseError("exponent overflow", index_pos);
  }
}

// Shared driver: with max_index set, only scans variable indices.
Polynomial ParseImpl(std::string_view text, int num_vars, int* max_index) {
  Lexer lex(text);
  Polynomial f(num_vars);
  double sign = 1.0;
  if (lex.Accept('-')) {
    sign = -1.0;
  } else {
    lex.Accept('+');
  }
  if (lex.Peek() < 0) lex.Fail("empty polynomial");
  while (true) {
    std::vector<int> exponents(max_index ? 0 : num_vars, 0);
    double coeff = 1.0;
    if (lex.AtNumber()) {
      coeff = lex.Number();
      while (lex.Accept('*')) ParseFactor(lex, num_vars, exponents, max_index);
    } else {
      ParseFactor(lex, num_vars, exponents, max_index);
      while (lex.Accept('*')) ParseFactor(lex, num_vars, exponents, max_index);
    }
    if (!max_index) f.AddTerm(Monomial(std::move(exponents)), sign * coeff);
    const int next = lex.Peek();
    if (next < 0) break;
    if (next == '+') {
      sign = 1.0;
    } else if (next == '-') {
      sign = -1.0;
    } else {
      lex.Fail(std::string("unexpected character '") +
               static_cast<char>(next) + "'");
    }
    lex.Accept(static_cast<char>(next));
  }
  return f;
}

std::string ShortestDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error("parse error at offset " + std::to_string(position) +
                         ": " + what),
      position_(position) {}

Polynomial ParsePolynomial(std::string_view text, int num_vars) {
  if (num_vars < 0) throw std::invalid_argument("ParsePolynomial: n < 0");
  return ParseImpl(text, num_vars, nullptr);
}

int MaxVariableIndex(std::string_view text) {
  int max_index = 0;
  ParseImpl(text, 0, &max_index);
  return max_index;
}

std::string FormatPolynomial(const Polynomial& f) {
  if (f.is_zero()) return "0";
  std::string out;
  bool first = true;
  // Highest degree first reads naturally; the term map itself is unaffected.
  for (auto it = f.terms().rbegin(); it != f.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    out += ShortestDouble(std::abs(c));
    for (int i = 0; i < m.num_vars(); ++i) {
      if (m[i] == 0) continue;
      out += "*x" + std::to_string(i + 1);
      if (m[i] > 1) out += "^" + std::to_string(m[i]);
    }
  }
  return out;
}

}  // namespace polymin
