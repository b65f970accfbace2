#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matwaring/core.hpp"

namespace matwaring::freealg {

/// A monomial: variable indices (1-based) multiplied left to right.
using Word = std::vector<int>;

/// Shorter words first, then lexicographic.
struct GradedLexLess {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

/// Element of the free algebra C<X1, X2, ...> in canonical form: one entry per
/// distinct word, no zero coefficients.
class NcPolynomial {
 public:
  using Terms = std::map<Word, Complex, GradedLexLess>;

  NcPolynomial() = default;

  static NcPolynomial constant(Complex c) {
    NcPolynomial p;
    p.add_term(Word{}, c);
    return p;
  }

  static NcPolynomial variable(int index) {
    NcPolynomial p;
    p.add_term(Word{index}, Complex(1.0, 0.0));
    return p;
  }

  void add_term(const Word& word, Complex coeff) {
    auto [it, inserted] = terms_.try_emplace(word, Complex(0.0, 0.0));
    it->second += coeff;
    // -0.0 would print as "-0"
    it->second = Complex(it->second.real() + 0.0, it->second.imag() + 0.0);
    if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int num_vars() const {
    int m = 0;
    for (const auto& [word, c] : terms_)
      for (int v : word) m = std::max(m, v);
    return m;
  }

  int degree() const { return terms_.empty() ? 0 : static_cast<int>(terms_.rbegin()->first.size()); }

  /// Every word has length m = num_vars() and contains each of X1..Xm once.
  bool is_multilinear() const {
    const int m = num_vars();
    if (m == 0 || terms_.empty()) return false;
    for (const auto& [word, c] : terms_) {
      if (static_cast<int>(word.size()) != m) return false;
      Word sorted = word;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < m; ++i)
        if (sorted[static_cast<std::size_t>(i)] != i + 1) return false;
    }
    return true;
  }

  friend NcPolynomial operator+(const NcPolynomial& a, const NcPolynomial& b) {
    NcPolynomial r = a;
    for (const auto& [w, c] : b.terms_) r.add_term(w, c);
    return r;
  }

  friend NcPolynomial operator-(const NcPolynomial& a) {
    NcPolynomial r;
    for (const auto& [w, c] : a.terms_) r.add_term(w, -c);
    return r;
  }

  friend NcPolynomial operator-(const NcPolynomial& a, const NcPolynomial& b) { return a + (-b); }

  friend NcPolynomial operator*(const NcPolynomial& a, const NcPolynomial& b) {
    NcPolynomial r;
    for (const auto& [wa, ca] : a.terms_) {
      for (const auto& [wb, cb] : b.terms_) {
        Word w = wa;
        w.insert(w.end(), wb.begin(), wb.end());
        r.add_term(w, ca * cb);
      }
    }
    return r;
  }

  friend NcPolynomial operator*(Complex s, const NcPolynomial& a) { return constant(s) * a; }

  friend bool operator==(const NcPolynomial& a, const NcPolynomial& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

inline NcPolynomial pow(const NcPolynomial& base, unsigned exponent) {
  NcPolynomial r = NcPolynomial::constant(Complex(1.0, 0.0));
  for (unsigned i = 0; i < exponent; ++i) r = r * base;
  return r;
}

inline NcPolynomial commutator(const NcPolynomial& a, const NcPolynomial& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Coefficient magnitude text for a coefficient whose sign has been pulled out.
// Real values print bare; complex values print as "(re+imi)" with re >= 0.
inline std::string format_coeff(Complex c) {
  if (c.imag() == 0.0) return format_double(c.real());
  std::string s = "(" + format_double(c.real());
  s += c.imag() < 0 ? "-" : "+";
  s += format_double(std::abs(c.imag())) + "i)";
  return s;
}

inline std::string format_word(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size();) {
    std::size_t j = i;
    while (j < w.size() && w[j] == w[i]) ++j;
    if (!s.empty()) s += "*";
    s += "X" + std::to_string(w[i]);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

}  // namespace detail

/// Canonical text accepted by parse(); parse(to_string(f)) == f exactly.
inline std::string to_string(const NcPolynomial& f) {
  if (f.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [word, coeff] : f.terms()) {
    // Pull out a sign so that the remaining literal has nonnegative real part.
    const bool negative = coeff.real() < 0.0;
    const Complex mag = negative ? -coeff : coeff;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    const bool unit = mag == Complex(1.0, 0.0);
    if (word.empty()) {
      out += detail::format_coeff(mag);
    } else if (unit) {
      out += detail::format_word(word);
    } else {
      out += detail::format_coeff(mag) + "*" + detail::format_word(word);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' uint)?
//   atom   := var | scalar | '(' expr ')' | '[' expr ',' expr ']'
//   var    := 'X' uint            (uint >= 1)
//   scalar := '(' decimal ('+'|'-') decimal 'i' ')' | decimal

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NcPolynomial parse_all() {
    NcPolynomial p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(ErrorKind::Syntax, std::string("unexpected '") + text_[pos_] + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& msg) const { throw ParseError(kind, pos_, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(ErrorKind::Syntax, std::string("expected '") + c + "' but input ended");
      fail(ErrorKind::Syntax, std::string("expected '") + c + "'");
    }
  }

  bool at_digit() const {
    return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]));
  }

  // Length of a decimal literal starting at `from`, 0 if none.
  std::size_t decimal_length(std::size_t from) const {
    std::size_t i = from;
    auto digit = [&](std::size_t k) { return k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k])); };
    std::size_t int_digits = 0;
    while (digit(i)) ++i, ++int_digits;
    std::size_t frac_digits = 0;
    if (i < text_.size() && text_[i] == '.') {
      std::size_t j = i + 1;
      while (digit(j)) ++j, ++frac_digits;
      if (int_digits + frac_digits == 0) return 0;
      i = j;
    }
    if (int_digits + frac_digits == 0) return 0;
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (digit(j)) {
        while (digit(j)) ++j;
        i = j;
      }
    }
    return i - from;
  }

  double read_decimal() {
    skip_ws();
    const std::size_t len = decimal_length(pos_);
    if (len == 0) fail(ErrorKind::Syntax, "expected a number");
    const std::string lit(text_.substr(pos_, len));
    pos_ += len;
    return std::strtod(lit.c_str(), nullptr);
  }

  unsigned read_uint() {
    skip_ws();
    if (!at_digit()) fail(ErrorKind::Syntax, "expected an unsigned integer");
    unsigned value = 0;
    const auto* first = text_.data() + pos_;
    const auto* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc()) fail(ErrorKind::Syntax, "integer out of range");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  NcPolynomial expr() {
    NcPolynomial acc;
    if (accept('-')) {
      acc = -term();
    } else {
      acc = term();
    }
    while (true) {
      if (accept('+')) {
        acc = acc + term();
      } else if (accept('-')) {
        acc = acc - term();
      } else {
        return acc;
      }
    }
  }

  NcPolynomial term() {
    NcPolynomial acc = factor();
    while (accept('*')) acc = acc * factor();
    return acc;
  }

  NcPolynomial factor() {
    NcPolynomial base = atom();
    if (accept('^')) return pow(base, read_uint());
    return base;
  }

  // After '(' : a complex literal if the lookahead is  decimal (+|-) decimal? 'i'.
  std::optional<Complex> try_complex_literal() {
    std::size_t i = pos_;
    auto ws = [&] {
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
    };
    ws();
    const std::size_t re_len = decimal_length(i);
    if (re_len == 0) return std::nullopt;
    const std::string re_text(text_.substr(i, re_len));
    i += re_len;
    ws();
    if (i >= text_.size() || (text_[i] != '+' && text_[i] != '-')) return std::nullopt;
    const bool negative = text_[i] == '-';
    ++i;
    ws();
    const std::size_t im_len = decimal_length(i);
    if (im_len == 0) {
      if (i < text_.size() && text_[i] == 'i') {
        pos_ = i;
        fail(ErrorKind::MalformedComplex, "imaginary part needs explicit digits");
      }
      return std::nullopt;
    }
    const std::string im_text(text_.substr(i, im_len));
    std::size_t j = i + im_len;
    while (j < text_.size() && std::isspace(static_cast<unsigned char>(text_[j]))) ++j;
    if (j >= text_.size() || text_[j] != 'i') return std::nullopt;
    ++j;
    while (j < text_.size() && std::isspace(static_cast<unsigned char>(text_[j]))) ++j;
    if (j >= text_.size() || text_[j] != ')') {
      pos_ = j;
      fail(ErrorKind::MalformedComplex, "complex literal must close with ')'");
    }
    pos_ = j + 1;
    const double re = std::strtod(re_text.c_str(), nullptr);
    const double im = std::strtod(im_text.c_str(), nullptr);
    return Complex(re, negative ? -im : im);
  }

  NcPolynomial atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ErrorKind::Syntax, "unexpected end of input");
    const char c = text_[pos_];
    if (c == 'X') {
      ++pos_;
      if (!at_digit()) fail(ErrorKind::Syntax, "expected variable index after 'X'");
      const std::size_t at = pos_;
      const unsigned idx = read_uint();
      if (idx == 0) throw ParseError(ErrorKind::InvalidVariable, at, "variable index must be >= 1");
      return NcPolynomial::variable(static_cast<int>(idx));
    }
    if (c == '(') {
      ++pos_;
      if (auto z = try_complex_literal()) return NcPolynomial::constant(*z);
      NcPolynomial inner = expr();
      if (peek('i')) fail(ErrorKind::MalformedComplex, "malformed complex literal");
      expect(')');
      return inner;
    }
    if (c == '[') {
      ++pos_;
      NcPolynomial a = expr();
      expect(',');
      NcPolynomial b = expr();
      expect(']');
      return commutator(a, b);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = read_decimal();
      if (peek('i')) fail(ErrorKind::MalformedComplex, "imaginary literals must be written as (re+imi)");
      return NcPolynomial::constant(Complex(v, 0.0));
    }
    fail(ErrorKind::Syntax, std::string("unexpected '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline NcPolynomial parse(std::string_view text) { return detail::Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

/// f(args): each word is multiplied left to right; the empty word contributes
/// coeff * I. `n` is only needed when `args` is empty.
inline CMatrix evaluate(const NcPolynomial& f, std::span<const CMatrix> args, Index n = -1) {
  if (args.empty() && n < 0) throw Error(ErrorKind::TooFewArguments, "matrix size unknown without arguments");
  if (!args.empty()) n = args.front().rows();
  if (static_cast<int>(args.size()) < f.num_vars())
    throw Error(ErrorKind::TooFewArguments, "polynomial uses X" + std::to_string(f.num_vars()) + " but only " +
                                                std::to_string(args.size()) + " arguments were given");
  for (const auto& a : args)
    if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "arguments must be square and of equal size");

  CMatrix out = CMatrix::Zero(n, n);
  CMatrix prod(n, n);
  for (const auto& [word, coeff] : f.terms()) {
    if (word.empty()) {
      out.diagonal().array() += coeff;
      continue;
    }
    prod = args[static_cast<std::size_t>(word.front() - 1)];
    for (std::size_t k = 1; k < word.size(); ++k) prod = (prod * args[static_cast<std::size_t>(word[k] - 1)]).eval();
    out += coeff * prod;
  }
  return out;
}

/// Upper bound on ||f(args)||_F by submultiplicativity: sum |c| prod ||a||_F,
/// with ||I||_F = sqrt(n) for the constant term. Used as the round-off scale.
inline double evaluation_magnitude(const NcPolynomial& f, std::span<const CMatrix> args, Index n) {
  std::vector<double> norms;
  norms.reserve(args.size());
  for (const auto& a : args) norms.push_back(a.norm());
  double total = 0.0;
  for (const auto& [word, coeff] : f.terms()) {
    double t = std::abs(coeff);
    if (word.empty()) t *= std::sqrt(static_cast<double>(n));
    for (int v : word) t *= norms[static_cast<std::size_t>(v - 1)];
    total += t;
  }
  return total;
}

inline std::vector<CMatrix> random_tuple(int count, Index n, std::mt19937_64& rng) {
  std::vector<CMatrix> args;
  args.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) args.push_back(random_gaussian_matrix(n, rng));
  return args;
}

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { Identity, Central, KCentral, Generic };

struct PolyClass {
  Verdict verdict = Verdict::Generic;
  int k = 1;  // meaningful for KCentral
  int samples = 0;
  double tolerance = 0.0;
  Index n = 0;

  /// Neither an identity nor a central polynomial (k-central is allowed).
  bool admits_waring() const { return verdict == Verdict::KCentral || verdict == Verdict::Generic; }
};

inline std::string to_string(const PolyClass& c) {
  switch (c.verdict) {
    case Verdict::Identity: return "Identity";
    case Verdict::Central: return "Central";
    case Verdict::KCentral: return "KCentral(" + std::to_string(c.k) + ")";
    case Verdict::Generic: return "Generic";
  }
  return "Unknown";
}

struct ClassifyOptions {
  int samples = 32;
  double tol = 1e-8;
  int kMax = 4;
  std::uint64_t seed = 0;
};

constexpr std::uint32_t kClassifyStream = 0x636c6173;  // "clas"

/// Probabilistic verdict from `samples` seeded Gaussian tuples. Never a proof.
inline PolyClass classify(const NcPolynomial& f, Index n, const ClassifyOptions& opt = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "n must be >= 1");
  if (opt.samples < 1) throw Error(ErrorKind::InvalidParameter, "samples must be >= 1");

  const int m = f.num_vars();
  std::vector<CMatrix> images;
  std::vector<double> magnitudes;
  images.reserve(static_cast<std::size_t>(opt.samples));
  for (int s = 0; s < opt.samples; ++s) {
    auto rng = sample_rng(opt.seed, kClassifyStream, static_cast<std::uint64_t>(s));
    const auto args = random_tuple(m, n, rng);
    images.push_back(evaluate(f, args, n));
    magnitudes.push_back(evaluation_magnitude(f, args, n));
  }

  PolyClass out;
  out.samples = opt.samples;
  out.tolerance = opt.tol;
  out.n = n;

  auto scale_of = [](const std::vector<double>& mags, int power) {
    double s = 0.0;
    for (double v : mags) s = std::max(s, std::pow(v, power));
    return s > 0.0 ? s : 1.0;
  };
  auto scalar_distance = [n](const CMatrix& m) {
    CMatrix d = m;
    d.diagonal().array() -= m.trace() / static_cast<double>(n);
    return d.norm();
  };

  const double scale1 = scale_of(magnitudes, 1);
  const bool identity =
      std::all_of(images.begin(), images.end(), [&](const CMatrix& img) { return img.norm() <= opt.tol * scale1; });
  if (identity) {
    out.verdict = Verdict::Identity;
    return out;
  }

  std::vector<CMatrix> powers = images;
  for (int k = 1; k <= opt.kMax; ++k) {
    if (k > 1)
      for (std::size_t s = 0; s < powers.size(); ++s) powers[s] = (powers[s] * images[s]).eval();
    const double scale = scale_of(magnitudes, k);
    const bool vanishes =
        std::all_of(powers.begin(), powers.end(), [&](const CMatrix& p) { return p.norm() <= opt.tol * scale; });
    const bool scalar =
        std::all_of(powers.begin(), powers.end(), [&](const CMatrix& p) { return scalar_distance(p) <= opt.tol * scale; });
    if (scalar && !vanishes) {
      out.verdict = k == 1 ? Verdict::Central : Verdict::KCentral;
      out.k = k;
      return out;
    }
  }
  out.verdict = Verdict::Generic;
  return out;
}

}  // namespace matwaring::freealg
