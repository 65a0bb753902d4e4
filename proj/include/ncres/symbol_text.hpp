#pragma once

// Text form of scalar symbols.
//
//   sum    := ['+'|'-'] atom { ('+'|'-') atom }
//   atom   := factor { '*' factor }
//   factor := real ['i'] | 'i' | '(' real ',' real ')'
//           | 'exp(i*[k1,...,kn].x)'
//           | 'xi^[a1,...,an]'
//           | '|xi|' [ '^' real ]
//
// Example on T^2:  "1*|xi|^-2 - 1*|xi|^-4 + (0,0.5)*exp(i*[1,0].x)*xi^[2,0]*|xi|^-6"
// Atoms are grouped into homogeneous components by their degree |alpha| + w.

#include <cctype>
#include <charconv>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ncres/symbol.hpp"

namespace ncres {

class SymbolParseError : public std::invalid_argument {
 public:
  SymbolParseError(const std::string& msg, std::size_t column)
      : std::invalid_argument(msg + " (at column " + std::to_string(column + 1) + ")"), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

namespace detail {

class SymbolLexer {
 public:
  SymbolLexer(std::string_view text, int dim) : s_(text), dim_(dim) {}

  std::vector<Atom<cplx>> parse_sum() {
    std::vector<Atom<cplx>> atoms;
    skip();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = (get() == '-') ? -1.0 : 1.0;
    }
    atoms.push_back(parse_atom(sign));
    skip();
    while (!done()) {
      const char c = get();
      if (c != '+' && c != '-') fail("expected '+' or '-' between atoms");
      atoms.push_back(parse_atom(c == '-' ? -1.0 : 1.0));
      skip();
    }
    return atoms;
  }

 private:
  Atom<cplx> parse_atom(double sign) {
    Atom<cplx> atom{cplx{sign, 0.0}, IntVec(dim_, 0), IntVec(dim_, 0), 0.0};
    parse_factor(atom);
    skip();
    while (peek() == '*') {
      get();
      parse_factor(atom);
      skip();
    }
    return atom;
  }

  void parse_factor(Atom<cplx>& atom) {
    skip();
    if (starts_with("exp")) {
      pos_ += 3;
      expect('(');
      expect('i');
      expect('*');
      const IntVec k = parse_vector();
      expect('.');
      expect('x');
      expect(')');
      for (int i = 0; i < dim_; ++i) atom.freq[i] += k[i];
      return;
    }
    if (starts_with("|xi|")) {
      pos_ += 4;
      skip();
      if (peek() == '^') {
        get();
        atom.w += parse_real();
      } else {
        atom.w += 1.0;
      }
      return;
    }
    if (starts_with("xi")) {
      pos_ += 2;
      expect('^');
      const IntVec a = parse_vector();
      for (int i = 0; i < dim_; ++i) {
        if (a[i] < 0) fail("xi exponents must be non-negative");
        atom.alpha[i] += a[i];
      }
      return;
    }
    if (peek() == '(') {
      get();
      const double re = parse_real();
      expect(',');
      const double im = parse_real();
      expect(')');
      atom.coeff *= cplx{re, im};
      return;
    }
    if (peek() == 'i') {
      get();
      atom.coeff *= cplx{0.0, 1.0};
      return;
    }
    const double v = parse_real();
    if (peek() == 'i') {
      get();
      atom.coeff *= cplx{0.0, v};
    } else {
      atom.coeff *= v;
    }
  }

  IntVec parse_vector() {
    expect('[');
    IntVec v;
    skip();
    while (true) {
      const double x = parse_real();
      if (x != std::round(x)) fail("index vectors must be integral");
      v.push_back(static_cast<int>(x));
      skip();
      const char c = get();
      if (c == ']') break;
      if (c != ',') fail("expected ',' or ']' in index vector");
    }
    if (static_cast<int>(v.size()) != dim_) {
      fail("index vector has length " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    return v;
  }

  double parse_real() {
    skip();
    const std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    while (!done() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                       s_[pos_] == 'e' || s_[pos_] == 'E' ||
                       ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start &&
                        (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a number");
    const std::string token(s_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + token + "'");
    }
    if (used != token.size()) fail("malformed number '" + token + "'");
    return v;
  }

  bool starts_with(std::string_view w) const { return s_.substr(pos_, w.size()) == w; }
  void skip() {
    while (!done() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() const { return pos_ >= s_.size(); }
  char peek() {
    skip();
    return done() ? '\0' : s_[pos_];
  }
  char get() {
    skip();
    if (done()) fail("unexpected end of input");
    return s_[pos_++];
  }
  void expect(char c) {
    if (get() != c) {
      --pos_;
      fail(std::string("expected '") + c + "'");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SymbolParseError(msg, pos_); }

  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a sum of atoms into homogeneous components keyed by degree.
inline std::map<double, HomTerm, std::greater<>> parse_hom_terms(std::string_view text, int dim) {
  detail::SymbolLexer lex(text, dim);
  std::map<double, HomTerm, std::greater<>> groups;
  for (auto& atom : lex.parse_sum()) {
    const double deg = atom.degree();
    auto it = groups.find(deg);
    if (it == groups.end()) it = groups.emplace(deg, HomTerm(dim, deg)).first;
    it->second.add_atom(std::move(atom));
  }
  return groups;
}

/// Parses a single homogeneous term; all atoms must share one degree.
inline HomTerm parse_hom_term(std::string_view text, int dim) {
  auto groups = parse_hom_terms(text, dim);
  if (groups.size() != 1) throw SymbolParseError("expected a single homogeneous degree", 0);
  return groups.begin()->second;
}

/// Parses a classical symbol. `order` defaults to the highest atom degree;
/// `exact_to` is the exactness floor (none: finite expansion).
inline ClassicalSymbol parse_symbol(std::string_view text, int dim, std::optional<int> order = std::nullopt,
                                    std::optional<int> exact_to = std::nullopt) {
  auto groups = parse_hom_terms(text, dim);
  int top = order.value_or(std::numeric_limits<int>::min());
  for (const auto& [deg, term] : groups) {
    const int d = static_cast<int>(std::lround(deg));
    if (std::abs(deg - d) > 1e-9) throw SymbolParseError("symbol components must have integer degree", 0);
    if (!order) top = std::max(top, d);
  }
  if (groups.empty()) top = order.value_or(0);
  ClassicalSymbol sym(dim, top, exact_to);
  for (const auto& [deg, term] : groups) {
    if (deg > top) throw SymbolParseError("atom degree exceeds declared order", 0);
    sym.set_component(term);
  }
  return sym;
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string to_text(const HomTerm& t) {
  std::ostringstream os;
  bool first = true;
  for (const auto& a : t.atoms()) {
    if (!first) os << " + ";
    first = false;
    os << '(' << format_real(a.coeff.real()) << ',' << format_real(a.coeff.imag()) << ')';
    auto vec = [&](const IntVec& v) {
      os << '[';
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      os << ']';
    };
    if (std::any_of(a.freq.begin(), a.freq.end(), [](int k) { return k != 0; })) {
      os << "*exp(i*";
      vec(a.freq);
      os << ".x)";
    }
    if (abs_order(a.alpha) > 0) {
      os << "*xi^";
      vec(a.alpha);
    }
    if (a.w != 0.0) os << "*|xi|^" << format_real(a.w);
  }
  if (first) os << "0";
  return os.str();
}

inline std::string to_text(const ClassicalSymbol& s) {
  std::string out;
  for (const auto& t : s.stored_terms()) {
    if (t.empty()) continue;
    if (!out.empty()) out += " + ";
    out += to_text(t);
  }
  return out.empty() ? "0" : out;
}

}  // namespace ncres
