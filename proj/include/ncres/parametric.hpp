#pragma once

// Weakly parametric expansions of resolvent powers (a - mu^m)^{-k} as finite
// lists of (homogeneous term, mu exponent), their composition with a
// mu-independent symbol p, and the ln-mu coefficient extracted from them,
// against the closed form in terms of the residue of p.

#include <map>
#include <vector>

#include "ncres/residue.hpp"
#include "ncres/symbol.hpp"

namespace ncres {

struct WPTerm {
  HomTerm hom;
  int mu_exp;
};

/// sum_terms hom(x, xi) mu^{mu_exp}; each entry of `floors` records the
/// exactness floor (in xi-degree) of the group with that mu exponent.
struct WPTermList {
  int dim = 1;
  int m = 1;  // order of the auxiliary symbol
  int k = 1;  // resolvent power
  int J = 0;  // highest power of a / mu^m kept
  std::vector<WPTerm> terms;
  std::map<int, std::optional<int>> floors;

  cplx operator()(std::span<const double> x, std::span<const double> xi, cplx mu) const {
    cplx s{};
    for (const auto& t : terms) s += t.hom(x, xi) * std::pow(mu, t.mu_exp);
    return s;
  }

  /// The (xi-degree, mu exponent) component, summed over matching entries.
  HomTerm component(int degree, int mu_exp) const {
    auto f = floors.find(mu_exp);
    if (f != floors.end() && f->second && degree < *f->second) {
      throw TruncationError("WPTermList: component below the exactness floor");
    }
    HomTerm acc(dim, degree);
    for (const auto& t : terms) {
      if (t.mu_exp == mu_exp && std::abs(t.hom.degree() - degree) < 1e-9) acc += t.hom;
    }
    return acc;
  }

  void add_symbol(const ClassicalSymbol& s, int mu_exp) {
    for (const auto& t : s.stored_terms()) {
      if (!t.empty()) terms.push_back(WPTerm{t, mu_exp});
    }
    floors[mu_exp] = s.exact_to();
  }
};

/// (a - mu^m)^{-k} = (-1)^k sum_i C(k-1+i, i) a^i mu^{-m(k+i)}, i <= J.
inline WPTermList expand_resolvent(const ClassicalSymbol& a, int m, int k, int J) {
  if (a.order() != m) throw std::invalid_argument("expand_resolvent: auxiliary symbol must have order m");
  if (m < 1 || k < 1 || J < 0) throw std::invalid_argument("expand_resolvent: need m >= 1, k >= 1, J >= 0");
  if (a.component(m).empty()) throw std::invalid_argument("expand_resolvent: auxiliary symbol has no principal part");
  WPTermList out;
  out.dim = a.dim();
  out.m = m;
  out.k = k;
  out.J = J;
  ClassicalSymbol power = symbols::identity(a.dim());
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  for (int i = 0; i <= J; ++i) {
    out.add_symbol(power.scaled(sign * binomial(k - 1 + i, i)), -m * (k + i));
    if (i < J) power = power.product(a);
  }
  return out;
}

/// d/d lambda with lambda = mu^m: c mu^q -> c (q/m) mu^{q-m}.
inline WPTermList lambda_derivative(const WPTermList& l) {
  WPTermList out = l;
  out.k = l.k + 1;
  out.terms.clear();
  out.floors.clear();
  for (const auto& t : l.terms) {
    const double f = static_cast<double>(t.mu_exp) / l.m;
    if (f != 0.0) out.terms.push_back(WPTerm{t.hom.scaled(f), t.mu_exp - l.m});
  }
  for (const auto& [e, fl] : l.floors) out.floors[e - l.m] = fl;
  return out;
}

/// p # (term list), with mu carried along as an inert label.
inline WPTermList compose_with(const ClassicalSymbol& p, const WPTermList& l, int truncation) {
  if (p.dim() != l.dim) throw std::invalid_argument("compose_with: dimension mismatch");
  // Regroup by mu exponent into classical symbols, then compose each group.
  std::map<int, std::vector<HomTerm>> groups;
  for (const auto& t : l.terms) groups[t.mu_exp].push_back(t.hom);
  WPTermList out = l;
  out.terms.clear();
  out.floors.clear();
  for (const auto& [e, homs] : groups) {
    int top = std::numeric_limits<int>::min();
    for (const auto& h : homs) top = std::max(top, static_cast<int>(std::lround(h.degree())));
    auto fl = l.floors.count(e) ? l.floors.at(e) : std::nullopt;
    if (fl) fl = std::min(*fl, top);
    ClassicalSymbol b(l.dim, top, fl);
    for (const auto& h : homs) b.add_to_component(h);
    out.add_symbol(leibniz_compose(p, b, truncation), e);
  }
  return out;
}

struct WPLogCoefficient {
  TrigPoly<cplx> density;  // (2 pi)^{-n} int_S term sigma, as a function of x
  cplx mu_coefficient;     // coefficient of mu^{d-kk} ln mu, integrated over X
  cplx lambda_coefficient; // the same for lambda^{(d-kk)/m} ln lambda (ln lambda = m ln mu)
};

/// Coefficient of mu^{d-kk} ln mu: the stored term with mu exponent d - kk
/// and xi-degree -n, integrated over the cosphere with weight (2 pi)^{-n}.
inline WPLogCoefficient wp_log_coefficient(const WPTermList& l, int d, int kk, const Geometry& g) {
  if (l.dim != g.n) throw std::invalid_argument("wp_log_coefficient: dimension mismatch");
  const HomTerm t = l.component(-l.dim, d - kk);
  TrigPoly<cplx> dens = cosphere_integral(t);
  TrigPoly<cplx> scaled(dens.dim(), 1);
  const double c = std::pow(2.0 * pi, -l.dim);
  for (const auto& [freq, v] : dens.coefficients()) scaled.add(freq, c * v);
  WPLogCoefficient r{scaled, g.integrate(scaled), {}};
  r.lambda_coefficient = r.mu_coefficient / static_cast<double>(l.m);
  return r;
}

/// Closed form: (2 pi)^{-n} ((-1)^k / m) res p.
inline cplx resolvent_log_coefficient(const ClassicalSymbol& p, int m, int k, const Geometry& g) {
  if (m < 1 || k < 1) throw std::invalid_argument("resolvent_log_coefficient: need m >= 1, k >= 1");
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return std::pow(2.0 * pi, -g.n) * sign / m * wodzicki_residue(p, g);
}

/// The expansion route: expand (a - mu^m)^{-k}, compose with p, and read
/// the lambda^{-k} ln lambda coefficient.
inline cplx resolvent_log_coefficient_expanded(const ClassicalSymbol& p, const ClassicalSymbol& a, int k, int J,
                                               int truncation, const Geometry& g) {
  const int m = a.order();
  const WPTermList l = compose_with(p, expand_resolvent(a, m, k, J), truncation);
  return wp_log_coefficient(l, -m * k, 0, g).lambda_coefficient;
}

}  // namespace ncres
