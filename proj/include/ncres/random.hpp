#pragma once

// Seeded generators for random symbols and rational functions used by the
// property tests and the acceptance suite.

#include <random>

#include "ncres/halfline.hpp"
#include "ncres/symbol.hpp"

namespace ncres::random {

using Engine = std::mt19937_64;

inline double uniform(Engine& e, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e); }
inline int uniform_int(Engine& e, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(e); }
inline cplx complex_unit(Engine& e) { return {uniform(e, -1.0, 1.0), uniform(e, -1.0, 1.0)}; }

/// A homogeneous term of the given degree with a few atoms: frequencies in
/// [-max_freq, max_freq]^n and xi-monomials of total order <= 2.
inline HomTerm hom_term(Engine& e, int n, int degree, int atoms = 3, int max_freq = 2) {
  HomTerm t(n, degree);
  for (int a = 0; a < atoms; ++a) {
    IntVec freq(n), alpha(n, 0);
    for (int i = 0; i < n; ++i) freq[i] = uniform_int(e, -max_freq, max_freq);
    const int order = uniform_int(e, 0, 2);
    for (int q = 0; q < order; ++q) ++alpha[uniform_int(e, 0, n - 1)];
    t.add_atom(Atom<cplx>{complex_unit(e), freq, alpha, static_cast<double>(degree - order)});
  }
  return t;
}

/// A finite symbol of order m with components m, m-1, ..., m-depth.
inline ClassicalSymbol symbol(Engine& e, int n, int order, int depth) {
  ClassicalSymbol s(n, order, std::nullopt);
  for (int d = order; d >= order - depth; --d) s.set_component(hom_term(e, n, d));
  return s;
}

/// Elliptic auxiliary symbol c |xi|^m + x-dependent lower-order terms, c > 0.
inline ClassicalSymbol elliptic(Engine& e, int n, int m) {
  ClassicalSymbol s(n, m, std::nullopt);
  s.set_component(symbols::atom_term(n, uniform(e, 0.5, 2.0), IntVec(n, 0), IntVec(n, 0), m));
  for (int d = m - 1; d >= m - 2; --d) s.set_component(hom_term(e, n, d, 2, 1).scaled(0.3));
  return s;
}

/// sum of c / (tau - p)^r with poles at distance >= 0.5 from the real axis,
/// in the upper (upper = true) or lower half-plane.
inline RationalFn half_plane_rational(Engine& e, bool upper, int max_terms = 3) {
  RationalFn f;
  const int terms = uniform_int(e, 1, max_terms);
  for (int q = 0; q < terms; ++q) {
    const double im = uniform(e, 0.5, 3.0);
    const cplx p{uniform(e, -2.0, 2.0), upper ? im : -im};
    f = f + RationalFn::pole_term(complex_unit(e), p, uniform_int(e, 1, 2));
  }
  return f;
}

/// A random element of H-_d: lower-half-plane part plus a polynomial of
/// degree < d.
inline RationalFn minus_rational(Engine& e, int d) {
  RationalFn f = half_plane_rational(e, false);
  if (d > 0) {
    std::vector<cplx> c(static_cast<std::size_t>(d));
    for (auto& v : c) v = complex_unit(e);
    f = f + RationalFn::polynomial(Polynomial(c));
  }
  return f;
}

inline SGSymbol sg_symbol(Engine& e, int type = 0, int max_rank = 3) {
  SGSymbol g(type);
  const int rank = uniform_int(e, 1, max_rank);
  for (int q = 0; q < rank; ++q) g.add(half_plane_rational(e, true), minus_rational(e, type));
  return g;
}

}  // namespace ncres::random
