#pragma once

// Boundary-fiber calculus on the half-line: the H+ / H-_d split, the
// functional Pi', finite-rank singular Green symbols k (x) t and their
// compositions, and the symbol trace tr g.
//
// H+ is realized by proper rational functions with poles in the open upper
// half-plane; H-_d by rational functions with lower-half-plane poles growing
// at most like <tau>^{d-1} (so H-_0 is proper).

#include <sstream>
#include <utility>
#include <vector>

#include "ncres/rational.hpp"
#include "ncres/symbol.hpp"

namespace ncres {

struct PlusMinusDecomp {
  RationalFn plus;
  RationalFn minus;
  Polynomial poly;

  cplx operator()(cplx z) const { return plus(z) + minus(z) + poly(z); }
};

inline PlusMinusDecomp pm_decompose(const RationalFn& h) {
  h.require_no_real_poles("pm_decompose");
  const PartialFractions& pf = h.partial_fractions();
  PartialFractions up, down;
  for (const auto& t : pf.terms) (t.location.imag() > 0 ? up : down).terms.push_back(t);
  return PlusMinusDecomp{RationalFn::from_partial_fractions(up), RationalFn::from_partial_fractions(down), pf.poly};
}

/// Pi' h = i * (sum of residues of the plus part).
inline cplx pi_prime(const RationalFn& h) {
  h.require_no_real_poles("pi_prime");
  if (h.is_zero()) return {};
  const PartialFractions& pf = h.partial_fractions();
  cplx s{};
  for (const auto& t : pf.terms) {
    if (t.location.imag() > 0) s += t.coeffs[0];
  }
  return cplx{0.0, 1.0} * s;
}

inline bool in_h_plus(const RationalFn& k) { return k.is_zero() || (k.is_proper() && k.all_poles_upper()); }
inline bool in_h_minus(const RationalFn& t, int d) { return t.is_zero() || (t.growth_order() <= d - 1 && t.all_poles_lower()); }

/// Finite sum  g(xi_n, eta_n) = sum_i k_i(xi_n) t_i(eta_n)  of type d.
class SGSymbol {
 public:
  struct RankOne {
    RationalFn k;
    RationalFn t;
  };

  SGSymbol() = default;
  explicit SGSymbol(int type) : type_(type) {
    if (type < 0) throw std::invalid_argument("SGSymbol: type must be non-negative");
  }
  static SGSymbol rank_one(RationalFn k, RationalFn t, int type = 0) {
    SGSymbol g(type);
    g.add(std::move(k), std::move(t));
    return g;
  }

  void add(RationalFn k, RationalFn t) {
    if (!in_h_plus(k)) throw std::invalid_argument("SGSymbol: k factor is not in H+");
    if (!in_h_minus(t, type_)) {
      std::ostringstream os;
      os << "SGSymbol: t factor is not in H-_" << type_;
      throw std::invalid_argument(os.str());
    }
    if (k.is_zero() || t.is_zero()) return;
    terms_.push_back(RankOne{std::move(k), std::move(t)});
  }

  int type() const { return type_; }
  int rank() const { return static_cast<int>(terms_.size()); }
  const std::vector<RankOne>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  cplx operator()(cplx xi_n, cplx eta_n) const {
    cplx s{};
    for (const auto& r : terms_) s += r.k(xi_n) * r.t(eta_n);
    return s;
  }

  /// g restricted to xi_n = eta_n.
  RationalFn diagonal() const {
    RationalFn d;
    for (const auto& r : terms_) d = d + r.k * r.t;
    return d;
  }

  friend SGSymbol operator+(const SGSymbol& a, const SGSymbol& b) {
    SGSymbol r(std::max(a.type_, b.type_));
    r.terms_ = a.terms_;
    r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
    return r;
  }
  SGSymbol scaled(cplx s) const {
    SGSymbol r(type_);
    if (s == cplx{}) return r;
    for (const auto& t : terms_) r.terms_.push_back(RankOne{t.k * s, t.t});
    return r;
  }

 private:
  int type_ = 0;
  std::vector<RankOne> terms_;
};

/// tr g = Pi' of the diagonal restriction.
inline cplx sg_trace(const SGSymbol& g) { return pi_prime(g.diagonal()); }

/// Boundary composition t o k, a scalar.
inline cplx compose_tk(const RationalFn& t, const RationalFn& k) { return pi_prime(t * k); }

/// Poisson-trace composition k o t, a rank-one singular Green symbol.
inline SGSymbol compose_kt(const RationalFn& k, const RationalFn& t, int type = 0) {
  return SGSymbol::rank_one(k, t, type);
}

/// (g1 o g2)(xi, eta) = Pi'_zeta g1(xi, zeta) g2(zeta, eta).
inline SGSymbol compose_gg(const SGSymbol& g1, const SGSymbol& g2) {
  SGSymbol r(g2.type());
  for (const auto& a : g1.terms()) {
    for (const auto& b : g2.terms()) {
      const cplx c = compose_tk(a.t, b.k);
      if (c != cplx{}) r.add(a.k * c, b.t);
    }
  }
  return r;
}

/// A homogeneous singular Green term b(x', xi') g(xi_n/|xi'|, eta_n/|xi'|)
/// of degree b.degree() on the boundary variables.
struct GreenTerm {
  HomTerm b;
  SGSymbol fiber;

  double degree() const { return b.degree(); }

  /// tr of the term: b * |xi'| * tr(fiber), homogeneous of degree + 1.
  HomTerm trace() const {
    const cplx tr = sg_trace(fiber);
    HomTerm out(b.dim(), b.degree() + 1.0);
    if (tr == cplx{}) return out;
    for (auto a : b.atoms()) {
      a.coeff *= tr;
      a.w += 1.0;
      out.add_atom(std::move(a));
    }
    return out;
  }
};

/// Potential term b(x', xi') k(xi_n/|xi'|).
struct PoissonTerm {
  HomTerm b;
  RationalFn k;
};

/// Trace term b(x', xi') t(xi_n/|xi'|) of type d.
struct TraceTerm {
  HomTerm b;
  RationalFn t;
  int type = 0;
};

}  // namespace ncres
