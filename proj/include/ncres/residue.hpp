#pragma once

// The noncommutative residue on model geometries: the interior residue and
// its density, and the boundary residue combining the interior, singular
// Green and boundary pseudodifferential blocks.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ncres/halfline.hpp"
#include "ncres/symbol.hpp"

namespace ncres {

/// T^n, or the cylinder X = T^{n-1} x [0, pi] whose boundary is two copies
/// of T^{n-1} (x_n = 0 and x_n = pi). The normal coordinate is the last one.
struct Geometry {
  enum class Kind { torus, cylinder };
  Kind kind = Kind::torus;
  int n = 2;

  static Geometry torus(int n) { return Geometry{Kind::torus, check(n, 1)}; }
  static Geometry cylinder(int n) { return Geometry{Kind::cylinder, check(n, 2)}; }

  bool has_boundary() const { return kind == Kind::cylinder; }
  int boundary_copies() const { return has_boundary() ? 2 : 0; }
  double volume() const {
    return kind == Kind::torus ? std::pow(2.0 * pi, n) : pi * std::pow(2.0 * pi, n - 1);
  }
  std::string name() const { return (kind == Kind::torus ? "torus" : "cylinder") + std::to_string(n); }

  /// Integral of a trigonometric polynomial over X.
  template <class C>
  C integrate(const TrigPoly<C>& f) const {
    return kind == Kind::torus ? f.integrate_torus() : f.integrate_half_cylinder();
  }
  /// Integral over the boundary (each copy carries the same boundary data).
  cplx integrate_boundary(const TrigPoly<cplx>& f) const {
    return static_cast<double>(boundary_copies()) * f.integrate_torus();
  }

 private:
  static int check(int n, int min) {
    if (n < min) throw std::invalid_argument("Geometry: dimension too small");
    return n;
  }
};

/// The "sphere" integral of a homogeneous term: the exact S^{n-1} moment
/// integral for n >= 2, the sum over xi = +-1 for n = 1.
template <class C>
TrigPoly<cplx> cosphere_integral(const BasicHomTerm<C>& t) {
  const BasicHomTerm<cplx> tr = t.trace();
  return tr.dim() == 1 ? tr.two_point_sum() : tr.sphere_integral();
}

/// x -> int_{S^{n-1}} tr_E a_{-n}(x, xi) sigma(xi), as a trigonometric polynomial.
template <class C>
TrigPoly<cplx> residue_density(const BasicSymbol<C>& a) {
  return cosphere_integral(a.component(-a.dim()));
}

template <class C>
cplx residue_density(const BasicSymbol<C>& a, std::span<const double> x) {
  return residue_density(a)(x);
}

/// res a = int_X int_S tr_E a_{-n} sigma dx.
template <class C>
cplx wodzicki_residue(const BasicSymbol<C>& a, const Geometry& g) {
  if (a.dim() != g.n) throw std::invalid_argument("wodzicki_residue: symbol and geometry dimensions differ");
  return g.integrate(residue_density(a));
}

/// An operator (P_+ + G, K; T, S) described by its symbol blocks.
struct BdMSymbol {
  Geometry geometry = Geometry::cylinder(2);
  std::optional<ClassicalSymbol> p;  // interior, on X
  std::vector<GreenTerm> g;          // singular Green, boundary variables
  std::vector<PoissonTerm> k;
  std::vector<TraceTerm> t;
  std::optional<ClassicalSymbol> s;  // on the boundary, dimension n - 1
  int transmission_depth = 4;
};

struct BoundaryResidue {
  cplx interior;
  cplx green;
  cplx boundary_psido;
  cplx total;
};

namespace detail {

inline void check_blocks(const BdMSymbol& A, const char* who) {
  const int n = A.geometry.n;
  auto fail = [&](const std::string& m) { throw std::invalid_argument(std::string(who) + ": " + m); };
  if (A.p && A.p->dim() != n) fail("interior symbol has the wrong dimension");
  const bool boundary_parts = !A.g.empty() || !A.k.empty() || !A.t.empty() || A.s.has_value();
  if (boundary_parts && !A.geometry.has_boundary()) fail("boundary blocks given on a closed geometry");
  for (const auto& gt : A.g) {
    if (gt.b.dim() != n - 1) fail("singular Green term has the wrong boundary dimension");
  }
  if (A.s && A.s->dim() != n - 1) fail("boundary symbol has the wrong dimension");
  if (A.p && A.geometry.has_boundary()) {
    const auto rep = transmission_check(*A.p, A.transmission_depth);
    if (!rep.ok) {
      std::ostringstream os;
      os << "interior symbol violates the transmission condition at degree " << rep.degree << " (normal derivatives "
         << rep.normal_derivatives << ", defect " << rep.defect << ")";
      fail(os.str());
    }
  }
}

/// Sum of tr g_j over the Green terms of degree j.
inline HomTerm green_trace_component(const std::vector<GreenTerm>& g, int n, int degree) {
  HomTerm acc(n - 1, degree + 1.0);
  for (const auto& term : g) {
    if (std::abs(term.degree() - degree) < 1e-9) acc += term.trace();
  }
  return acc;
}

}  // namespace detail

/// Boundary residue: interior block plus 2 pi times the boundary integral of
/// tr(tr g_{-n}) + tr s_{1-n}. For n = 2 the boundary cosphere is {+-1}.
inline BoundaryResidue boundary_residue(const BdMSymbol& A) {
  detail::check_blocks(A, "boundary_residue");
  const int n = A.geometry.n;
  BoundaryResidue r{};
  if (A.p) r.interior = wodzicki_residue(*A.p, A.geometry);
  if (A.geometry.has_boundary()) {
    const HomTerm gtr = detail::green_trace_component(A.g, n, -n);
    if (!gtr.empty()) r.green = 2.0 * pi * A.geometry.integrate_boundary(cosphere_integral(gtr));
    if (A.s) r.boundary_psido = 2.0 * pi * A.geometry.integrate_boundary(cosphere_integral(A.s->component(1 - n)));
  }
  r.total = r.interior + r.green + r.boundary_psido;
  return r;
}

}  // namespace ncres
