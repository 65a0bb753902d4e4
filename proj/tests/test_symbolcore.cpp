#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ncres/random.hpp"
#include "ncres/residue.hpp"
#include "ncres/symbol.hpp"
#include "ncres/symbol_text.hpp"

using namespace ncres;

namespace {

HomTerm bessel_leading(int n) { return symbols::atom_term(n, 1.0, IntVec(n, 0), IntVec(n, 0), -n); }

std::vector<double> random_point(random::Engine& e, int n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& c : v) c = random::uniform(e, lo, hi);
  return v;
}

}  // namespace

TEST(HomTerm, EvaluatesHomogeneousPowers) {
  for (int n : {1, 2, 3}) {
    std::vector<double> x(n, 0.3), xi(n, 0.0);
    xi[n > 1 ? 1 : 0] = 2.0;
    EXPECT_NEAR(bessel_leading(n)(x, xi).real(), std::pow(2.0, -n), 1e-15);
  }
  const double x[2] = {0.0, 0.0};
  const double xi34[2] = {3.0, 4.0};
  const HomTerm linear = symbols::atom_term(2, 1.0, {0, 0}, {1, 0}, 0.0);
  EXPECT_DOUBLE_EQ(linear(x, xi34).real(), 3.0);

  const HomTerm t = symbols::atom_term(2, 1.0, {0, 0}, {2, 0}, -3.0);
  const double e1[2] = {1.0, 0.0}, e2[2] = {2.0, 0.0};
  EXPECT_DOUBLE_EQ(t(x, e1).real(), 1.0);
  EXPECT_DOUBLE_EQ(t(x, e2).real(), 0.5);
}

TEST(HomTerm, RejectsInconsistentAtoms) {
  HomTerm t(2, -2.0);
  EXPECT_THROW(t.add_atom(Atom<cplx>{1.0, {0, 0}, {1, 0}, -2.0}), std::invalid_argument);
  EXPECT_THROW(t.add_atom(Atom<cplx>{1.0, {0}, {0}, -2.0}), std::invalid_argument);
  const double x[2] = {0, 0}, zero[2] = {0, 0};
  EXPECT_THROW(bessel_leading(2)(x, zero), std::invalid_argument);
}

TEST(HomTerm, CancellingAtomsLeaveEmptyTerm) {
  HomTerm t = bessel_leading(2);
  t.add_atom(Atom<cplx>{-1.0, {0, 0}, {0, 0}, -2.0});
  EXPECT_TRUE(t.empty());
}

TEST(HomTerm, HomogeneityOnRandomPoints) {
  random::Engine e(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = random::uniform_int(e, 1, 3);
    const int deg = random::uniform_int(e, -4, 2);
    const HomTerm t = random::hom_term(e, n, deg);
    const auto x = random_point(e, n, -3.0, 3.0);
    const auto xi = random_point(e, n, -2.0, 2.0);
    const double lambda = random::uniform(e, 0.2, 5.0);
    std::vector<double> scaled(xi);
    for (auto& v : scaled) v *= lambda;
    const cplx lhs = t(x, scaled), rhs = std::pow(lambda, deg) * t(x, xi);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST(HomTerm, DerivativesMatchFiniteDifferences) {
  random::Engine e(12);
  for (int trial = 0; trial < 20; ++trial) {
    const HomTerm t = random::hom_term(e, 2, -1);
    const auto x = random_point(e, 2, -1.0, 1.0);
    const auto xi = random_point(e, 2, 0.5, 1.5);
    const double h = 1e-5;
    for (int j = 0; j < 2; ++j) {
      auto xp = x, xm = x, qp = xi, qm = xi;
      xp[j] += h;
      xm[j] -= h;
      qp[j] += h;
      qm[j] -= h;
      const cplx fdx = (t(xp, xi) - t(xm, xi)) / (2 * h);
      const cplx fdxi = (t(x, qp) - t(x, qm)) / (2 * h);
      EXPECT_LE(std::abs(t.d_x(j)(x, xi) - fdx), 1e-6 * (1.0 + std::abs(fdx)));
      EXPECT_LE(std::abs(t.d_xi(j)(x, xi) - fdxi), 1e-6 * (1.0 + std::abs(fdxi)));
    }
  }
}

TEST(SphereIntegral, MomentValues) {
  const HomTerm one2 = symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, 0.0);
  const HomTerm one3 = symbols::atom_term(3, 1.0, {0, 0, 0}, {0, 0, 0}, 0.0);
  EXPECT_NEAR(one2.sphere_integral().mean().real(), 2 * pi, 1e-14);
  EXPECT_NEAR(one3.sphere_integral().mean().real(), 4 * pi, 1e-14);
  const HomTerm sq = symbols::atom_term(2, 1.0, {0, 0}, {2, 0}, 0.0);
  EXPECT_NEAR(sq.sphere_integral().mean().real(), pi, 1e-14);
  const HomTerm q = symbols::atom_term(2, 1.0, {0, 0}, {2, 2}, -4.0);
  EXPECT_NEAR(q.sphere_integral().mean().real(), pi / 4, 1e-14);
  const double x[2] = {0.0, 0.0};
  EXPECT_NEAR(sphere_integrate_numeric(q, x).real(), pi / 4, 1e-12);
}

TEST(SphereIntegral, OddMomentsVanish) {
  for (const IntVec& alpha : {IntVec{1, 0, 0}, IntVec{2, 1, 0}, IntVec{1, 1, 1}, IntVec{3, 0, 2}}) {
    EXPECT_EQ(sphere_moment(alpha), 0.0);
  }
}

TEST(SphereIntegral, AgreesWithQuadratureOnRandomTerms) {
  random::Engine e(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = random::uniform_int(e, 2, 3);
    const HomTerm t = random::hom_term(e, n, -n, 4);
    const auto x = random_point(e, n, -3.0, 3.0);
    const cplx exact = t.sphere_integral()(x);
    const cplx numeric = sphere_integrate_numeric(t, x, 40);
    EXPECT_LE(std::abs(exact - numeric), 1e-10 * (1.0 + std::abs(exact)));
  }
}

TEST(LeibnizCompose, CommutatorOfXiAndExponential) {
  ClassicalSymbol a(2, 1, std::nullopt), b(2, 0, std::nullopt);
  a.set_component(symbols::atom_term(2, 1.0, {0, 0}, {1, 0}, 0.0));
  b.set_component(symbols::atom_term(2, 1.0, {1, 0}, {0, 0}, 0.0));
  const ClassicalSymbol c = leibniz_compose(a, b, 4) - leibniz_compose(b, a, 4);
  EXPECT_TRUE(c.component(1).empty());
  const HomTerm c0 = c.component(0);
  ASSERT_EQ(c0.atoms().size(), 1u);
  EXPECT_EQ(c0.atoms()[0].freq, (IntVec{1, 0}));
  EXPECT_EQ(c0.atoms()[0].alpha, (IntVec{0, 0}));
  EXPECT_NEAR(std::abs(c0.atoms()[0].coeff - cplx{1.0, 0.0}), 0.0, 1e-15);
}

TEST(LeibnizCompose, IdentityIsNeutral) {
  random::Engine e(14);
  const ClassicalSymbol a = random::symbol(e, 2, 1, 3);
  const ClassicalSymbol one = symbols::identity(2);
  for (const auto& c : {leibniz_compose(a, one, 5), leibniz_compose(one, a, 5)}) {
    for (int d = 1; d >= -2; --d) {
      const HomTerm diff = c.component(d) + a.component(d).scaled(-1.0);
      EXPECT_TRUE(diff.empty() || diff.coefficient_norm() < 1e-14) << "degree " << d;
    }
  }
}

TEST(LeibnizCompose, AssociativeAboveTheFloor) {
  random::Engine e(15);
  for (int trial = 0; trial < 5; ++trial) {
    const ClassicalSymbol a = random::symbol(e, 2, 1, 2), b = random::symbol(e, 2, 0, 2), c = random::symbol(e, 2, -1, 2);
    const ClassicalSymbol l = leibniz_compose(leibniz_compose(a, b, 4), c, 4);
    const ClassicalSymbol r = leibniz_compose(a, leibniz_compose(b, c, 4), 4);
    const int low = std::max(l.bottom(), r.bottom());
    ASSERT_LE(low, -2);
    const auto x = random_point(e, 2, -2.0, 2.0);
    const auto xi = random_point(e, 2, 0.5, 1.5);
    for (int d = 0; d >= low; --d) {
      const cplx lv = l.component(d)(x, xi), rv = r.component(d)(x, xi);
      EXPECT_LE(std::abs(lv - rv), 1e-11 * (1.0 + std::abs(lv))) << "degree " << d;
    }
  }
}

TEST(LeibnizCompose, RefusesComponentsBelowFloor) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  const ClassicalSymbol q = leibniz_compose(p, p, 1);
  EXPECT_NO_THROW(q.component(-5));
  EXPECT_THROW(q.component(-6), TruncationError);
}

TEST(LeibnizCompose, CommutatorHasZeroResidue) {
  random::Engine e(16);
  const Geometry T2 = Geometry::torus(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ClassicalSymbol a = random::symbol(e, 2, random::uniform_int(e, -1, 2), 5);
    const ClassicalSymbol b = random::symbol(e, 2, random::uniform_int(e, -1, 2), 5);
    const ClassicalSymbol c = leibniz_compose(a, b, 6) - leibniz_compose(b, a, 6);
    const double scale = 1.0 + a.coefficient_norm() * b.coefficient_norm();
    EXPECT_LE(std::abs(wodzicki_residue(c, T2)), 1e-8 * scale);
  }
}

TEST(Transmission, PolynomialSymbolsPass) {
  const ClassicalSymbol p = symbols::bessel_power(2, 1.0, 0);
  EXPECT_TRUE(transmission_check(p).ok);
}

TEST(Transmission, AbsoluteXiFails) {
  ClassicalSymbol p(2, 1, std::nullopt);
  p.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, 1.0));
  const auto rep = transmission_check(p);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.degree, 1);
  EXPECT_EQ(rep.normal_derivatives, 0);
}

TEST(Transmission, InverseBesselExpansionPasses) {
  // (1 + |xi|^2)^{-1} ~ |xi|^{-2} - |xi|^{-4}: even degree, even in xi_n.
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  EXPECT_TRUE(transmission_check(p, 4).ok);
  // Direct parity check of each term at xi = (0, +-1).
  const double x[2] = {0.3, 0.0}, up[2] = {0.0, 1.0}, down[2] = {0.0, -1.0};
  for (int j : {-2, -4}) {
    const HomTerm t = p.component(j);
    EXPECT_NEAR(std::abs(t(x, up) - std::pow(-1.0, j) * t(x, down)), 0.0, 1e-15);
  }
}

TEST(Transmission, OddTermWithWrongParityFails) {
  ClassicalSymbol p(2, -1, std::nullopt);
  p.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, -1.0));
  EXPECT_FALSE(transmission_check(p).ok);
  ClassicalSymbol q(2, -1, std::nullopt);
  q.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 1}, -2.0));
  EXPECT_TRUE(transmission_check(q).ok);
}

TEST(MatrixSymbol, TraceEntersTheResidue) {
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = 2.0;
  c(0, 1) = 5.0;
  MatrixSymbol a(2, -2, std::nullopt, 2);
  MatrixHomTerm t(2, -2.0, 2);
  t.add_atom(Atom<CMatrix>{c, {0, 0}, {0, 0}, -2.0});
  a.set_component(t);
  EXPECT_NEAR(std::abs(wodzicki_residue(a, Geometry::torus(2)) - 3.0 * 8 * pi * pi * pi), 0.0, 1e-10);
}

TEST(SymbolText, ParsesAndRoundTrips) {
  const ClassicalSymbol s = parse_symbol("1*|xi|^-2 - 1*|xi|^-4 + (0,0.5)*exp(i*[1,0].x)*xi^[2,0]*|xi|^-6", 2);
  EXPECT_EQ(s.order(), -2);
  EXPECT_EQ(s.component(-4).atoms().size(), 2u);
  const ClassicalSymbol back = parse_symbol(to_text(s), 2);
  random::Engine e(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_point(e, 2, -3.0, 3.0);
    const auto xi = random_point(e, 2, 0.3, 2.0);
    EXPECT_NEAR(std::abs(s(x, xi) - back(x, xi)), 0.0, 1e-15);
  }
}

TEST(SymbolText, ReportsColumn) {
  try {
    parse_symbol("1*|xi|^-2 + 2*zz", 2);
    FAIL() << "expected SymbolParseError";
  } catch (const SymbolParseError& err) {
    EXPECT_EQ(err.column(), 14u);
  }
  EXPECT_THROW(parse_symbol("exp(i*[1].x)", 2), SymbolParseError);
}
