#include <gtest/gtest.h>

#include <cmath>

#include "ncres/random.hpp"
#include "ncres/residue.hpp"

using namespace ncres;

namespace {

const cplx I{0.0, 1.0};

ClassicalSymbol single(int n, int order, IntVec freq, IntVec alpha, double w, cplx c = 1.0) {
  ClassicalSymbol s(n, order, std::nullopt);
  s.set_component(symbols::atom_term(n, c, std::move(freq), std::move(alpha), w));
  return s;
}

}  // namespace

TEST(WodzickiResidue, BesselPowerClosedForm) {
  for (int n : {2, 3}) {
    const ClassicalSymbol a = symbols::bessel_power(n, -0.5 * n, -n - 2);
    const double ref = sphere_area(n) * std::pow(2.0 * pi, n);
    EXPECT_NEAR(wodzicki_residue(a, Geometry::torus(n)).real(), ref, 1e-10 * ref);
  }
  EXPECT_NEAR(wodzicki_residue(symbols::bessel_power(2, -1.0, -4), Geometry::torus(2)).real(), 8 * pi * pi * pi, 1e-10);
}

TEST(WodzickiResidue, DifferentialOperatorsHaveNone) {
  EXPECT_EQ(wodzicki_residue(symbols::bessel_power(2, 1.0, 0), Geometry::torus(2)), cplx{});
  EXPECT_EQ(wodzicki_residue(symbols::bessel_power(3, 2.0, 0), Geometry::torus(3)), cplx{});
}

TEST(WodzickiResidue, OneDimensionalTwoPointRule) {
  // a_{-1} = |xi|^{-1} + xi |xi|^{-2}: the odd part cancels between xi = +-1.
  ClassicalSymbol a(1, -1, std::nullopt);
  HomTerm t = symbols::atom_term(1, 1.0, {0}, {0}, -1.0);
  t += symbols::atom_term(1, 3.0, {0}, {1}, -2.0);
  a.set_component(t);
  EXPECT_NEAR(wodzicki_residue(a, Geometry::torus(1)).real(), 2.0 * 2 * pi, 1e-13);
}

TEST(ResidueDensity, Examples) {
  const double x[2] = {0.4, -1.1};
  EXPECT_NEAR(residue_density(single(2, -2, {0, 0}, {0, 0}, -2.0), x).real(), 2 * pi, 1e-14);

  const ClassicalSymbol osc = single(2, -2, {1, 0}, {0, 0}, -2.0);
  EXPECT_NEAR(std::abs(residue_density(osc, x) - 2 * pi * std::exp(I * 0.4)), 0.0, 1e-14);
  EXPECT_EQ(wodzicki_residue(osc, Geometry::torus(2)), cplx{});

  const ClassicalSymbol q = single(2, -2, {0, 0}, {2, 0}, -4.0);
  EXPECT_NEAR(residue_density(q, x).real(), pi, 1e-14);
  EXPECT_NEAR(wodzicki_residue(q, Geometry::torus(2)).real(), 4 * pi * pi * pi, 1e-12);
}

TEST(WodzickiResidue, LinearityOnRandomSymbols) {
  random::Engine e(31);
  const Geometry T2 = Geometry::torus(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ClassicalSymbol a = random::symbol(e, 2, 0, 3), b = random::symbol(e, 2, -1, 2);
    const cplx s = random::complex_unit(e);
    const cplx lhs = wodzicki_residue(a + b.scaled(s), T2);
    const cplx rhs = wodzicki_residue(a, T2) + s * wodzicki_residue(b, T2);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(WodzickiResidue, DimensionMismatchThrows) {
  EXPECT_THROW(wodzicki_residue(symbols::bessel_power(2, -1.0, -4), Geometry::torus(3)), std::invalid_argument);
}

TEST(BoundaryResidue, InteriorOnly) {
  BdMSymbol A;
  A.geometry = Geometry::cylinder(2);
  A.p = symbols::bessel_power(2, -1.0, -4);
  const auto r = boundary_residue(A);
  EXPECT_NEAR(r.interior.real(), 4 * pi * pi * pi, 1e-11);
  EXPECT_EQ(r.green, cplx{});
  EXPECT_EQ(r.total, r.interior);
}

TEST(BoundaryResidue, BoundaryPsidoOnly) {
  BdMSymbol A;
  A.geometry = Geometry::cylinder(2);
  A.s = single(1, -1, {0}, {0}, -1.0);
  EXPECT_NEAR(boundary_residue(A).total.real(), 16 * pi * pi, 1e-11);
}

TEST(BoundaryResidue, RankOneGreenTerm) {
  BdMSymbol A;
  A.geometry = Geometry::cylinder(2);
  const SGSymbol fiber = SGSymbol::rank_one(RationalFn::pole_term(1.0, I), RationalFn::pole_term(1.0, -I));
  A.g.push_back(GreenTerm{symbols::atom_term(1, 1.0, {0}, {0}, -2.0), fiber});
  const auto r = boundary_residue(A);
  // tr g_{-2} = |xi'|^{-1}/2, summed over xi' = +-1 and both boundary circles.
  EXPECT_NEAR(r.green.real(), 2 * pi * 2 * (2 * pi) * 1.0, 1e-11);
  EXPECT_EQ(r.total, r.green);
}

TEST(BoundaryResidue, BlocksAddUp) {
  BdMSymbol A;
  A.geometry = Geometry::cylinder(2);
  A.p = symbols::bessel_power(2, -1.0, -4);
  A.s = single(1, -1, {0}, {0}, -1.0);
  A.g.push_back(GreenTerm{symbols::atom_term(1, 1.0, {0}, {0}, -2.0),
                          SGSymbol::rank_one(RationalFn::pole_term(1.0, I), RationalFn::pole_term(1.0, -I))});
  const auto r = boundary_residue(A);
  EXPECT_NEAR(std::abs(r.total - r.interior - r.green - r.boundary_psido), 0.0, 1e-12);
}

TEST(BoundaryResidue, RejectsInvalidInput) {
  BdMSymbol A;
  A.geometry = Geometry::cylinder(2);
  A.p = single(2, 1, {0, 0}, {0, 0}, 1.0);
  EXPECT_THROW(boundary_residue(A), std::invalid_argument);

  BdMSymbol closed;
  closed.geometry = Geometry::torus(2);
  closed.s = single(1, -1, {0}, {0}, -1.0);
  EXPECT_THROW(boundary_residue(closed), std::invalid_argument);

  BdMSymbol wrong_dim;
  wrong_dim.geometry = Geometry::cylinder(3);
  wrong_dim.s = single(1, -1, {0}, {0}, -1.0);
  EXPECT_THROW(boundary_residue(wrong_dim), std::invalid_argument);
}

TEST(Geometry, VolumesAndNames) {
  EXPECT_NEAR(Geometry::torus(2).volume(), 4 * pi * pi, 1e-13);
  EXPECT_NEAR(Geometry::cylinder(2).volume(), 2 * pi * pi, 1e-13);
  EXPECT_EQ(Geometry::cylinder(3).boundary_copies(), 2);
  EXPECT_THROW(Geometry::cylinder(1), std::invalid_argument);
  EXPECT_EQ(Geometry::torus(2).name(), "torus2");
}
