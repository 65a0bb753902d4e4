#include <gtest/gtest.h>

#include <cmath>

#include "ncres/parametric.hpp"
#include "ncres/random.hpp"

using namespace ncres;

namespace {

const cplx I{0.0, 1.0};
const Geometry T2 = Geometry::torus(2);

ClassicalSymbol laplace_symbol() {
  ClassicalSymbol a(2, 2, std::nullopt);
  a.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, 2));
  return a;
}

ClassicalSymbol perturbed_laplace_symbol() {
  ClassicalSymbol a = laplace_symbol();
  a.set_component(symbols::atom_term(2, 1.0, {1, 0}, {0, 0}, 1));
  return a;
}

}  // namespace

TEST(ExpandResolvent, GeometricSeriesAtLargeMu) {
  const WPTermList l = expand_resolvent(laplace_symbol(), 2, 1, 10);
  const double x[2] = {0.3, 0.1}, xi[2] = {0.6, 0.8};
  EXPECT_NEAR(std::abs(l(x, xi, 10.0 * I) - 1.0 / 101.0), 0.0, 1e-10);
}

TEST(ExpandResolvent, MatchesDirectPowerOnRandomPoints) {
  random::Engine e(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = random::uniform_int(e, 1, 2), k = random::uniform_int(e, 1, 3);
    const ClassicalSymbol a = random::elliptic(e, 2, m);
    const WPTermList l = expand_resolvent(a, m, k, 8);
    const double x[2] = {random::uniform(e, -3, 3), random::uniform(e, -3, 3)};
    const double xi[2] = {random::uniform(e, 0.3, 1.2), random::uniform(e, 0.3, 1.2)};
    const cplx mu = std::polar(random::uniform(e, 40.0, 60.0), random::uniform(e, 0.2, 0.4) * pi / m);
    const cplx direct = std::pow(a(x, xi) - std::pow(mu, m), -k);
    EXPECT_LE(std::abs(l(x, xi, mu) - direct), 1e-6 * std::abs(direct));
  }
}

TEST(ExpandResolvent, HigherPowerIsLambdaDerivative) {
  random::Engine e(42);
  const ClassicalSymbol a = random::elliptic(e, 2, 2);
  const WPTermList d = lambda_derivative(expand_resolvent(a, 2, 1, 6));
  const WPTermList k2 = expand_resolvent(a, 2, 2, 5);
  EXPECT_EQ(d.k, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const double x[2] = {random::uniform(e, -3, 3), random::uniform(e, -3, 3)};
    const double xi[2] = {random::uniform(e, 0.3, 1.2), random::uniform(e, 0.3, 1.2)};
    const cplx mu = std::polar(random::uniform(e, 5.0, 9.0), 0.3);
    // The derivative of the J = 6 list is exact through a^5, like the k = 2 list with J = 5
    // plus one extra a^6 term.
    const cplx extra = 7.0 * std::pow(a(x, xi), 6) * std::pow(mu, -16);
    EXPECT_LE(std::abs(d(x, xi, mu) - k2(x, xi, mu) - extra), 1e-14 * std::abs(k2(x, xi, mu)));
  }
}

TEST(ExpandResolvent, RejectsBadInput) {
  EXPECT_THROW(expand_resolvent(laplace_symbol(), 1, 1, 2), std::invalid_argument);
  EXPECT_THROW(expand_resolvent(laplace_symbol(), 2, 0, 2), std::invalid_argument);
}

TEST(ComposeWith, LeadingMuTermIsSignedP) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  for (int k : {1, 2, 3}) {
    for (const auto& a : {laplace_symbol(), perturbed_laplace_symbol()}) {
      const WPTermList l = compose_with(p, expand_resolvent(a, 2, k, 3), 4);
      const HomTerm c = l.component(-2, -2 * k);
      const double x[2] = {0.7, -0.2}, xi[2] = {0.5, 1.5};
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      EXPECT_NEAR(std::abs(c(x, xi) - sign * p.component(-2)(x, xi)), 0.0, 1e-14);
    }
  }
}

TEST(LogCoefficient, ClosedFormExamples) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  EXPECT_NEAR(std::abs(resolvent_log_coefficient(p, 2, 2, T2) - pi), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(resolvent_log_coefficient(p, 2, 3, T2) + pi), 0.0, 1e-12);
  EXPECT_EQ(resolvent_log_coefficient(symbols::bessel_power(2, 1.0, 0), 2, 2, T2), cplx{});
}

TEST(LogCoefficient, ExpansionRouteMatchesClosedForm) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  for (int k : {1, 2, 3}) {
    const cplx closed = resolvent_log_coefficient(p, 2, k, T2);
    const cplx v1 = resolvent_log_coefficient_expanded(p, laplace_symbol(), k, 4, 4, T2);
    const cplx v2 = resolvent_log_coefficient_expanded(p, perturbed_laplace_symbol(), k, 4, 4, T2);
    EXPECT_NEAR(std::abs(v1 - closed), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(v1 - v2), 0.0, 1e-8);
  }
}

TEST(LogCoefficient, RandomTriples) {
  random::Engine e(43);
  for (int trial = 0; trial < 10; ++trial) {
    const int mp = random::uniform_int(e, -2, 0);
    const ClassicalSymbol p = random::symbol(e, 2, mp, mp + 3);
    const int m = random::uniform_int(e, 1, 2), k = random::uniform_int(e, 1, 3);
    const ClassicalSymbol a = random::elliptic(e, 2, m);
    const cplx r1 = resolvent_log_coefficient_expanded(p, a, k, 3, mp + 4, T2);
    const cplx r2 = resolvent_log_coefficient(p, m, k, T2);
    EXPECT_LE(std::abs(r1 - r2), 1e-8 * std::max(1.0, std::abs(r2)));
  }
}

TEST(LogCoefficient, MuLambdaBookkeeping) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  const int m = 2, k = 2;
  const WPTermList l = compose_with(p, expand_resolvent(laplace_symbol(), m, k, 4), 4);
  const WPLogCoefficient c = wp_log_coefficient(l, -m * k, 0, T2);
  EXPECT_NEAR(std::abs(c.lambda_coefficient * static_cast<double>(m) - c.mu_coefficient), 0.0, 1e-14);
  // Undoing the 1/ord(A) and (2pi)^{-n} factors gives back res p.
  const cplx res = std::pow(2.0 * pi, 2) * static_cast<double>(m) * c.lambda_coefficient;
  EXPECT_NEAR(std::abs(res - wodzicki_residue(p, T2)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(c.density.mean() - 2 * pi / std::pow(2 * pi, 2)), 0.0, 1e-14);
}

TEST(LogCoefficient, TruncationIsEnforced) {
  const ClassicalSymbol p = symbols::bessel_power(2, -1.0, -4);
  const WPTermList l = compose_with(p, expand_resolvent(laplace_symbol(), 2, 1, 2), 0);
  EXPECT_NO_THROW(l.component(-2, -2));
  EXPECT_THROW(l.component(-3, -2), TruncationError);
}
