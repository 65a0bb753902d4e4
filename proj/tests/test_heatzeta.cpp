#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "ncres/heatzeta.hpp"

using namespace ncres;

namespace {

double theta1(double t, int from = -400) {
  double s = 0.0;
  for (int k = from; k <= 400; ++k) s += std::exp(-t * k * k);
  return s;
}

std::vector<HeatSample> synthetic(const std::function<double(double)>& f, double lo, double hi, int count) {
  std::vector<HeatSample> s;
  for (double t : log_time_grid(lo, hi, count)) s.push_back(HeatSample{t, f(t), 0.0});
  return s;
}

const HeatModel epstein{Lattice::torus(2), Weight{1, 1, 0, 0}, Affine{1, 1}};
const HeatModel bessel{Lattice::torus(2), Weight{1, 1, -1, 0}, Affine{1, 1}};

}  // namespace

TEST(HeatTrace, TorusFactorizes) {
  for (double t : {1.0, 0.1, 0.01}) {
    const double direct = heat_trace(epstein, t).value;
    const double product = std::exp(-t) * theta1(t) * theta1(t);
    EXPECT_NEAR(direct, product, 1e-12 * product) << "t = " << t;
  }
}

TEST(HeatTrace, TailBoundDominatesTruncationError) {
  const HeatSampler coarse(epstein, 0.05, 1e-3);
  const HeatSampler fine(epstein, 0.05, 1e-15);
  const auto a = coarse(0.05), b = fine(0.05);
  EXPECT_LE(std::abs(a.value - b.value), a.tail_bound + 1e-12 * b.value);
  EXPECT_LT(coarse.cutoff(), fine.cutoff());
}

TEST(HeatTrace, SpectralGapAtLargeTime) {
  const double t = 30.0;
  const double v = heat_trace(bessel, t).value;
  // k = 0 term P(0) e^{-t}; the next shell is 4 (1/2) e^{-2t}.
  EXPECT_NEAR(v, std::exp(-t) + 2.0 * std::exp(-2 * t), 1e-20);
}

TEST(HeatTrace, RejectsBadInput) {
  EXPECT_THROW(heat_trace(epstein, 0.0), std::invalid_argument);
  HeatModel grow = epstein;
  grow.P.power = 1.0;
  EXPECT_THROW(heat_trace(grow, 0.1), std::invalid_argument);
  HeatModel capped = epstein;
  capped.mode_cap = 1e3;
  EXPECT_THROW(heat_trace(capped, 1e-4), ResourceCapError);
}

TEST(FitExpansion, RecoversExactModels) {
  const auto s1 = synthetic([](double t) { return 3 + 2 * std::log(t) + t; }, 1e-3, 1e-1, 30);
  const auto f1 = fit_expansion(s1, {{0, false}, {0, true}, {1, false}});
  EXPECT_NEAR(f1.coefficients[0], 3.0, 1e-9);
  EXPECT_NEAR(f1.coefficients[1], 2.0, 1e-9);
  EXPECT_NEAR(f1.coefficients[2], 1.0, 1e-9);

  const auto s2 = synthetic([](double t) { return 1 / t + 5 - pi * std::log(t) + 0.1 * std::sqrt(t); }, 1e-3, 1e-1, 40);
  const auto f2 = fit_expansion(s2, {{-1, false}, {0, false}, {0, true}, {0.5, false}});
  EXPECT_NEAR(*f2.coefficient(-1, false), 1.0, 1e-6);
  EXPECT_NEAR(*f2.coefficient(0, false), 5.0, 1e-6);
  EXPECT_NEAR(*f2.coefficient(0, true), -pi, 1e-6);
  EXPECT_NEAR(*f2.coefficient(0.5, false), 0.1, 1e-6);
  EXPECT_FALSE(f2.coefficient(2, false).has_value());
  for (double d : f2.cv_delta) EXPECT_LT(d, 1e-6);
}

TEST(FitExpansion, RejectsPoorDesigns) {
  auto f = [](double t) { return 1.0 + t; };
  EXPECT_THROW(fit_expansion(synthetic(f, 1e-3, 1e-1, 5), {{0, false}, {1, false}, {2, false}}), FitRejected);
  EXPECT_THROW(fit_expansion(synthetic(f, 1e-2, 1e-1, 20), {{0, false}, {1, false}}), FitRejected);
  EXPECT_THROW(fit_expansion(synthetic(f, 1e-3, 1e-1, 40), {{0, false}, {0, false}}), FitRejected);
  EXPECT_THROW(fit_expansion(synthetic(f, 1e-3, 1e-1, 40), {}), FitRejected);
}

TEST(HeatFit, LeadingCoefficientOfEpsteinTrace) {
  const auto samples = HeatSampler(epstein, 1e-3).sample(log_time_grid(1e-3, 5e-2, 40));
  const auto fit = fit_expansion(samples, {{-1, false}, {-0.5, false}, {0, false}, {0.5, false}, {1, false}, {1, true}});
  EXPECT_NEAR(*fit.coefficient(-1, false), pi, 0.005 * pi);
}

TEST(HeatFit, LogCoefficientOfBesselTrace) {
  const auto samples = HeatSampler(bessel, 1e-3).sample(log_time_grid(1e-3, 5e-2, 40));
  const auto fit = fit_expansion(samples, {{0, true}, {0, false}, {0.5, false}, {1, false}, {1, true}});
  EXPECT_NEAR(*fit.coefficient(0, true), -pi, 0.02 * pi);
}

TEST(ZetaResidue, FromSyntheticFits) {
  AsymptoticFit fit;
  fit.terms = {{-1, false}, {0, true}, {0, false}};
  fit.coefficients = {2.0, -3.0, 7.0};
  EXPECT_NEAR(zeta_residue(fit, 1.0).value, 2.0, 1e-15);
  const auto r0 = zeta_residue(fit, 0.0);
  EXPECT_TRUE(r0.pole_of_gamma);
  EXPECT_NEAR(r0.value, 3.0, 1e-15);
  fit.terms = {{-1.5, false}, {-1.5, true}};
  fit.coefficients = {1.0, 0.5};
  const double expect = (1.0 + boost::math::digamma(1.5) * 0.5) / std::tgamma(1.5);
  EXPECT_NEAR(zeta_residue(fit, 1.5).value, expect, 1e-14);
}

TEST(ZetaResidue, EpsteinAtOneAndRegularAtTwo) {
  const auto grid = log_time_grid(1e-3, 5e-2, 40);
  const std::vector<FitTerm> basis{{-1, false}, {-0.5, false}, {0, false}, {0.5, false}, {1, false}, {1, true}};
  EXPECT_NEAR(zeta_residue(epstein, 1.0, grid, basis).residue.value, pi, 0.01 * pi);
  std::vector<FitTerm> probe = basis;
  probe.push_back({-2, false});
  EXPECT_NEAR(zeta_residue(epstein, 2.0, grid, probe).residue.value, 0.0, 1e-3);
}

TEST(ZetaResidue, BesselAtZero) {
  const auto rep = zeta_residue(bessel, 0.0, log_time_grid(1e-3, 5e-2, 40),
                                {{0, true}, {0, false}, {0.5, false}, {1, false}, {1, true}});
  EXPECT_NEAR(rep.residue.value, pi, 0.02 * pi);
}

TEST(ZetaContinuation, MatchesDirectSumAtTwo) {
  const auto grid = log_time_grid(1e-3, 5e-2, 40);
  const auto rep = zeta_residue(epstein, 1.0, grid, {{-1, false}, {-0.5, false}, {0, false}, {0.5, false}, {1, false}, {1, true}});
  const double cont = zeta_continuation(epstein, rep.fit, 2.0);
  double direct = 0.0;
  const int K = 3000;
  for (int a = -K; a <= K; ++a) {
    for (int b = -K; b <= K; ++b) {
      const double l = 1.0 + a * a + b * b;
      direct += 1.0 / (l * l);
    }
  }
  // Lattice points outside the square: about int_{|k|>K} |k|^{-4} < pi / K^2.
  EXPECT_NEAR(cont, direct, 1e-4 * direct + pi / (K * K));
}

TEST(Cylinder, SineCoefficientsMatchQuadrature) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (int j : {1, 2, 5}) {
    double mass = 0.0;
    for (int m = -25; m <= 25; ++m) {
      // c_jm = (2pi)^{-1/2} int_0^pi sqrt(2/pi) sin(jx) e^{-imx} dx
      const double re = GK::integrate([&](double x) { return std::sin(j * x) * std::cos(m * x); }, 0.0, pi, 8, 1e-13);
      const double im = GK::integrate([&](double x) { return -std::sin(j * x) * std::sin(m * x); }, 0.0, pi, 8, 1e-13);
      const double c2 = (re * re + im * im) / (pi * pi);
      EXPECT_NEAR(sine_coefficient_sq(j, m), c2, 1e-10) << "j=" << j << " m=" << m;
      mass += sine_coefficient_sq(j, m);
    }
    EXPECT_NEAR(mass, 1.0, 0.01);
  }
  double total = 0.0;
  for (int m = -200000; m <= 200000; ++m) total += sine_coefficient_sq(3, m);
  EXPECT_NEAR(total, 1.0, 1e-5);
}

TEST(Cylinder, IdentityWeightFactorizes) {
  CylinderHeatConfig cfg;
  cfg.P = Weight{1, 1, 0, 0};
  const CylinderHeat heat(cfg, 0.05);
  for (double t : {0.05, 0.2, 1.0}) {
    const double product = std::exp(-t) * 0.5 * (theta1(t) - 1.0) * theta1(t);
    EXPECT_NEAR(heat(t).value, product, 1e-12 * product) << "t = " << t;
  }
}

TEST(Cylinder, DecaysMonotonically) {
  const CylinderHeat heat(CylinderHeatConfig{}, 0.1);
  double prev = heat(0.1).value;
  for (double t = 0.2; t < 40.0; t *= 1.5) {
    const double v = heat(t).value;
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(Cylinder, BoundaryHeatLogCoefficient) {
  const auto rep = boundary_heat_test(CylinderHeatConfig{}, log_time_grid(1e-3, 5e-2, 40),
                                      {{0, true}, {0, false}, {0.5, false}, {0.5, true}, {1, false}, {1, true}});
  EXPECT_NEAR(rep.log_coefficient, -pi / 2, 0.05 * pi / 2);
}

TEST(Determinism, SamplesIndependentOfThreads) {
  const auto grid = log_time_grid(1e-3, 5e-2, 12);
  const auto a = HeatSampler(bessel, 1e-3, 1e-14, ExecPolicy{1}).sample(grid, ExecPolicy{1});
  const auto b = HeatSampler(bessel, 1e-3, 1e-14, ExecPolicy{3}).sample(grid, ExecPolicy{3});
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
}
