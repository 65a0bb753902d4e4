#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "ncres/spectral.hpp"

using namespace ncres;

namespace {

std::map<double, std::uint64_t> as_map(const std::vector<Level>& levels) {
  std::map<double, std::uint64_t> m;
  for (const auto& l : levels) m[l.eigenvalue] += l.multiplicity;
  return m;
}

}  // namespace

TEST(Enumerate, SmallLattices) {
  const auto t = as_map(enumerate_levels(Lattice::torus(2), 1.0));
  EXPECT_EQ(t, (std::map<double, std::uint64_t>{{0.0, 1}, {1.0, 4}}));

  const auto c = as_map(enumerate_levels(Lattice::dirichlet_cylinder(2), 2.0));
  EXPECT_EQ(c, (std::map<double, std::uint64_t>{{1.0, 1}, {2.0, 2}, {4.0, 1}}));

  const auto b = as_map(enumerate_levels(Lattice::boundary(1, 2), 3.0));
  EXPECT_EQ(b, (std::map<double, std::uint64_t>{{0.0, 2}, {1.0, 4}, {4.0, 4}, {9.0, 4}}));
}

TEST(Enumerate, CountsMatchBruteForce) {
  const double R = 23.5;
  std::uint64_t brute = 0;
  for (int a = -30; a <= 30; ++a) {
    for (int b = -30; b <= 30; ++b) {
      for (int c = -30; c <= 30; ++c) brute += (a * a + b * b + c * c <= R * R) ? 1 : 0;
    }
  }
  std::uint64_t total = 0;
  for (const auto& l : enumerate_levels(Lattice::torus(3), R, 5e8, ExecPolicy{3})) total += l.multiplicity;
  EXPECT_EQ(total, brute);
}

TEST(Enumerate, CapIsCheckedBeforeWork) {
  EXPECT_THROW(enumerate_levels(Lattice::torus(3), 1e4, 1e6), ResourceCapError);
  const SpectrumModel big{Lattice::torus(2), Weight{}, 1e6, 1e7};
  EXPECT_THROW(WeightSequence::from_model(big), ResourceCapError);
}

TEST(WeightSequence, HarmonicPartialSums) {
  std::vector<double> w;
  for (int j = 1; j <= 1000; ++j) w.push_back(1.0 / j);
  const auto seq = WeightSequence::from_values(w);
  double h = 0.0;
  for (int N = 1; N <= 1000; ++N) {
    h += 1.0 / N;
    if (N % 97 == 0 || N == 1000) {
      EXPECT_NEAR(seq.sigma(N), h, 1e-13);
    }
  }
  const auto norm = norm_1inf(seq);
  // H_N / ln N decreases from N = 2 on (N = 1 uses ln 2 as well).
  EXPECT_LE(norm.argsup, 3u);
  EXPECT_FALSE(norm.attained_at_end);
}

TEST(WeightSequence, TraceClassRatioVanishes) {
  std::vector<double> w;
  for (int j = 1; j <= 200000; ++j) w.push_back(std::ldexp(1.0, -std::min(j, 1000)));
  const auto seq = WeightSequence::from_values(w);
  EXPECT_NEAR(seq.sigma(200000), 1.0, 1e-12);
  EXPECT_LT(seq.sigma(200000) / std::log(200000.0), 0.1);
  const auto est = dixmier_estimate(seq);
  EXPECT_LT(std::abs(est.slope), 1e-6);
}

TEST(WeightSequence, RunsMatchExpandedValues) {
  const WeightSequence runs({{0.5, 3}, {0.25, 2}, {0.1, 4}});
  const auto flat = WeightSequence::from_values({0.5, 0.5, 0.5, 0.25, 0.25, 0.1, 0.1, 0.1, 0.1});
  for (std::uint64_t N = 0; N <= 9; ++N) EXPECT_NEAR(runs.sigma(N), flat.sigma(N), 1e-15);
  EXPECT_TRUE(runs.monotone());
  EXPECT_FALSE(WeightSequence::from_values({1.0, 2.0}).monotone());
  EXPECT_THROW(WeightSequence::from_values({1.0, -1.0}), std::invalid_argument);
}

TEST(Cesaro, ConstantIsFixed) {
  for (double t : {3.0, 10.5, 1e4}) EXPECT_NEAR(cesaro_mean([](std::uint64_t) { return 2.5; }, t), 2.5, 1e-13);
}

TEST(Cesaro, LogarithmicMeasureOfIndicator) {
  const double t0 = 1e6;
  const double root = std::sqrt(t0);
  // Step function equal to 1 on [1, 1000) and 0 afterwards: half the log mass.
  const double v = cesaro_mean([&](std::uint64_t j) { return j < root ? 1.0 : 0.0; }, t0);
  EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Cesaro, AnnihilatesLogLogOverLog) {
  auto f = [](std::uint64_t j) {
    const double s = std::max<double>(static_cast<double>(j), 3.0);
    return std::log(std::log(s)) / std::log(s);
  };
  // int ln ln s / ln s ds/s = (ln ln t)^2 / 2 + const, so M f = O((ln ln t)^2 / ln t).
  auto defect = [&](double t) {
    const double L = std::log(t);
    return cesaro_mean(f, t) * L - 0.5 * std::log(L) * std::log(L);
  };
  const double d5 = defect(1e5), d7 = defect(1e7);
  EXPECT_NEAR(d5, d7, 0.01);
  EXPECT_LT(cesaro_mean(f, 1e7), cesaro_mean(f, 1e5));
}

TEST(Cesaro, IntegratorMatchesDirectMean) {
  std::vector<double> w;
  for (int j = 1; j <= 300000; ++j) w.push_back(1.0 / j);
  const auto seq = WeightSequence::from_values(w);
  const CesaroIntegrator M(seq, ExecPolicy{2});
  auto a = [&](std::uint64_t j) { return seq.sigma(j) / (j == 1 ? std::log(2.0) : std::log(static_cast<double>(j))); };
  for (double t : {10.0, 70000.5, 250000.0}) EXPECT_NEAR(M(t), cesaro_mean(a, t), 1e-12 * cesaro_mean(a, t));
}

TEST(Dixmier, TorusRatioWithinTenPercent) {
  const SpectrumModel m{Lattice::torus(2), Weight{1, 1, -1, 0}, 2000.0};
  const auto w = WeightSequence::from_model(m);
  const auto N = w.size();
  EXPECT_NEAR(w.sigma(N) / std::log(static_cast<double>(N)), pi, 0.1 * pi);
  const auto est = dixmier_estimate(w);
  EXPECT_NEAR(est.slope, pi, 0.02 * pi);
  EXPECT_FALSE(est.growth_flag);
  EXPECT_LT(est.disagreement, 0.02);
}

TEST(Dixmier, CylinderAndCircles) {
  const auto cyl = dixmier_estimate(SpectrumModel{Lattice::dirichlet_cylinder(2), Weight{1, 0, -1, 0}, 1500.0});
  EXPECT_NEAR(cyl.slope, pi / 2, 0.03 * pi / 2);
  const auto circ = dixmier_estimate(SpectrumModel{Lattice::boundary(1, 2), Weight{1, 1, -0.5, 0}, 4000.0});
  EXPECT_NEAR(circ.slope, 4.0, 0.02 * 4.0);
}

TEST(Dixmier, GrowthFlagForNonMeasurableWeight) {
  // (1 + lambda)^{-1/2} on T^2 is not in L^{1,infinity}: sigma_N ~ sqrt(N).
  const auto est = dixmier_estimate(SpectrumModel{Lattice::torus(2), Weight{1, 1, -0.5, 0}, 500.0});
  EXPECT_TRUE(est.growth_flag);
  EXPECT_GT(est.growth_exponent, growth_flag_threshold);
  EXPECT_TRUE(est.norm.attained_at_end);
}

TEST(Dixmier, FormulaMatchesLatticeModels) {
  BdMSymbol torus;
  torus.geometry = Geometry::torus(2);
  torus.p = symbols::bessel_power(2, -1.0, -4);
  EXPECT_NEAR(dixmier_formula(torus).real(), pi, 1e-12);
  EXPECT_NEAR(dixmier_formula(torus).real(), wodzicki_residue(*torus.p, torus.geometry).real() / (4 * pi * pi * 2), 1e-12);

  BdMSymbol cyl;
  cyl.geometry = Geometry::cylinder(2);
  cyl.p = ClassicalSymbol(2, -2, std::nullopt);
  cyl.p->set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, -2.0));
  EXPECT_NEAR(dixmier_formula(cyl).real(), pi / 2, 1e-12);

  BdMSymbol circles;
  circles.geometry = Geometry::cylinder(2);
  circles.s = ClassicalSymbol(1, -1, std::nullopt);
  circles.s->set_component(symbols::atom_term(1, 1.0, {0}, {0}, -1.0));
  EXPECT_NEAR(dixmier_formula(circles).real(), 4.0, 1e-12);
}

TEST(Dixmier, FormulaRejectsWrongOrders) {
  BdMSymbol A;
  A.geometry = Geometry::torus(2);
  A.p = symbols::bessel_power(2, -0.5, -4);
  EXPECT_THROW(dixmier_formula(A), std::invalid_argument);
}

TEST(Dixmier, ThreadCountDoesNotChangeBits) {
  const SpectrumModel m{Lattice::torus(2), Weight{1, 1, -1, 0}, 600.0};
  const auto a = dixmier_estimate(m, ExecPolicy{1});
  const auto b = dixmier_estimate(m, ExecPolicy{4});
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_EQ(a.cesaro_tail, b.cesaro_tail);
  EXPECT_EQ(a.norm.value, b.norm.value);
}
