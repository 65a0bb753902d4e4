#pragma once

// The acceptance suite: one check per criterion, shared by `ncres verify`
// and the acceptance test binary.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ncres/heatzeta.hpp"
#include "ncres/parametric.hpp"
#include "ncres/random.hpp"
#include "ncres/residue.hpp"
#include "ncres/spectral.hpp"

namespace ncres::acceptance {

namespace tol {
inline constexpr double residue_closed_form = 1e-10;
inline constexpr double trace_property = 1e-8;
inline constexpr double compatibility = 1e-12;
inline constexpr double cyclicity = 1e-10;
inline constexpr double connes = 0.02;
inline constexpr double cylinder_dixmier = 0.03;
inline constexpr double boundary_dixmier = 0.02;
inline constexpr double heat_log = 0.02;
inline constexpr double shift_invariance = 0.005;
inline constexpr double zeta_s1 = 0.01;
inline constexpr double zeta_s0 = 0.02;
inline constexpr double triangle = 0.03;
inline constexpr double parametric = 1e-8;
inline constexpr double boundary_heat = 0.05;
}  // namespace tol

struct Options {
  bool fast = false;  // skip the slow boundary heat check
  unsigned threads = 1;
  std::uint64_t seed = 20240607;
  double dixmier_cutoff = 4000.0;
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

/// Shared time grid and bases of the heat and zeta checks.
inline std::vector<double> heat_grid() { return log_time_grid(1e-3, 5e-2, 40); }
inline std::vector<FitTerm> heat_log_basis() { return {{0, true}, {0, false}, {0.5, false}, {1, false}, {1, true}}; }
inline std::vector<FitTerm> epstein_basis() {
  return {{-1, false}, {-0.5, false}, {0, false}, {0.5, false}, {1, false}, {1, true}};
}
inline std::vector<FitTerm> cylinder_basis() {
  return {{0, true}, {0, false}, {0.5, false}, {0.5, true}, {1, false}, {1, true}};
}
inline HeatModel bessel_heat(double shift) { return HeatModel{Lattice::torus(2), Weight{1, shift, -1, 0}, Affine{1, shift}}; }
inline HeatModel epstein_heat() { return HeatModel{Lattice::torus(2), Weight{1, 1, 0, 0}, Affine{1, 1}}; }

inline SpectrumModel torus_dixmier(double R) { return {Lattice::torus(2), Weight{1, 1, -1, 0}, R}; }
inline SpectrumModel cylinder_dixmier(double R) { return {Lattice::dirichlet_cylinder(2), Weight{1, 0, -1, 0}, R}; }
inline SpectrumModel circles_dixmier(double R) { return {Lattice::boundary(1, 2), Weight{1, 1, -0.5, 0}, R}; }

/// The raw numbers behind criteria 4-7, printed with %.17g.
struct NumericCore {
  double torus_slope = 0, cylinder_slope = 0, circles_slope = 0;
  double heat_log1 = 0, heat_log2 = 0;
  double zeta_s1 = 0, zeta_s0 = 0;

  std::string fingerprint() const {
    return fmt("%.17g %.17g %.17g %.17g %.17g %.17g %.17g", torus_slope, cylinder_slope, circles_slope, heat_log1,
               heat_log2, zeta_s1, zeta_s0);
  }
};

inline NumericCore numeric_core(const Options& o, unsigned threads) {
  const ExecPolicy pol{threads};
  NumericCore c;
  c.torus_slope = dixmier_estimate(torus_dixmier(o.dixmier_cutoff), pol).slope;
  c.cylinder_slope = dixmier_estimate(cylinder_dixmier(o.dixmier_cutoff), pol).slope;
  c.circles_slope = dixmier_estimate(circles_dixmier(o.dixmier_cutoff), pol).slope;
  const auto grid = heat_grid();
  c.heat_log1 = *zeta_residue(bessel_heat(1.0), 0.0, grid, heat_log_basis(), pol).fit.coefficient(0, true);
  c.heat_log2 = *zeta_residue(bessel_heat(2.0), 0.0, grid, heat_log_basis(), pol).fit.coefficient(0, true);
  c.zeta_s1 = zeta_residue(epstein_heat(), 1.0, grid, epstein_basis(), pol).residue.value;
  c.zeta_s0 = zeta_residue(bessel_heat(1.0), 0.0, grid, heat_log_basis(), pol).residue.value;
  return c;
}

inline double rel(double v, double ref) { return relative_error(v, ref); }

inline Result residue_closed_form() {
  Result r;
  r.id = 1;
  r.name = "residue closed form";
  double worst = 0.0;
  for (int n : {2, 3}) {
    const cplx res = wodzicki_residue(symbols::bessel_power(n, -0.5 * n, -n - 2), Geometry::torus(n));
    const double ref = sphere_area(n) * std::pow(2.0 * pi, n);
    worst = std::max(worst, std::abs(res - ref) / ref);
    r.detail += fmt("n=%d res=%.12g ref=%.12g; ", n, res.real(), ref);
  }
  r.pass = worst <= tol::residue_closed_form;
  r.detail += fmt("max rel err %.2e (tol %.0e)", worst, tol::residue_closed_form);
  return r;
}

inline Result trace_property(const Options& o) {
  Result r;
  r.id = 2;
  r.name = "trace property";
  random::Engine e(o.seed);
  const int n = 2;
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    const int ma = random::uniform_int(e, 0, 2), mb = random::uniform_int(e, 0, 2);
    const auto a = random::symbol(e, n, ma, ma + n + 3), b = random::symbol(e, n, mb, mb + n + 3);
    const int N = ma + mb + n;
    const auto c = leibniz_compose(a, b, N) - leibniz_compose(b, a, N);
    const double v = std::abs(wodzicki_residue(c, Geometry::torus(n)));
    worst = std::max(worst, v / (1.0 + a.coefficient_norm() * b.coefficient_norm()));
  }
  r.pass = worst <= tol::trace_property;
  r.detail = fmt("100 pairs, max |res[a,b]|/scale = %.2e (tol %.0e)", worst, tol::trace_property);
  return r;
}

inline Result boundary_algebra(const Options& o) {
  Result r;
  r.id = 3;
  r.name = "Pi' and boundary algebra";
  const cplx I{0.0, 1.0};
  const RationalFn h(Polynomial::constant(1.0), {Pole{I, 1}, Pole{-I, 1}});
  const cplx half = pi_prime(h);
  const auto d = pm_decompose(h);
  const cplx killed = pi_prime(d.minus) + pi_prime(RationalFn::polynomial(Polynomial{1.0, 2.0, 3.0})) +
                      pi_prime(RationalFn::pole_term(1.0, -I) + RationalFn::polynomial(Polynomial{0.0, 1.0}));
  random::Engine e(o.seed + 3);
  double compat = 0.0, cyc = 0.0;
  for (int q = 0; q < 50; ++q) {
    const RationalFn k = random::half_plane_rational(e, true);
    const int type = random::uniform_int(e, 0, 2);
    const RationalFn t = random::minus_rational(e, type);
    const cplx lhs = sg_trace(compose_kt(k, t, type)), rhs = compose_tk(t, k);
    compat = std::max(compat, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    const SGSymbol g1 = random::sg_symbol(e), g2 = random::sg_symbol(e);
    const cplx c12 = sg_trace(compose_gg(g1, g2)), c21 = sg_trace(compose_gg(g2, g1));
    cyc = std::max(cyc, std::abs(c12 - c21) / std::max(1.0, std::abs(c12)));
  }
  const double half_err = std::abs(half - 0.5);
  r.pass = half_err <= 1e-15 && killed == cplx{} && compat <= tol::compatibility && cyc <= tol::cyclicity;
  r.detail = fmt("Pi'(1/(t^2+1))-1/2 = %.1e; Pi'(minus/poly) = %g; compat %.2e (tol %.0e); cyclicity %.2e (tol %.0e)",
                 half_err, std::abs(killed), compat, tol::compatibility, cyc, tol::cyclicity);
  return r;
}

inline Result connes(const Options& o, const NumericCore& c) {
  Result r;
  r.id = 4;
  r.name = "Connes identity on T^2";
  const double res = wodzicki_residue(symbols::bessel_power(2, -1, -4), Geometry::torus(2)).real();
  const double e1 = rel(c.torus_slope, pi), e2 = rel(std::pow(2.0 * pi, 2) * 2.0 * c.torus_slope, res);
  r.pass = e1 <= tol::connes && e2 <= tol::connes;
  r.detail = fmt("R=%g estimate %.6f vs pi (rel %.2e); 8pi^2*estimate vs res (rel %.2e); tol %.0e", o.dixmier_cutoff,
                 c.torus_slope, e1, e2, tol::connes);
  return r;
}

inline Result boundary_dixmier(const NumericCore& c) {
  Result r;
  r.id = 5;
  r.name = "boundary Dixmier";
  BdMSymbol cyl;
  cyl.geometry = Geometry::cylinder(2);
  ClassicalSymbol p(2, -2, std::nullopt);
  p.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, -2));
  cyl.p = p;
  BdMSymbol circ;
  circ.geometry = Geometry::cylinder(2);
  ClassicalSymbol s(1, -1, std::nullopt);
  s.set_component(symbols::atom_term(1, 1.0, {0}, {0}, -1));
  circ.s = s;
  const double f_cyl = dixmier_formula(cyl).real(), f_circ = dixmier_formula(circ).real();

  // The singular Green, potential and trace blocks must not move the value.
  BdMSymbol pert = cyl;
  pert.s = s;
  const double before = dixmier_formula(pert).real();
  const RationalFn k = RationalFn::pole_term(1.0, {0.0, 1.0}), t = RationalFn::pole_term(1.0, {0.0, -1.0});
  pert.g.push_back(GreenTerm{symbols::atom_term(1, 3.0, {1}, {0}, -2), SGSymbol::rank_one(k, t)});
  pert.g.push_back(GreenTerm{symbols::atom_term(1, 1.5, {0}, {0}, -3), SGSymbol::rank_one(k, t * cplx{2.0, 1.0})});
  pert.k.push_back(PoissonTerm{symbols::atom_term(1, 1.0, {0}, {0}, -2), k});
  pert.t.push_back(TraceTerm{symbols::atom_term(1, 1.0, {0}, {0}, -1), t, 0});
  const double after = dixmier_formula(pert).real();

  const double e_cyl = rel(c.cylinder_slope, pi / 2), e_circ = rel(c.circles_slope, 4.0);
  const double m_cyl = rel(c.cylinder_slope, f_cyl), m_circ = rel(c.circles_slope, f_circ);
  r.pass = e_cyl <= tol::cylinder_dixmier && m_cyl <= tol::cylinder_dixmier && e_circ <= tol::boundary_dixmier &&
           m_circ <= tol::boundary_dixmier && before == after;
  r.detail = fmt("cylinder %.6f vs pi/2 (rel %.2e, formula %.6f); circles %.6f vs 4 (rel %.2e, formula %.6f); "
                 "g/k/t perturbation delta %g",
                 c.cylinder_slope, e_cyl, f_cyl, c.circles_slope, e_circ, f_circ, after - before);
  return r;
}

inline Result heat_log(const NumericCore& c) {
  Result r;
  r.id = 6;
  r.name = "heat log coefficient";
  const double e = rel(c.heat_log1, -pi), s = rel(c.heat_log2, c.heat_log1);
  r.pass = e <= tol::heat_log && s <= tol::shift_invariance;
  r.detail = fmt("ln t coefficient %.6f vs -pi (rel %.2e, tol %.0e); shift 2 gives %.6f (rel %.2e, tol %.0e)",
                 c.heat_log1, e, tol::heat_log, c.heat_log2, s, tol::shift_invariance);
  return r;
}

inline Result zeta(const NumericCore& c) {
  Result r;
  r.id = 7;
  r.name = "zeta residues";
  const double res = wodzicki_residue(symbols::bessel_power(2, -1, -4), Geometry::torus(2)).real();
  const double e1 = rel(c.zeta_s1, pi), e0 = rel(c.zeta_s0, pi);
  const double via_heat = -std::pow(2.0 * pi, 2) * 2.0 * c.heat_log1;
  const double via_zeta = std::pow(2.0 * pi, 2) * 2.0 * c.zeta_s0;
  const double tri = std::max({rel(via_heat, res), rel(via_zeta, res), rel(via_heat, via_zeta)});
  r.pass = e1 <= tol::zeta_s1 && e0 <= tol::zeta_s0 && tri <= tol::triangle;
  r.detail = fmt("Res s=1 %.6f (rel %.2e); Res s=0 %.6f (rel %.2e); triangle res %.4f heat %.4f zeta %.4f (max rel %.2e)",
                 c.zeta_s1, e1, c.zeta_s0, e0, res, via_heat, via_zeta, tri);
  return r;
}

inline Result parametric_routes(const Options& o) {
  Result r;
  r.id = 8;
  r.name = "parametric routes";
  random::Engine e(o.seed + 8);
  const int n = 2;
  const Geometry g = Geometry::torus(n);
  double routes = 0.0, loop = 0.0;
  for (int q = 0; q < 20; ++q) {
    const int mp = random::uniform_int(e, -2, 0);
    const ClassicalSymbol p = random::symbol(e, n, mp, mp + n + 1);
    const int m = random::uniform_int(e, 1, 2), k = random::uniform_int(e, 1, 3);
    const ClassicalSymbol a = random::elliptic(e, n, m);
    const cplx r1 = resolvent_log_coefficient_expanded(p, a, k, 3, mp + n + 2, g);
    const cplx r2 = resolvent_log_coefficient(p, m, k, g);
    const double scale = std::max(1.0, std::abs(r2));
    routes = std::max(routes, std::abs(r1 - r2) / scale);
    // -(2pi)^n ord(A) c'_0 with c'_0 = -(-1)^k C_lambda
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const cplx back = std::pow(2.0 * pi, n) * m * sign * r1;
    const cplx res = wodzicki_residue(p, g);
    loop = std::max(loop, std::abs(back - res) / std::max(1.0, std::abs(res)));
  }
  // Auxiliary independence on the reference pair.
  const ClassicalSymbol p = symbols::bessel_power(2, -1, -4);
  ClassicalSymbol a1(2, 2, std::nullopt), a2(2, 2, std::nullopt);
  a1.set_component(symbols::atom_term(2, 1.0, {0, 0}, {0, 0}, 2));
  a2 = a1;
  a2.set_component(symbols::atom_term(2, 1.0, {1, 0}, {0, 0}, 1));
  const cplx v1 = resolvent_log_coefficient_expanded(p, a1, 2, 4, 4, g);
  const cplx v2 = resolvent_log_coefficient_expanded(p, a2, 2, 4, 4, g);
  const double aux = std::abs(v1 - v2) / std::max(1.0, std::abs(v1));
  const cplx back = std::pow(2.0 * pi, 2) * 2.0 * v1;
  const double ref = 8.0 * pi * pi * pi;
  const double c1 = std::abs(back - ref) / ref;
  loop = std::max(loop, c1);
  r.pass = routes <= tol::parametric && aux <= tol::parametric && loop <= tol::parametric;
  r.detail = fmt("20 triples max route diff %.2e; auxiliary independence %.2e (value %.10f); residue loop %.2e; tol %.0e",
                 routes, aux, v1.real(), loop, tol::parametric);
  return r;
}

inline Result boundary_heat(const Options& o) {
  Result r;
  r.id = 9;
  r.name = "boundary heat";
  if (o.fast) {
    r.skipped = true;
    r.pass = true;
    r.detail = "skipped (--fast)";
    return r;
  }
  const auto rep = boundary_heat_test(CylinderHeatConfig{}, log_time_grid(1e-3, 5e-2, 16), cylinder_basis(),
                                      ExecPolicy{o.threads});
  const double e = rel(rep.log_coefficient, -pi / 2);
  r.pass = e <= tol::boundary_heat;
  r.detail = fmt("ln t coefficient %.6f vs -pi/2 (rel %.2e, tol %.0e); cond %.3g", rep.log_coefficient, e,
                 tol::boundary_heat, rep.fit.condition);
  return r;
}

inline Result determinism(const Options& o, const NumericCore& base) {
  Result r;
  r.id = 10;
  r.name = "determinism across threads";
  const std::string f1 = base.fingerprint();
  const std::string f4 = numeric_core(o, 4).fingerprint();
  const std::string f8 = numeric_core(o, 8).fingerprint();
  r.pass = f1 == f4 && f1 == f8;
  r.detail = r.pass ? "criteria 4-7 outputs identical at 1/4/8 threads" : "outputs differ: [" + f1 + "] [" + f4 + "] [" + f8 + "]";
  return r;
}

inline std::vector<Result> run(const Options& o, const std::function<void(const Result&)>& on_result = {}) {
  std::vector<Result> out;
  NumericCore core;
  std::string core_error;
  bool core_done = false;
  auto need_core = [&] {
    if (!core_done) {
      core_done = true;
      try {
        core = numeric_core(o, o.threads);
      } catch (const std::exception& ex) {
        core_error = ex.what();
      }
    }
    if (!core_error.empty()) throw std::runtime_error(core_error);
  };
  auto timed = [&](int id, const char* name, auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = f();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.id = id;
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
    if (on_result) on_result(r);
  };
  timed(1, "residue closed form", [&] { return residue_closed_form(); });
  timed(2, "trace property", [&] { return trace_property(o); });
  timed(3, "Pi' and boundary algebra", [&] { return boundary_algebra(o); });
  // Criteria 4-7 share one evaluation; its time is charged to criterion 4.
  timed(4, "Connes identity on T^2", [&] { need_core(); return connes(o, core); });
  timed(5, "boundary Dixmier", [&] { need_core(); return boundary_dixmier(core); });
  timed(6, "heat log coefficient", [&] { need_core(); return heat_log(core); });
  timed(7, "zeta residues", [&] { need_core(); return zeta(core); });
  timed(8, "parametric routes", [&] { return parametric_routes(o); });
  timed(9, "boundary heat", [&] { return boundary_heat(o); });
  timed(10, "determinism across threads", [&] { need_core(); return determinism(o, core); });
  return out;
}

inline std::string format(const Result& r) {
  return fmt("[%s] %2d %-28s %7.2fs  %s", r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL"), r.id, r.name.c_str(),
             r.seconds, r.detail.c_str());
}

}  // namespace ncres::acceptance
