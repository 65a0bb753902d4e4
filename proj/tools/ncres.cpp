// ncres: config-driven front end.
//
//   ncres residue    --config FILE [--threads N] [--set key=value ...] [--out CSV]
//   ncres dixmier    --config FILE ...
//   ncres heat       --config FILE ...
//   ncres zeta       --config FILE ...
//   ncres parametric --config FILE ...
//   ncres verify     [--config FILE] [--fast] [--threads N]
//
// Exit codes: 0 ok, 2 config error, 3 tolerance failure, 4 resource cap, 1 other.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "ncres/acceptance.hpp"
#include "ncres/ncres.hpp"

using namespace ncres;
using ncres::cli::Cfg;
using ncres::cli::ConfigError;

namespace {

constexpr int exit_config = 2;
constexpr int exit_tolerance = 3;
constexpr int exit_cap = 4;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class ToleranceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Job {
  std::string subcommand;
  std::string file;
  YAML::Node root;
  unsigned threads = 1;
  std::string hash;
  ExecPolicy policy() const { return ExecPolicy{threads}; }
  Cfg cfg() const { return Cfg(root, "", file); }
};

struct Output {
  std::ostringstream csv, report;
  std::vector<std::pair<std::string, double>> scalars;

  void scalar(const std::string& name, double v) { scalars.emplace_back(name, v); }
};

std::string banner(const Job& job) {
  return std::string("ncres ") + version_string + " " + job.subcommand + " config_hash=" + job.hash;
}

void csv_header(const Job& job, Output& out, const std::string& columns) {
  out.csv << "# ncres csv v1 config_hash=" << job.hash << " version=" << version_string << " subcommand=" << job.subcommand
          << "\n"
          << columns << "\n";
}

// ---------------------------------------------------------------------------
// Shared schema pieces.

ClassicalSymbol parse_symbol_cfg(const Cfg& c, int dim) {
  std::string text;
  std::optional<int> order, floor;
  Cfg text_node = c;
  if (c.is_map()) {
    c.allow({"text", "order", "floor"});
    text_node = c.at("text");
    text = text_node.as<std::string>();
    if (c.has("order")) order = c.get<int>("order");
    if (c.has("floor")) floor = c.get<int>("floor");
  } else {
    text = c.as<std::string>();
  }
  try {
    return parse_symbol(text, dim, order, floor);
  } catch (const SymbolParseError& e) {
    text_node.fail(e.what());
  } catch (const std::invalid_argument& e) {
    text_node.fail(e.what());
  }
}

HomTerm parse_term_cfg(const Cfg& c, int dim) {
  try {
    return parse_hom_term(c.as<std::string>(), dim);
  } catch (const SymbolParseError& e) {
    c.fail(e.what());
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
}

Lattice parse_lattice(const Cfg& c) {
  c.allow({"kind", "dim", "copies"});
  const std::string kind = c.one_of("kind", {"torus", "dirichlet_cylinder", "boundary"});
  const int dim = c.int_in("dim", 1, 6);
  if (kind == "torus") return Lattice::torus(dim);
  if (kind == "dirichlet_cylinder") {
    if (dim < 2) c.at("dim").fail("a Dirichlet cylinder needs dim >= 2");
    return Lattice::dirichlet_cylinder(dim);
  }
  return Lattice::boundary(dim, c.int_in("copies", 1, 64, 1));
}

Weight parse_weight(const Cfg& c) {
  c.allow({"scale", "shift", "power", "rate"});
  Weight w;
  w.scale = c.get<double>("scale", 1.0);
  w.shift = c.get<double>("shift", 1.0);
  w.power = c.get<double>("power", -1.0);
  w.rate = c.get<double>("rate", 0.0);
  if (w.rate < 0.0) c.at("rate").fail("must be non-negative");
  return w;
}

Affine parse_affine(const Cfg& c) {
  c.allow({"scale", "shift"});
  Affine a;
  a.scale = c.positive("scale", 1.0);
  a.shift = c.get<double>("shift", 1.0);
  return a;
}

std::vector<double> parse_grid(const Cfg& c) {
  c.allow({"t_min", "t_max", "count"});
  const double lo = c.positive("t_min"), hi = c.positive("t_max");
  if (!(hi > lo)) c.at("t_max").fail("must exceed t_min");
  return log_time_grid(lo, hi, c.int_in("count", 4, 100000));
}

/// "t^-1", "t^0.5 ln t", "ln t", "1", "t".
FitTerm parse_fit_term(const Cfg& c) {
  std::string s = c.as<std::string>();
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(' '), e = v.find_last_not_of(' ');
    return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  };
  s = trim(s);
  FitTerm t{0.0, false};
  if (s.size() >= 4 && s.compare(s.size() - 4, 4, "ln t") == 0) {
    t.log = true;
    s = trim(s.substr(0, s.size() - 4));
  }
  if (s.empty() || s == "1") return t;
  if (s == "t") {
    t.exponent = 1.0;
    return t;
  }
  if (s.rfind("t^", 0) == 0) {
    try {
      std::size_t used = 0;
      t.exponent = std::stod(s.substr(2), &used);
      if (used == s.size() - 2) return t;
    } catch (const std::exception&) {
    }
  }
  c.fail("cannot read fit term '" + c.as<std::string>() + "' (use forms like t^-1, t^0.5, ln t, t^1 ln t)");
}

std::vector<FitTerm> parse_basis(const Cfg& c) {
  std::vector<FitTerm> terms;
  for (const auto& item : c.items()) terms.push_back(parse_fit_term(item));
  if (terms.empty()) c.fail("basis must not be empty");
  return terms;
}

struct HeatJob {
  bool cylinder = false;
  HeatModel model;
  CylinderHeatConfig cyl;
  std::vector<double> grid;
  std::vector<FitTerm> basis;
};

HeatJob parse_heat(const Cfg& c) {
  HeatJob h;
  h.cylinder = c.one_of("model", {"lattice", "cylinder_truncation"}, std::string("lattice")) == "cylinder_truncation";
  if (h.cylinder) {
    if (c.has("lattice")) c.at("lattice").fail("not used by the cylinder_truncation model");
    if (c.has("P")) h.cyl.P = parse_weight(c.at("P"));
    if (c.has("A")) h.cyl.A = parse_affine(c.at("A"));
    h.cyl.m_cutoff = c.int_in("m_cutoff", 1, 1000000, 3000);
  } else {
    h.model.lattice = parse_lattice(c.at("lattice"));
    h.model.P = c.has("P") ? parse_weight(c.at("P")) : Weight{1.0, 1.0, 0.0, 0.0};
    if (c.has("A")) h.model.A = parse_affine(c.at("A"));
    h.model.mode_cap = c.positive("mode_cap", 5e8);
  }
  h.grid = parse_grid(c.at("grid"));
  h.basis = parse_basis(c.at("basis"));
  return h;
}

// ---------------------------------------------------------------------------
// Subcommands.

void run_residue(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "geometry", "interior", "boundary", "green", "poisson",
           "trace", "transmission_depth"});
  const Cfg gc = c.at("geometry");
  gc.allow({"kind", "n"});
  const std::string kind = gc.one_of("kind", {"torus", "cylinder"});
  const int n = gc.int_in("n", kind == "torus" ? 1 : 2, 6);
  BdMSymbol A;
  A.geometry = kind == "torus" ? Geometry::torus(n) : Geometry::cylinder(n);
  A.transmission_depth = c.int_in("transmission_depth", 0, 12, 4);
  if (c.has("interior")) A.p = parse_symbol_cfg(c.at("interior"), n);
  if (c.has("boundary")) A.s = parse_symbol_cfg(c.at("boundary"), n - 1);
  if (c.has("green")) {
    for (const auto& item : c.at("green").items()) {
      item.allow({"b", "type", "terms"});
      SGSymbol fiber(item.int_in("type", 0, 16, 0));
      for (const auto& rank : item.at("terms").items()) {
        rank.allow({"k", "t"});
        try {
          fiber.add(rank.at("k").rational(), rank.at("t").rational());
        } catch (const std::invalid_argument& e) {
          rank.fail(e.what());
        }
      }
      A.g.push_back(GreenTerm{parse_term_cfg(item.at("b"), n - 1), fiber});
    }
  }
  if (c.has("poisson")) {
    for (const auto& item : c.at("poisson").items()) {
      item.allow({"b", "k"});
      A.k.push_back(PoissonTerm{parse_term_cfg(item.at("b"), n - 1), item.at("k").rational()});
    }
  }
  if (c.has("trace")) {
    for (const auto& item : c.at("trace").items()) {
      item.allow({"b", "t", "type"});
      A.t.push_back(TraceTerm{parse_term_cfg(item.at("b"), n - 1), item.at("t").rational(), item.int_in("type", 0, 16, 0)});
    }
  }
  if (!A.geometry.has_boundary() && (!A.g.empty() || !A.k.empty() || !A.t.empty() || A.s)) {
    c.fail("boundary blocks need geometry.kind: cylinder");
  }

  const BoundaryResidue r = boundary_residue(A);
  csv_header(job, out, "block,re,im,method");
  auto row = [&](const char* name, cplx v, const char* method) {
    out.csv << name << "," << num(v.real()) << "," << num(v.imag()) << "," << method << "\n";
    out.report << "  " << std::left << std::setw(16) << name << short_num(v.real());
    if (v.imag() != 0.0) out.report << " + " << short_num(v.imag()) << "i";
    out.report << "\n";
  };
  out.report << "geometry " << A.geometry.name() << "\n";
  row("interior", r.interior, "sphere_moments");
  row("green", r.green, "pi_prime");
  row("boundary_psido", r.boundary_psido, "sphere_moments");
  row("total", r.total, "sum");
  out.scalar("interior", r.interior.real());
  out.scalar("green", r.green.real());
  out.scalar("boundary_psido", r.boundary_psido.real());
  out.scalar("total", r.total.real());
  out.scalar("total_imag", r.total.imag());
}

void run_dixmier(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "lattice", "weight", "cutoff", "mode_cap"});
  SpectrumModel m;
  m.lattice = parse_lattice(c.at("lattice"));
  m.weight = c.has("weight") ? parse_weight(c.at("weight")) : Weight{};
  m.cutoff = c.positive("cutoff");
  if (m.cutoff < 3.0) c.at("cutoff").fail("must be at least 3");
  m.mode_cap = c.positive("mode_cap", 5e8);
  const DixmierEstimate est = dixmier_estimate(m, job.policy());

  csv_header(job, out, "N,sigma_N,sigma_N_over_lnN,cesaro_M");
  for (const auto& row : est.table) {
    out.csv << row.N << "," << num(row.sigma) << "," << num(row.ratio) << "," << num(row.cesaro) << "\n";
  }
  out.csv << "# estimate slope=" << num(est.slope) << " intercept=" << num(est.intercept) << " n_min=" << est.n_min
          << " n_max=" << est.n_max << " fit_residual=" << num(est.fit_residual) << "\n"
          << "# cesaro tail=" << num(est.cesaro_tail) << " drift=" << num(est.cesaro_drift)
          << " corrected=" << num(est.cesaro_corrected) << " disagreement=" << num(est.disagreement) << "\n"
          << "# growth exponent=" << num(est.growth_exponent) << " flag=" << (est.growth_flag ? 1 : 0)
          << " norm_1inf=" << num(est.norm.value) << " argsup=" << est.norm.argsup
          << " attained_at_end=" << (est.norm.attained_at_end ? 1 : 0) << "\n";

  out.report << "model " << m.lattice.name() << " weight " << m.weight.to_string() << " cutoff " << m.cutoff << "\n"
             << "  modes             " << est.n_max << "\n"
             << "  estimate (slope)  " << short_num(est.slope) << "   fit window N in [" << est.n_min << ", " << est.n_max
             << "], rms residual " << short_num(est.fit_residual) << "\n"
             << "  Cesaro M(N_max)   " << short_num(est.cesaro_tail) << "   drift over top decade "
             << short_num(est.cesaro_drift) << "\n"
             << "  Cesaro corrected  " << short_num(est.cesaro_corrected) << "   disagreement "
             << short_num(est.disagreement) << "\n"
             << "  ||.||_(1,inf)     " << short_num(est.norm.value) << " at N = " << est.norm.argsup << "\n";
  if (est.growth_flag) {
    out.report << "  WARNING sigma_N grows faster than ln N (exponent " << short_num(est.growth_exponent)
               << "): the operator is not in L^(1,inf) and the estimate is meaningless\n";
  }
  out.scalar("slope", est.slope);
  out.scalar("cesaro_tail", est.cesaro_tail);
  out.scalar("cesaro_corrected", est.cesaro_corrected);
  out.scalar("disagreement", est.disagreement);
  out.scalar("growth_exponent", est.growth_exponent);
  out.scalar("fit_residual", est.fit_residual);
  out.scalar("norm", est.norm.value);
}

void write_fit(const AsymptoticFit& fit, Output& out) {
  out.report << "  fit on t in [" << short_num(fit.t_lo) << ", " << short_num(fit.t_hi) << "], condition "
             << short_num(fit.condition) << ", rms relative residual " << short_num(fit.residual) << "\n";
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const std::string label = fit.terms[i].label();
    out.report << "    " << std::left << std::setw(12) << label << std::right << std::setw(20)
               << short_num(fit.coefficients[i]) << "   cross-validation delta " << short_num(fit.cv_delta[i]) << "\n";
    out.csv << "# coefficient " << csv_quote(label) << "=" << num(fit.coefficients[i]) << " cv_delta=" << num(fit.cv_delta[i])
            << "\n";
    out.scalar(label, fit.coefficients[i]);
  }
  out.csv << "# fit condition=" << num(fit.condition) << " residual=" << num(fit.residual) << "\n";
  out.scalar("condition", fit.condition);
  out.scalar("residual", fit.residual);
}

void write_samples(const Job& job, const std::vector<HeatSample>& samples, const AsymptoticFit& fit, Output& out) {
  csv_header(job, out, "t,value,tail_bound,fit,rel_residual");
  for (const auto& s : samples) {
    const double f = fit(s.t);
    out.csv << num(s.t) << "," << num(s.value) << "," << num(s.tail_bound) << "," << num(f) << ","
            << num((s.value - f) / s.value) << "\n";
  }
}

void run_heat(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "model", "lattice", "P", "A", "grid", "basis", "mode_cap",
           "m_cutoff"});
  const HeatJob h = parse_heat(c);
  const double t_min = h.grid.back();
  std::vector<HeatSample> samples;
  if (h.cylinder) {
    const CylinderHeat heat(h.cyl, t_min, 1e-13, job.policy());
    samples = heat.sample(h.grid, job.policy());
    out.report << "model cylinder_truncation P " << h.cyl.P.to_string() << " A " << h.cyl.A.scale << "*lambda+" << h.cyl.A.shift
               << " lattice cutoff " << short_num(heat.cutoff()) << "\n";
  } else {
    const HeatSampler sampler(h.model, t_min, 1e-14, job.policy());
    samples = sampler.sample(h.grid, job.policy());
    out.report << "model " << h.model.lattice.name() << " P " << h.model.P.to_string() << " A " << h.model.A.scale
               << "*lambda+" << h.model.A.shift << " lattice cutoff " << short_num(sampler.cutoff()) << "\n";
  }
  const AsymptoticFit fit = fit_expansion(samples, h.basis);
  write_samples(job, samples, fit, out);
  write_fit(fit, out);
}

void run_zeta(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "lattice", "P", "A", "grid", "basis", "mode_cap", "sigma",
           "continuation"});
  const HeatJob h = parse_heat(c);
  const double sigma = c.get<double>("sigma");
  const ZetaReport rep = zeta_residue(h.model, sigma, h.grid, h.basis, job.policy());
  out.report << "model " << h.model.lattice.name() << " P " << h.model.P.to_string() << " A " << h.model.A.scale
             << "*lambda+" << h.model.A.shift << "\n";
  write_samples(job, rep.samples, rep.fit, out);
  write_fit(rep.fit, out);
  out.report << "  residue at s = " << short_num(sigma) << ": " << short_num(rep.residue.value)
             << (rep.residue.pole_of_gamma ? "   (1/Gamma vanishes here: log term only)" : "") << "\n";
  out.csv << "# residue sigma=" << num(sigma) << " value=" << num(rep.residue.value) << " simple=" << num(rep.residue.simple)
          << " log=" << num(rep.residue.log) << "\n";
  out.scalar("residue", rep.residue.value);
  if (c.has("continuation")) {
    for (const auto& item : c.at("continuation").items()) {
      const double s = item.as<double>();
      if (!(s > 0.0)) item.fail("continuation points must be positive");
      const double v = zeta_continuation(h.model, rep.fit, s, job.policy());
      out.report << "  zeta(" << short_num(s) << ") = " << short_num(v) << "\n";
      out.csv << "# continuation s=" << num(s) << " value=" << num(v) << "\n";
      out.scalar("zeta(" + short_num(s) + ")", v);
    }
  }
}

void run_parametric(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "n", "p", "a", "k", "J", "truncation"});
  const int n = c.int_in("n", 1, 4, 2);
  const Geometry g = Geometry::torus(n);
  const ClassicalSymbol p = parse_symbol_cfg(c.at("p"), n);
  const ClassicalSymbol a = parse_symbol_cfg(c.at("a"), n);
  if (a.order() < 1) c.at("a").fail("the auxiliary symbol must have positive order");
  const int k = c.int_in("k", 1, 8, 1);
  const int J = c.int_in("J", 0, 16, std::max(0, p.order() + n));
  const int truncation = c.int_in("truncation", 0, 24, std::max(0, p.order() + n));
  const cplx expanded = resolvent_log_coefficient_expanded(p, a, k, J, truncation, g);
  const cplx closed = resolvent_log_coefficient(p, a.order(), k, g);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const cplx res_back = std::pow(2.0 * pi, n) * static_cast<double>(a.order()) * sign * expanded;

  csv_header(job, out, "route,re,im");
  out.csv << "expansion," << num(expanded.real()) << "," << num(expanded.imag()) << "\n"
          << "closed_form," << num(closed.real()) << "," << num(closed.imag()) << "\n"
          << "difference," << num((expanded - closed).real()) << "," << num((expanded - closed).imag()) << "\n"
          << "residue_from_coefficient," << num(res_back.real()) << "," << num(res_back.imag()) << "\n";
  out.report << "coefficient of lambda^-" << k << " ln lambda on " << g.name() << " (ord A = " << a.order() << ")\n"
             << "  expansion route    " << short_num(expanded.real()) << "\n"
             << "  closed form        " << short_num(closed.real()) << "\n"
             << "  difference         " << short_num(std::abs(expanded - closed)) << "\n"
             << "  implied res p      " << short_num(res_back.real()) << "\n";
  out.scalar("expansion", expanded.real());
  out.scalar("closed_form", closed.real());
  out.scalar("difference", std::abs(expanded - closed));
  out.scalar("residue", res_back.real());
}

bool run_verify(const Job& job, Output& out, bool fast) {
  const Cfg c = job.cfg();
  c.allow({"subcommand", "seed", "threads", "output", "expect", "fast", "dixmier_cutoff"});
  acceptance::Options o;
  o.fast = fast || c.get<bool>("fast", false);
  o.threads = job.threads;
  o.seed = static_cast<std::uint64_t>(c.get<long long>("seed", static_cast<long long>(o.seed)));
  o.dixmier_cutoff = c.positive("dixmier_cutoff", o.dixmier_cutoff);
  csv_header(job, out, "id,name,status,detail");
  bool ok = true;
  const auto results = acceptance::run(o, [](const acceptance::Result& r) { std::cerr << acceptance::format(r) << std::endl; });
  for (const auto& r : results) {
    const char* status = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
    ok = ok && (r.pass || r.skipped);
    out.csv << r.id << "," << csv_quote(r.name) << "," << status << "," << csv_quote(r.detail) << "\n";
    out.report << acceptance::format(r) << "\n";
    out.scalar("criterion" + std::to_string(r.id), r.pass ? 1.0 : 0.0);
  }
  return ok;
}

/// `expect: [{name, value, rel_tol | abs_tol}]`; returns false on a miss.
bool check_expectations(const Job& job, Output& out) {
  const Cfg c = job.cfg();
  if (!c.has("expect")) return true;
  bool ok = true;
  for (const auto& item : c.at("expect").items()) {
    item.allow({"name", "value", "rel_tol", "abs_tol"});
    const std::string name = item.get<std::string>("name");
    const double want = item.get<double>("value");
    if (!item.has("rel_tol") && !item.has("abs_tol")) item.fail("give rel_tol or abs_tol");
    const double* got = nullptr;
    for (const auto& [k, v] : out.scalars) {
      if (k == name) got = &v;
    }
    if (!got) {
      std::string names;
      for (const auto& kv : out.scalars) names += (names.empty() ? "" : ", ") + kv.first;
      item.at("name").fail("no result named '" + name + "' (available: " + names + ")");
    }
    const double err = std::abs(*got - want);
    bool pass = true;
    std::ostringstream os;
    os << "  expect " << name << " = " << short_num(want) << ": got " << short_num(*got);
    if (item.has("rel_tol")) {
      const double rel = relative_error(*got, want), tol = item.get<double>("rel_tol");
      pass = pass && rel <= tol;
      os << ", rel err " << short_num(rel) << " (tol " << short_num(tol) << ")";
    }
    if (item.has("abs_tol")) {
      const double tol = item.get<double>("abs_tol");
      pass = pass && err <= tol;
      os << ", abs err " << short_num(err) << " (tol " << short_num(tol) << ")";
    }
    out.report << os.str() << (pass ? "  PASS" : "  FAIL") << "\n";
    ok = ok && pass;
  }
  return ok;
}

void write_to(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    fallback.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file '" + path + "'");
  f << text;
}

struct Flags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<unsigned> threads;
  std::string out;
  bool fast = false;
};

int run_job(const std::string& sub, const Flags& flags) {
  Job job;
  job.subcommand = sub;
  if (flags.config.empty()) {
    if (sub != "verify") throw ConfigError(sub + ": --config is required");
    job.file = "<defaults>";
    job.root = YAML::Node(YAML::NodeType::Map);
  } else {
    job.file = flags.config;
    job.root = cli::load_yaml(flags.config);
  }
  for (const auto& o : flags.overrides) cli::apply_override(job.root, o);
  const Cfg c = job.cfg();
  if (c.has("subcommand") && c.get<std::string>("subcommand") != sub) {
    c.at("subcommand").fail("config is for '" + c.get<std::string>("subcommand") + "', not '" + sub + "'");
  }
  job.threads = flags.threads ? *flags.threads : static_cast<unsigned>(c.int_in("threads", 1, 1024, 1));
  if (job.threads == 0) throw ConfigError("--threads must be >= 1");
  std::string csv_path, report_path;
  if (c.has("output")) {
    const Cfg oc = c.at("output");
    oc.allow({"csv", "report"});
    csv_path = oc.get<std::string>("csv", "");
    report_path = oc.get<std::string>("report", "");
  }
  if (!flags.out.empty()) csv_path = flags.out;
  job.hash = cli::config_hash(job.root, sub);

  Output out;
  out.report << banner(job) << "\n";
  bool ok = true;
  if (sub == "residue") {
    run_residue(job, out);
  } else if (sub == "dixmier") {
    run_dixmier(job, out);
  } else if (sub == "heat") {
    run_heat(job, out);
  } else if (sub == "zeta") {
    run_zeta(job, out);
  } else if (sub == "parametric") {
    run_parametric(job, out);
  } else {
    ok = run_verify(job, out, flags.fast);
    out.report << (ok ? "all criteria passed" : "acceptance FAILED") << "\n";
  }
  ok = check_expectations(job, out) && ok;
  write_to(report_path, out.report.str(), std::cout);
  if (csv_path.empty() && report_path.empty()) std::cout << "\n";
  write_to(csv_path, out.csv.str(), std::cout);
  return ok ? 0 : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ncres: noncommutative residue, Dixmier trace and heat/zeta coefficient computations"};
  app.set_version_flag("--version", std::string("ncres ") + version_string);
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"residue", "Wodzicki / boundary residue of a symbol description"},
      {"dixmier", "Dixmier trace estimate from an explicit spectrum"},
      {"heat", "heat trace samples and asymptotic fit"},
      {"zeta", "zeta residue via the Mellin split of the heat trace"},
      {"parametric", "ln-coefficient of the resolvent expansion, both routes"},
      {"verify", "run the acceptance suite"},
  };
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("-c,--config", flags.config, "YAML job file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", flags.overrides, "override a config value, e.g. --set weight.power=-0.5");
    sub->add_option("-j,--threads", flags.threads, "worker threads (results do not depend on this)");
    sub->add_option("-o,--out", flags.out, "CSV output path (default: stdout)");
    if (std::string(s.name) == "verify") sub->add_flag("--fast", flags.fast, "skip the slow checks");
    sub->callback([&chosen, name = s.name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }
  try {
    return run_job(chosen, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const YAML::Exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return exit_cap;
  } catch (const FitRejected& e) {
    std::cerr << "fit rejected: " << e.what() << "\n";
    return exit_tolerance;
  } catch (const TruncationError& e) {
    std::cerr << "config error (truncation too shallow): " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
