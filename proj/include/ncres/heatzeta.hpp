#pragma once

// Heat traces trace(P e^{-tA}) on explicit spectra, least-squares fits of
// their small-t expansions (with ln t terms), zeta residues read off the
// fitted coefficients through the Mellin transform, and the cylinder trace
// of a truncated operator P_+.

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <optional>
#include <sstream>
#include <vector>

#include "ncres/core.hpp"
#include "ncres/spectral.hpp"

namespace ncres {

/// A(lambda) = scale * lambda + shift, with lambda the Laplacian eigenvalue.
struct Affine {
  double scale = 1.0;
  double shift = 1.0;
  double operator()(double lambda) const { return scale * lambda + shift; }
};

/// P and A as functions of the same Laplacian eigenvalues.
struct HeatModel {
  Lattice lattice = Lattice::torus(2);
  Weight P{1.0, 1.0, 0.0, 0.0};
  Affine A;
  double mode_cap = 5e8;
};

struct HeatSample {
  double t;
  double value;
  double tail_bound;
};

namespace detail {

/// I_k = int_{u0}^inf u^k e^{-a u^2} du.
inline std::vector<double> gaussian_moments(double a, double u0, int kmax) {
  std::vector<double> I(static_cast<std::size_t>(kmax + 1));
  const double e = std::exp(-a * u0 * u0);
  I[0] = 0.5 * std::sqrt(pi / a) * std::erfc(std::sqrt(a) * u0);
  if (kmax >= 1) I[1] = e / (2.0 * a);
  for (int k = 2; k <= kmax; ++k) I[k] = (k - 1) / (2.0 * a) * I[k - 2] + std::pow(u0, k - 1) * e / (2.0 * a);
  return I;
}

}  // namespace detail

/// Bound for sum over modes with |k| > R of sup_tail(P) e^{-tA}: every
/// lattice point's unit cube lies in the shell |y| >= R - c, c = sqrt(n)/2,
/// which turns the sum into Omega_n int_{R-2c}^inf (u+c)^{n-1} f(u) du.
/// `p_sup` bounds P on the tail.
inline double lattice_tail_bound(const Lattice& L, double R, double t, const Affine& A, double p_sup) {
  const int n = L.dim;
  const double c = 0.5 * std::sqrt(static_cast<double>(n));
  const double u0 = std::max(0.0, R - 2.0 * c);
  const auto I = detail::gaussian_moments(t * A.scale, u0, n - 1);
  double s = 0.0;
  for (int k = 0; k <= n - 1; ++k) s += binomial(n - 1, k) * std::pow(c, n - 1 - k) * I[static_cast<std::size_t>(k)];
  return sphere_area(n) * p_sup * std::exp(-t * A.shift) * s * L.copies;
}

/// Strictly decreasing log-spaced grid from t_hi down to t_lo.
inline std::vector<double> log_time_grid(double t_lo, double t_hi, int count) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || count < 2) throw std::invalid_argument("log_time_grid: need 0 < t_lo < t_hi and count >= 2");
  std::vector<double> g;
  for (int i = 0; i < count; ++i) {
    g.push_back(std::exp(std::log(t_hi) + (std::log(t_lo) - std::log(t_hi)) * i / (count - 1)));
  }
  return g;
}

/// Samples trace(P e^{-tA}) for t >= t_min from one enumeration whose
/// cutoff makes the certified tail at t_min smaller than rel_tol times the
/// first-order size of the trace.
class HeatSampler {
 public:
  HeatSampler(const HeatModel& m, double t_min, double rel_tol = 1e-14, const ExecPolicy& policy = {})
      : model_(m), t_min_(t_min) {
    if (!(t_min > 0.0)) throw std::invalid_argument("heat_trace: t must be positive");
    if (m.P.power > 0.0 || m.P.rate != 0.0) throw std::invalid_argument("heat_trace: P weight must be (lambda+shift)^power, power <= 0");
    if (!(m.A.scale > 0.0)) throw std::invalid_argument("heat_trace: A must have positive slope");
    if (m.P.power < 0.0 && !(m.P.shift > 0.0)) throw std::invalid_argument("heat_trace: P needs a positive shift");
    // Size estimate of the trace: the P(0)-weighted Gaussian integral.
    const int n = m.lattice.dim;
    const double scale = std::abs(m.P(0.0)) * std::pow(pi / (t_min * m.A.scale), 0.5 * n) * std::exp(-t_min * m.A.shift) *
                         (m.lattice.kind == Lattice::Kind::dirichlet_cylinder ? 0.5 : 1.0) * m.lattice.copies;
    R_ = 4.0;
    while (tail(R_, t_min) > rel_tol * scale) {
      R_ *= 1.1;
      if (m.lattice.mode_bound(R_) > m.mode_cap) {
        std::ostringstream os;
        os << "heat_trace: tail bound at t = " << t_min << " is unattainable within the mode cap";
        throw ResourceCapError(os.str());
      }
    }
    levels_ = enumerate_levels(m.lattice, R_, m.mode_cap, policy);
    weights_.reserve(levels_.size());
    for (const auto& l : levels_) weights_.push_back(m.P(l.eigenvalue) * static_cast<double>(l.multiplicity));
  }

  double cutoff() const { return R_; }
  double t_min() const { return t_min_; }

  double tail(double R, double t) const {
    const double u0 = std::max(0.0, R - std::sqrt(static_cast<double>(model_.lattice.dim)));
    return lattice_tail_bound(model_.lattice, R, t, model_.A, std::abs(model_.P(u0 * u0)));
  }

  HeatSample operator()(double t) const {
    if (t < t_min_ * (1.0 - 1e-12)) throw std::invalid_argument("heat_trace: t below the sampler's t_min");
    const ChunkPlan plan{levels_.size(), 4096};
    CompensatedSum total;
    for (std::size_t c = 0; c < plan.count(); ++c) {
      CompensatedSum part;
      for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
        part.add(weights_[i] * std::exp(-t * model_.A(levels_[i].eigenvalue)));
      }
      total.add(part);
    }
    return HeatSample{t, total.value(), tail(R_, t)};
  }

  /// Samples on a grid; parallel over grid points, each sum order-fixed.
  std::vector<HeatSample> sample(const std::vector<double>& grid, const ExecPolicy& policy = {}) const {
    std::vector<HeatSample> out(grid.size());
    parallel_for_chunks(grid.size(), policy, [&](std::size_t i) { out[i] = (*this)(grid[i]); });
    return out;
  }

 private:
  HeatModel model_;
  double t_min_;
  double R_ = 0.0;
  std::vector<Level> levels_;
  std::vector<double> weights_;
};

inline HeatSample heat_trace(const HeatModel& m, double t, const ExecPolicy& policy = {}) {
  return HeatSampler(m, t, 1e-14, policy)(t);
}

/// One fitted monomial t^exponent (times ln t when `log`).
struct FitTerm {
  double exponent;
  bool log = false;

  double operator()(double t) const { return std::pow(t, exponent) * (log ? std::log(t) : 1.0); }
  std::string label() const {
    std::ostringstream os;
    os << "t^" << exponent << (log ? " ln t" : "");
    return os.str();
  }
};

struct AsymptoticFit {
  std::vector<FitTerm> terms;
  std::vector<double> coefficients;
  std::vector<double> cv_delta;  // |coefficient on the halved grid - coefficient|
  double residual = 0.0;         // RMS relative residual
  double condition = 0.0;        // of the column-normalized weighted design
  double t_lo = 0.0, t_hi = 0.0;

  std::optional<double> coefficient(double exponent, bool log) const {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i].log == log && std::abs(terms[i].exponent - exponent) < 1e-12) return coefficients[i];
    }
    return std::nullopt;
  }
  double operator()(double t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) s += coefficients[i] * terms[i](t);
    return s;
  }
};

inline constexpr double max_fit_condition = 1e8;

namespace detail {

inline AsymptoticFit solve_fit(const std::vector<HeatSample>& s, const std::vector<FitTerm>& terms) {
  const auto rows = static_cast<Eigen::Index>(s.size());
  const auto cols = static_cast<Eigen::Index>(terms.size());
  Eigen::MatrixXd M(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double w = 1.0 / std::max(std::abs(s[static_cast<std::size_t>(i)].value), 1e-300);
    y(i) = s[static_cast<std::size_t>(i)].value * w;
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = terms[static_cast<std::size_t>(j)](s[static_cast<std::size_t>(i)].t) * w;
  }
  const Eigen::VectorXd norms = M.colwise().norm();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (!(norms(j) > 0.0)) throw FitRejected("fit_expansion: a basis column vanishes on the grid");
    M.col(j) /= norms(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  AsymptoticFit f;
  f.terms = terms;
  f.condition = sv(0) / sv(sv.size() - 1);
  const Eigen::VectorXd z = svd.solve(y);
  f.residual = std::sqrt((M * z - y).squaredNorm() / static_cast<double>(rows));
  for (Eigen::Index j = 0; j < cols; ++j) f.coefficients.push_back(z(j) / norms(j));
  return f;
}

}  // namespace detail

/// Weighted (relative) least squares in the given monomials. Rejects
/// under-determined grids, grids spanning less than 1.5 decades, and
/// designs with condition number above 1e8.
inline AsymptoticFit fit_expansion(std::vector<HeatSample> samples, const std::vector<FitTerm>& terms) {
  if (terms.empty()) throw FitRejected("fit_expansion: empty basis");
  if (samples.size() < 2 * terms.size()) {
    std::ostringstream os;
    os << "fit_expansion: " << samples.size() << " samples for " << terms.size() << " coefficients (need twice as many)";
    throw FitRejected(os.str());
  }
  std::sort(samples.begin(), samples.end(), [](const HeatSample& a, const HeatSample& b) { return a.t > b.t; });
  const double t_hi = samples.front().t, t_lo = samples.back().t;
  if (!(t_lo > 0.0) || std::log10(t_hi / t_lo) < 1.5 - 1e-12) throw FitRejected("fit_expansion: grid must span at least 1.5 decades");
  AsymptoticFit f = detail::solve_fit(samples, terms);
  if (!(f.condition <= max_fit_condition)) {
    std::ostringstream os;
    os << "fit_expansion: design condition number " << f.condition << " exceeds " << max_fit_condition;
    throw FitRejected(os.str());
  }
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  std::vector<HeatSample> half;
  for (std::size_t i = 0; i < samples.size(); i += 2) half.push_back(samples[i]);
  f.cv_delta.assign(terms.size(), std::numeric_limits<double>::quiet_NaN());
  if (half.size() >= terms.size()) {
    const AsymptoticFit h = detail::solve_fit(half, terms);
    for (std::size_t i = 0; i < terms.size(); ++i) f.cv_delta[i] = std::abs(h.coefficients[i] - f.coefficients[i]);
  }
  return f;
}

struct ZetaResidue {
  double value = 0.0;
  double simple = 0.0;  // coefficient of t^{-sigma}
  double log = 0.0;     // coefficient of t^{-sigma} ln t
  bool pole_of_gamma = false;
};

/// Residue at s = sigma of Gamma(s)^{-1} int_0^1 t^{s-1} theta(t) dt with theta
/// replaced by its fitted expansion: t^{-sigma} gives a simple pole with
/// residue c, t^{-sigma} ln t a double pole with coefficient -c. At
/// sigma = -l, 1/Gamma has a simple zero with derivative (-1)^l l!.
inline ZetaResidue zeta_residue(const AsymptoticFit& fit, double sigma) {
  ZetaResidue r;
  r.simple = fit.coefficient(-sigma, false).value_or(0.0);
  r.log = fit.coefficient(-sigma, true).value_or(0.0);
  const double a1 = r.simple, a2 = -r.log;
  const double l = -sigma;
  if (l >= 0 && std::abs(l - std::round(l)) < 1e-12) {
    r.pole_of_gamma = true;
    const int li = static_cast<int>(std::lround(l));
    r.value = ((li % 2 == 0) ? 1.0 : -1.0) * std::tgamma(li + 1.0) * a2;
  } else {
    r.value = (a1 - boost::math::digamma(sigma) * a2) / boost::math::tgamma(sigma);
  }
  return r;
}

struct ZetaReport {
  ZetaResidue residue;
  AsymptoticFit fit;
  std::vector<HeatSample> samples;
};

inline ZetaReport zeta_residue(const HeatModel& m, double sigma, const std::vector<double>& grid,
                               const std::vector<FitTerm>& terms, const ExecPolicy& policy = {}) {
  if (!(m.A(0.0) >= 1.0)) throw std::invalid_argument("zeta_residue: A must be >= 1 on the spectrum");
  const double t_min = *std::min_element(grid.begin(), grid.end());
  const HeatSampler sampler(m, t_min, 1e-14, policy);
  ZetaReport rep;
  rep.samples = sampler.sample(grid, policy);
  rep.fit = fit_expansion(rep.samples, terms);
  rep.residue = zeta_residue(rep.fit, sigma);
  return rep;
}

/// Gamma(s)^{-1} [ int_0^{t_c} t^{s-1} fit dt + int_{t_c}^inf t^{s-1} theta dt ],
/// with the first integral continued analytically term by term. t_c is the
/// top of the fit window.
inline double zeta_continuation(const HeatModel& m, const AsymptoticFit& fit, double s, const ExecPolicy& policy = {}) {
  const double tc = fit.t_hi;
  const HeatSampler sampler(m, tc, 1e-14, policy);
  double head = 0.0;
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const double q = s + fit.terms[i].exponent;
    if (std::abs(q) < 1e-12) throw std::invalid_argument("zeta_continuation: s sits on a pole");
    const double p = std::pow(tc, q);
    head += fit.coefficients[i] * (fit.terms[i].log ? p * (std::log(tc) / q - 1.0 / (q * q)) : p / q);
  }
  auto f = [&](double t) { return std::pow(t, s - 1.0) * sampler(t).value; };
  const double mid = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, tc, 1.0, 15, 1e-13);
  boost::math::quadrature::exp_sinh<double> es;
  const double tail = es.integrate([&](double u) { return f(1.0 + u); }, 1e-13);
  return (head + mid + tail) / boost::math::tgamma(s);
}

// ---------------------------------------------------------------------------
// Truncated operators on the cylinder X = [0, pi] x T^1 inside Omega = T^2.

/// |c_{jm}|^2 for the zero extension of sqrt(2/pi) sin(j x) from [0, pi] to
/// the circle, in the basis e^{imx}/sqrt(2 pi).
inline double sine_coefficient_sq(int j, int m) {
  if (j < 1) throw std::invalid_argument("sine_coefficient_sq: j must be >= 1");
  if (m == j || m == -j) return 0.25;
  if (((j - m) % 2 + 2) % 2 == 0) return 0.0;
  const double jj = j, d = static_cast<double>(j) * j - static_cast<double>(m) * m;
  return 4.0 * jj * jj / (pi * pi * d * d);
}

struct CylinderHeatConfig {
  Weight P{1.0, 1.0, -1.0, 0.0};  // P = f(-Delta) on Omega
  Affine A;                       // A = scale * Delta_Dirichlet + shift
  int m_cutoff = 3000;            // Fourier modes |m| <= m_cutoff of the extension
};

/// trace(P_+ e^{-tA}) = sum_{j >= 1, k} e^{-t A(j^2+k^2)} sum_m |c_jm|^2 P(m^2+k^2).
/// The inner sums are independent of t and are tabulated once; the m-tail
/// uses the exact Parseval remainder.
class CylinderHeat {
 public:
  CylinderHeat(const CylinderHeatConfig& cfg, double t_min, double rel_tol = 1e-13, const ExecPolicy& policy = {})
      : cfg_(cfg), t_min_(t_min) {
    if (cfg.P.power > 0.0 || cfg.P.rate != 0.0) throw std::invalid_argument("cylinder heat: P must be (lambda+shift)^power, power <= 0");
    if (cfg.m_cutoff < 1) throw std::invalid_argument("cylinder heat: m_cutoff must be >= 1");
    const Lattice L = Lattice::dirichlet_cylinder(2);
    const double scale = std::abs(cfg.P(0.0)) * 0.5 * pi / (t_min * cfg.A.scale) * std::exp(-t_min * cfg.A.shift);
    R_ = 4.0;
    while (lattice_tail_bound(L, R_, t_min, cfg.A, std::abs(cfg.P(0.0))) > rel_tol * scale) R_ *= 1.1;
    jmax_ = static_cast<int>(std::floor(R_));
    if (jmax_ > cfg.m_cutoff / 2) throw ResourceCapError("cylinder heat: m_cutoff too small for the required j range");
    const int M = cfg.m_cutoff;
    // Pk[k][m + M] = P(m^2 + k^2)
    std::vector<std::vector<double>> Pk(static_cast<std::size_t>(jmax_ + 1), std::vector<double>(2 * M + 1));
    for (int k = 0; k <= jmax_; ++k) {
      for (int m = -M; m <= M; ++m) Pk[k][m + M] = cfg.P(static_cast<double>(m) * m + static_cast<double>(k) * k);
    }
    S_.assign(static_cast<std::size_t>((jmax_ + 1) * (jmax_ + 1)), 0.0);
    S_err_.assign(S_.size(), 0.0);
    parallel_for_chunks(static_cast<std::size_t>(jmax_), policy, [&](std::size_t jc) {
      const int j = static_cast<int>(jc) + 1;
      CompensatedSum mass;
      std::vector<double> c2(2 * M + 1);
      for (int m = -M; m <= M; ++m) {
        c2[m + M] = sine_coefficient_sq(j, m);
        mass.add(c2[m + M]);
      }
      const double rest = std::max(0.0, 1.0 - mass.value());
      for (int k = 0; k <= jmax_; ++k) {
        CompensatedSum s;
        for (int m = -M; m <= M; ++m) s.add(c2[m + M] * Pk[k][m + M]);
        // Remaining Parseval mass sits at |m| > M where P lies in [0, P(M+1, k)].
        const double top = cfg.P((M + 1.0) * (M + 1.0) + static_cast<double>(k) * k);
        const double lo = cfg.P.power == 0.0 ? rest * top : 0.0;
        const double hi = rest * top;
        s.add(0.5 * (lo + hi));
        S_[index(j, k)] = s.value();
        S_err_[index(j, k)] = 0.5 * (hi - lo);
      }
    });
  }

  double cutoff() const { return R_; }

  HeatSample operator()(double t) const {
    if (t < t_min_ * (1.0 - 1e-12)) throw std::invalid_argument("cylinder heat: t below t_min");
    CompensatedSum total, err;
    const auto R2 = static_cast<std::int64_t>(std::floor(R_ * R_));
    for (int j = 1; j <= jmax_; ++j) {
      for (int k = -jmax_; k <= jmax_; ++k) {
        const std::int64_t lam = static_cast<std::int64_t>(j) * j + static_cast<std::int64_t>(k) * k;
        if (lam > R2) continue;
        const double e = std::exp(-t * cfg_.A(static_cast<double>(lam)));
        total.add(e * S_[index(j, std::abs(k))]);
        err.add(e * S_err_[index(j, std::abs(k))]);
      }
    }
    const double tail = lattice_tail_bound(Lattice::dirichlet_cylinder(2), R_, t, cfg_.A, std::abs(cfg_.P(0.0)));
    return HeatSample{t, total.value(), tail + err.value()};
  }

  std::vector<HeatSample> sample(const std::vector<double>& grid, const ExecPolicy& policy = {}) const {
    std::vector<HeatSample> out(grid.size());
    parallel_for_chunks(grid.size(), policy, [&](std::size_t i) { out[i] = (*this)(grid[i]); });
    return out;
  }

 private:
  std::size_t index(int j, int k) const { return static_cast<std::size_t>(j * (jmax_ + 1) + k); }

  CylinderHeatConfig cfg_;
  double t_min_;
  double R_ = 0.0;
  int jmax_ = 0;
  std::vector<double> S_, S_err_;
};

struct BoundaryHeatReport {
  AsymptoticFit fit;
  double log_coefficient = 0.0;
  std::vector<HeatSample> samples;
  double cutoff = 0.0;
};

/// Fitted ln t coefficient of trace(P_+ e^{-tA}) on the cylinder.
inline BoundaryHeatReport boundary_heat_test(const CylinderHeatConfig& cfg, const std::vector<double>& grid,
                                             const std::vector<FitTerm>& terms, const ExecPolicy& policy = {}) {
  const double t_min = *std::min_element(grid.begin(), grid.end());
  const CylinderHeat heat(cfg, t_min, 1e-13, policy);
  BoundaryHeatReport rep;
  rep.cutoff = heat.cutoff();
  rep.samples = heat.sample(grid, policy);
  rep.fit = fit_expansion(rep.samples, terms);
  const auto c = rep.fit.coefficient(0.0, true);
  if (!c) throw std::invalid_argument("boundary_heat_test: the fit basis needs a ln t term");
  rep.log_coefficient = *c;
  return rep;
}

}  // namespace ncres
