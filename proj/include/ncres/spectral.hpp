#pragma once

// Explicit spectra of model Laplacians, the partial sums sigma_N, the
// L^(1,inf) norm, logarithmic Cesaro means and Dixmier-trace estimates, and
// the symbol-side Dixmier formula.

#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "ncres/core.hpp"
#include "ncres/residue.hpp"

namespace ncres {

/// Integer lattices whose squared lengths are the eigenvalues of the flat
/// Laplacian: Z^n (torus), Z^{n-1} x {j >= 1} (Dirichlet cylinder, the last
/// coordinate is the sine mode), and `copies` disjoint copies of Z^d.
struct Lattice {
  enum class Kind { torus, dirichlet_cylinder, boundary };
  Kind kind = Kind::torus;
  int dim = 2;
  int copies = 1;

  static Lattice torus(int n) { return Lattice{Kind::torus, n, 1}; }
  static Lattice dirichlet_cylinder(int n) { return Lattice{Kind::dirichlet_cylinder, n, 1}; }
  static Lattice boundary(int d, int copies) { return Lattice{Kind::boundary, d, copies}; }

  std::string name() const {
    switch (kind) {
      case Kind::torus: return "torus" + std::to_string(dim);
      case Kind::dirichlet_cylinder: return "cylinder" + std::to_string(dim);
      case Kind::boundary: return "boundary" + std::to_string(dim) + "x" + std::to_string(copies);
    }
    return {};
  }

  /// Upper bound for the number of modes with |k| <= R.
  double mode_bound(double R) const {
    const double r = R + 0.5 * std::sqrt(static_cast<double>(dim)) + 1.0;
    double v = std::pow(pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0) * std::pow(r, dim);
    if (kind == Kind::dirichlet_cylinder) v *= 0.5;
    return v * copies;
  }
};

/// f(lambda) = scale * (lambda + shift)^power * exp(-rate * lambda).
struct Weight {
  double scale = 1.0;
  double shift = 1.0;
  double power = -1.0;
  double rate = 0.0;

  double operator()(double lambda) const {
    double v = scale * std::exp(-rate * lambda);
    if (power != 0.0) v *= std::pow(lambda + shift, power);
    return v;
  }
  std::string to_string() const {
    std::ostringstream os;
    os << scale << "*(lambda+" << shift << ")^" << power;
    if (rate != 0.0) os << "*exp(-" << rate << "*lambda)";
    return os.str();
  }
};

struct SpectrumModel {
  Lattice lattice;
  Weight weight;
  double cutoff = 10.0;  // R: modes with base eigenvalue <= R^2
  double mode_cap = 5e8;
};

struct Level {
  double eigenvalue;
  std::uint64_t multiplicity;
};

namespace detail {

/// Adds the lattice points with |k|^2 in [m0, m1) to hist[m - m0].
inline void count_shell(const Lattice& L, std::int64_t m0, std::int64_t m1, std::vector<std::uint32_t>& hist) {
  const int n = L.dim;
  const bool positive_last = L.kind == Lattice::Kind::dirichlet_cylinder;
  std::vector<std::int64_t> k(static_cast<std::size_t>(n), 0);
  // Free coordinates 0..n-2 range over Z; the last is solved for.
  auto isqrt = [](std::int64_t v) {
    if (v <= 0) return std::int64_t{0};
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
  };
  std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t s) {
    if (pos == n - 1) {
      // v^2 in [m0 - s, m1 - s)
      const std::int64_t hi = m1 - 1 - s;
      if (hi < 0) return;
      const std::int64_t lo = m0 - s;
      const std::int64_t vmax = isqrt(hi);
      std::int64_t vmin = lo <= 0 ? 0 : isqrt(lo - 1) + 1;
      if (positive_last) vmin = std::max<std::int64_t>(vmin, 1);
      for (std::int64_t v = vmin; v <= vmax; ++v) {
        const std::uint32_t mult = (v == 0 || positive_last) ? 1u : 2u;
        hist[static_cast<std::size_t>(s + v * v - m0)] += mult;
      }
      return;
    }
    const std::int64_t vmax = isqrt(m1 - 1 - s);
    for (std::int64_t v = -vmax; v <= vmax; ++v) rec(pos + 1, s + v * v);
  };
  if (m1 - 1 < 0) return;
  rec(0, 0);
}

}  // namespace detail

/// Every mode with eigenvalue <= R^2 exactly once, as (eigenvalue,
/// multiplicity) levels in increasing eigenvalue order (so in decreasing
/// weight order for non-increasing weights). The lattice is partitioned by
/// eigenvalue range; each chunk fills its own slice of the histogram.
inline std::vector<Level> enumerate_levels(const Lattice& L, double R, double mode_cap = 5e8,
                                           const ExecPolicy& policy = {}) {
  if (R < 1.0) throw std::invalid_argument("enumerate: cutoff must be >= 1");
  if (L.dim < 1 || L.copies < 1) throw std::invalid_argument("enumerate: invalid lattice");
  const double bound = L.mode_bound(R);
  const auto max_m = static_cast<std::int64_t>(std::floor(R * R + 1e-9));
  if (bound > mode_cap || static_cast<double>(max_m) > mode_cap) {
    std::ostringstream os;
    os << "enumerate: " << L.name() << " at cutoff " << R << " needs up to " << bound << " modes and "
       << max_m + 1 << " eigenvalue slots, cap is " << mode_cap;
    throw ResourceCapError(os.str());
  }
  std::vector<std::uint32_t> hist(static_cast<std::size_t>(max_m + 1), 0);
  const ChunkPlan plan{hist.size(), std::size_t{1} << 16};
  parallel_for_chunks(plan.count(), policy, [&](std::size_t c) {
    const auto b = static_cast<std::int64_t>(plan.begin(c));
    const auto e = static_cast<std::int64_t>(plan.end(c));
    std::vector<std::uint32_t> local(static_cast<std::size_t>(e - b), 0);
    detail::count_shell(L, b, e, local);
    std::copy(local.begin(), local.end(), hist.begin() + b);
  });
  std::vector<Level> out;
  for (std::size_t m = 0; m < hist.size(); ++m) {
    if (hist[m]) out.push_back(Level{static_cast<double>(m), static_cast<std::uint64_t>(hist[m]) * L.copies});
  }
  return out;
}

/// A non-increasing sequence of positive weights stored as runs of equal
/// values, with exact prefix counts and compensated prefix sums.
class WeightSequence {
 public:
  struct Run {
    double value;
    std::uint64_t count;
  };

  WeightSequence() = default;
  explicit WeightSequence(std::vector<Run> runs, const ExecPolicy& policy = {}) : runs_(std::move(runs)) {
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      if (!(runs_[i].value >= 0.0) || !std::isfinite(runs_[i].value)) {
        throw std::invalid_argument("WeightSequence: weights must be finite and non-negative");
      }
      if (i > 0 && runs_[i].value > runs_[i - 1].value) monotone_ = false;
    }
    build_prefix(policy);
  }
  static WeightSequence from_values(const std::vector<double>& w) {
    std::vector<Run> runs;
    for (double v : w) runs.push_back(Run{v, 1});
    return WeightSequence(std::move(runs));
  }
  /// Weights f(lambda) on the enumerated levels, sorted by decreasing weight.
  static WeightSequence from_model(const SpectrumModel& model, const ExecPolicy& policy = {}) {
    const auto levels = enumerate_levels(model.lattice, model.cutoff, model.mode_cap, policy);
    std::vector<Run> runs;
    runs.reserve(levels.size());
    for (const auto& l : levels) {
      const double w = model.weight(l.eigenvalue);
      if (!std::isfinite(w)) {
        std::ostringstream os;
        os << "weight " << model.weight.to_string() << " is not finite at eigenvalue " << l.eigenvalue;
        throw std::invalid_argument(os.str());
      }
      runs.push_back(Run{w, l.multiplicity});
    }
    if (!std::is_sorted(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.value > b.value; })) {
      std::stable_sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.value > b.value; });
    }
    return WeightSequence(std::move(runs), policy);
  }

  bool monotone() const { return monotone_; }
  const std::vector<Run>& runs() const { return runs_; }
  std::uint64_t size() const { return prefix_count_.empty() ? 0 : prefix_count_.back(); }

  /// Sum of the N largest weights.
  double sigma(std::uint64_t N) const {
    if (N > size()) throw std::out_of_range("sigma_N: N exceeds the enumerated data");
    if (N == 0) return 0.0;
    // First run whose end count reaches N.
    const auto it = std::lower_bound(prefix_count_.begin() + 1, prefix_count_.end(), N);
    const std::size_t r = static_cast<std::size_t>(it - prefix_count_.begin()) - 1;
    return prefix_sum_[r] + static_cast<double>(N - prefix_count_[r]) * runs_[r].value;
  }

  /// Index of the run holding the N-th weight (1-based N).
  std::size_t run_of(std::uint64_t N) const {
    const auto it = std::lower_bound(prefix_count_.begin() + 1, prefix_count_.end(), N);
    return static_cast<std::size_t>(it - prefix_count_.begin()) - 1;
  }
  std::uint64_t run_start(std::size_t r) const { return prefix_count_[r]; }
  double prefix_sum(std::size_t r) const { return prefix_sum_[r]; }

 private:
  void build_prefix(const ExecPolicy& policy) {
    const std::size_t R = runs_.size();
    prefix_count_.assign(R + 1, 0);
    prefix_sum_.assign(R + 1, 0.0);
    for (std::size_t i = 0; i < R; ++i) prefix_count_[i + 1] = prefix_count_[i] + runs_[i].count;
    const ChunkPlan plan{R, std::size_t{1} << 14};
    std::vector<CompensatedSum> chunk_sum(plan.count());
    parallel_for_chunks(plan.count(), policy, [&](std::size_t c) {
      for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
        chunk_sum[c].add(runs_[i].value * static_cast<double>(runs_[i].count));
      }
    });
    std::vector<CompensatedSum> offset(plan.count());
    for (std::size_t c = 1; c < plan.count(); ++c) {
      offset[c] = offset[c - 1];
      offset[c].add(chunk_sum[c - 1]);
    }
    parallel_for_chunks(plan.count(), policy, [&](std::size_t c) {
      CompensatedSum acc = offset[c];
      for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
        acc.add(runs_[i].value * static_cast<double>(runs_[i].count));
        prefix_sum_[i + 1] = acc.value();
      }
    });
  }

  std::vector<Run> runs_;
  std::vector<std::uint64_t> prefix_count_;
  std::vector<double> prefix_sum_;
  bool monotone_ = true;
};

inline double sigma_N(const WeightSequence& w, std::uint64_t N) { return w.sigma(N); }

struct Norm1Inf {
  double value = 0.0;
  std::uint64_t argsup = 0;
  bool attained_at_end = false;  // sup reached at the last available N: growth warning
};

/// sup_{N >= 2} sigma_N / ln N over the available data. On a run of equal
/// weights sigma_N / ln N is quasi-convex in N, so run endpoints suffice.
inline Norm1Inf norm_1inf(const WeightSequence& w) {
  if (w.size() < 2) throw std::invalid_argument("norm_1inf: need at least two weights");
  Norm1Inf r;
  auto visit = [&](std::uint64_t N) {
    if (N < 2 || N > w.size()) return;
    const double q = w.sigma(N) / std::log(static_cast<double>(N));
    if (q > r.value || r.argsup == 0) {
      r.value = q;
      r.argsup = N;
    }
  };
  for (std::size_t i = 0; i < w.runs().size(); ++i) {
    visit(w.run_start(i) + 1);
    visit(w.run_start(i + 1));
  }
  r.attained_at_end = r.argsup == w.size();
  return r;
}

/// (Mf)(t) = (1/ln t) int_1^t f(s) ds/s for the step function f = a_j on
/// [j, j+1), integrated exactly.
inline double cesaro_mean(const std::function<double(std::uint64_t)>& a, double t) {
  if (t < std::numbers::e) throw std::invalid_argument("cesaro_mean: window must reach t >= e");
  const auto J = static_cast<std::uint64_t>(std::floor(t));
  CompensatedSum acc;
  for (std::uint64_t j = 1; j < J; ++j) acc.add(a(j) * std::log1p(1.0 / static_cast<double>(j)));
  acc.add(a(J) * std::log(t / static_cast<double>(J)));
  return acc.value() / std::log(t);
}

/// The step function a_j = (sigma_j - offset) / ln j (a_1 uses ln 2) with
/// chunked prefix integrals, so M can be read at any t <= size + 1. Since M
/// annihilates c / ln s in the limit, any offset leaves the limit unchanged.
class CesaroIntegrator {
 public:
  CesaroIntegrator(const WeightSequence& w, const ExecPolicy& policy = {}, double offset = 0.0)
      : w_(&w), offset_(offset) {
    const std::uint64_t n = w.size();
    const ChunkPlan plan{static_cast<std::size_t>(n), chunk};
    std::vector<CompensatedSum> sums(plan.count());
    parallel_for_chunks(plan.count(), policy, [&](std::size_t c) {
      sums[c] = integrate(plan.begin(c) + 1, plan.end(c) + 1);
    });
    prefix_.assign(plan.count() + 1, CompensatedSum{});
    for (std::size_t c = 0; c < plan.count(); ++c) {
      prefix_[c + 1] = prefix_[c];
      prefix_[c + 1].add(sums[c]);
    }
  }

  double a(std::uint64_t j) const { return (w_->sigma(j) - offset_) / log_index(j); }

  /// M(t) for e <= t <= size + 1.
  double operator()(double t) const {
    if (t < std::numbers::e) throw std::invalid_argument("cesaro_mean: window must reach t >= e");
    return integral(t) / std::log(t);
  }

  /// int_1^t f(s) ds/s for 1 <= t <= size + 1.
  double integral(double t) const {
    const auto J = static_cast<std::uint64_t>(std::floor(t));
    if (J < 1 || J > w_->size()) throw std::out_of_range("cesaro_mean: t outside the enumerated data");
    const std::size_t c = static_cast<std::size_t>((J - 1) / chunk);
    CompensatedSum acc = prefix_[c];
    acc.add(integrate(c * chunk + 1, J));
    acc.add(a(J) * std::log(t / static_cast<double>(J)));
    return acc.value();
  }

 private:
  static constexpr std::size_t chunk = std::size_t{1} << 16;

  static double log_index(std::uint64_t j) { return j == 1 ? std::log(2.0) : std::log(static_cast<double>(j)); }

  /// sum_{j in [j0, j1)} a_j log(1 + 1/j), walking the runs.
  CompensatedSum integrate(std::uint64_t j0, std::uint64_t j1) const {
    CompensatedSum acc;
    if (j0 >= j1) return acc;
    std::size_t r = w_->run_of(j0);
    double sigma = w_->sigma(j0 - 1);
    for (std::uint64_t j = j0; j < j1; ++j) {
      while (w_->run_start(r + 1) < j) ++r;
      sigma += w_->runs()[r].value;
      // Re-anchor at run boundaries to keep the running sum exact to the prefix table.
      if (w_->run_start(r) + 1 == j) sigma = w_->prefix_sum(r) + w_->runs()[r].value;
      acc.add((sigma - offset_) / log_index(j) * std::log1p(1.0 / static_cast<double>(j)));
    }
    return acc;
  }

  const WeightSequence* w_;
  double offset_ = 0.0;
  std::vector<CompensatedSum> prefix_;
};

struct DixmierEstimate {
  double slope = 0.0;  // least-squares d sigma_N / d ln N over the window
  double intercept = 0.0;
  std::uint64_t n_min = 0, n_max = 0;
  double fit_residual = 0.0;  // RMS residual of the linear fit, relative to sigma_{N_max}
  std::vector<std::pair<double, double>> cesaro_curve;  // (t, M(t)) over the top decade
  double cesaro_tail = 0.0;       // M(N_max) of sigma_N / ln N
  double cesaro_drift = 0.0;      // max - min of M over the top decade
  double cesaro_corrected = 0.0;  // log-mean of (sigma_N - intercept) / ln N over the window
  double disagreement = 0.0;      // |slope - cesaro_corrected| / |slope|
  double growth_exponent = 0.0;  // d ln sigma / d ln N - 1/ln N at the top
  bool growth_flag = false;      // sigma_N grows faster than ln N
  Norm1Inf norm;

  struct Row {
    std::uint64_t N;
    double sigma;
    double ratio;
    double cesaro;
  };
  std::vector<Row> table;
};

namespace detail {

inline std::vector<std::uint64_t> log_grid(std::uint64_t lo, std::uint64_t hi, int points) {
  std::vector<std::uint64_t> g;
  const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
  for (int i = 0; i < points; ++i) {
    const double v = std::exp(a + (b - a) * i / std::max(points - 1, 1));
    auto N = static_cast<std::uint64_t>(std::llround(v));
    N = std::clamp(N, lo, hi);
    if (g.empty() || g.back() != N) g.push_back(N);
  }
  return g;
}

}  // namespace detail

inline constexpr double growth_flag_threshold = 0.1;

/// Slope of sigma_N against ln N over [N_max/100, N_max], with the Cesaro
/// mean of sigma_N / ln N as corroboration.
inline DixmierEstimate dixmier_estimate(const WeightSequence& w, const ExecPolicy& policy = {}) {
  if (!w.monotone()) throw std::invalid_argument("dixmier_estimate: weights are not non-increasing");
  const std::uint64_t n_max = w.size();
  if (n_max < 200) throw std::invalid_argument("dixmier_estimate: need at least 200 weights");
  DixmierEstimate est;
  est.n_max = n_max;
  est.n_min = std::max<std::uint64_t>(2, n_max / 100);

  const auto grid = detail::log_grid(est.n_min, n_max, 201);
  CompensatedSum sx, sy, sxx, sxy;
  for (auto N : grid) {
    const double x = std::log(static_cast<double>(N)), y = w.sigma(N);
    sx.add(x);
    sy.add(y);
    sxx.add(x * x);
    sxy.add(x * y);
  }
  const double m = static_cast<double>(grid.size());
  const double mx = sx.value() / m, my = sy.value() / m;
  const double varx = sxx.value() / m - mx * mx;
  est.slope = (sxy.value() / m - mx * my) / varx;
  est.intercept = my - est.slope * mx;
  CompensatedSum res;
  for (auto N : grid) {
    const double e = w.sigma(N) - (est.intercept + est.slope * std::log(static_cast<double>(N)));
    res.add(e * e);
  }
  est.fit_residual = std::sqrt(res.value() / m) / std::max(std::abs(w.sigma(n_max)), 1e-300);

  const CesaroIntegrator M(w, policy);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto N : detail::log_grid(std::max<std::uint64_t>(3, n_max / 10), n_max, 21)) {
    const double v = M(static_cast<double>(N));
    est.cesaro_curve.emplace_back(static_cast<double>(N), v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  est.cesaro_tail = est.cesaro_curve.back().second;
  est.cesaro_drift = hi - lo;
  const CesaroIntegrator Mc(w, policy, est.intercept);
  est.cesaro_corrected = (Mc.integral(static_cast<double>(n_max)) - Mc.integral(static_cast<double>(est.n_min))) /
                         std::log(static_cast<double>(n_max) / static_cast<double>(est.n_min));
  est.disagreement = std::abs(est.slope - est.cesaro_corrected) / std::max(std::abs(est.slope), 1e-300);

  const std::uint64_t n_dec = std::max<std::uint64_t>(2, n_max / 10);
  const double s_top = w.sigma(n_max), s_dec = w.sigma(n_dec);
  if (s_top > 0 && s_dec > 0) {
    est.growth_exponent = std::log(s_top / s_dec) / std::log(static_cast<double>(n_max) / n_dec) -
                          1.0 / std::log(static_cast<double>(n_max));
  }
  est.growth_flag = est.growth_exponent > growth_flag_threshold;
  est.norm = norm_1inf(w);

  for (auto N : detail::log_grid(3, n_max, 60)) {
    const double s = w.sigma(N);
    est.table.push_back({N, s, s / std::log(static_cast<double>(N)), M(static_cast<double>(N))});
  }
  return est;
}

inline DixmierEstimate dixmier_estimate(const SpectrumModel& model, const ExecPolicy& policy = {}) {
  return dixmier_estimate(WeightSequence::from_model(model, policy), policy);
}

/// Symbol-side Dixmier trace of an operator of order -n:
/// res_X p / ((2pi)^n n) + int_{dX} int_{S'} s_{1-n} / ((2pi)^{n-1} (n-1)).
/// The g, k and t blocks are graded but do not contribute.
inline cplx dixmier_formula(const BdMSymbol& A) {
  detail::check_blocks(A, "dixmier_formula");
  const int n = A.geometry.n;
  auto fail = [](const std::string& m) { throw std::invalid_argument("dixmier_formula: " + m); };
  if (A.p && A.p->order() > -n) fail("interior symbol must have order <= -n");
  if (A.s && A.s->order() > 1 - n) fail("boundary symbol must have order <= 1-n");
  for (const auto& g : A.g) {
    if (g.degree() > -n) fail("singular Green terms must have order <= -n");
    if (g.fiber.type() != 0) fail("singular Green terms must have type 0");
  }
  for (const auto& k : A.k) {
    if (k.b.degree() > -n) fail("potential terms must have order <= -n");
  }
  for (const auto& t : A.t) {
    if (t.b.degree() > 1 - n) fail("trace terms must have order <= 1-n");
    if (t.type != 0) fail("trace terms must have type 0");
  }
  cplx v{};
  if (A.p) v += wodzicki_residue(*A.p, A.geometry) / (std::pow(2.0 * pi, n) * n);
  if (A.s && A.geometry.has_boundary()) {
    v += A.geometry.integrate_boundary(cosphere_integral(A.s->component(1 - n))) /
         (std::pow(2.0 * pi, n - 1) * (n - 1));
  }
  return v;
}

}  // namespace ncres
