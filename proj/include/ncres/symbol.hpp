#pragma once

// Classical pseudodifferential symbols on the flat torus T^n.
//
// A homogeneous term is a finite sum of atoms
//
//     coeff * exp(i <k, x>) * xi^alpha * |xi|^w,      |alpha| + w = degree,
//
// so x-dependence is a trigonometric polynomial and xi-dependence lives in
// span{xi^alpha |xi|^w}. That span is closed under products, d/dx and d/dxi,
// and integrates over the unit sphere in closed form, which keeps every
// residue computation free of quadrature error.
//
// Coefficients are either scalars (cplx) or square matrices (Eigen::MatrixXcd).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ncres/core.hpp"

namespace ncres {

using CMatrix = Eigen::MatrixXcd;

template <class C>
struct CoeffOps;

template <>
struct CoeffOps<cplx> {
  static cplx zero(int) { return cplx{}; }
  static cplx identity(int) { return cplx{1.0, 0.0}; }
  static cplx trace(const cplx& c) { return c; }
  static int dim(const cplx&) { return 1; }
  static double norm(const cplx& c) { return std::abs(c); }
  static bool is_zero(const cplx& c) { return c == cplx{}; }
};

template <>
struct CoeffOps<CMatrix> {
  static CMatrix zero(int d) { return CMatrix::Zero(d, d); }
  static CMatrix identity(int d) { return CMatrix::Identity(d, d); }
  static cplx trace(const CMatrix& c) { return c.trace(); }
  static int dim(const CMatrix& c) { return static_cast<int>(c.rows()); }
  static double norm(const CMatrix& c) { return c.norm(); }
  static bool is_zero(const CMatrix& c) { return (c.array() == cplx{}).all(); }
};

using IntVec = std::vector<int>;

inline int abs_order(const IntVec& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

/// One atom coeff * e^{i<freq,x>} * xi^alpha * |xi|^w.
template <class C>
struct Atom {
  C coeff;
  IntVec freq;
  IntVec alpha;
  double w = 0.0;

  double degree() const { return abs_order(alpha) + w; }
};

/// Trigonometric polynomial sum_k c_k e^{i<k,x>} on T^n.
template <class C>
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(int dim, int matrix_dim) : dim_(dim), matrix_dim_(matrix_dim) {}

  int dim() const { return dim_; }
  int matrix_dim() const { return matrix_dim_; }
  const std::map<IntVec, C>& coefficients() const { return coeffs_; }

  void add(const IntVec& freq, const C& c) {
    auto it = coeffs_.find(freq);
    if (it == coeffs_.end()) {
      coeffs_.emplace(freq, c);
    } else {
      it->second = it->second + c;
    }
  }

  TrigPoly& operator+=(const TrigPoly& other) {
    for (const auto& [k, c] : other.coeffs_) add(k, c);
    return *this;
  }

  C coefficient(const IntVec& freq) const {
    auto it = coeffs_.find(freq);
    return it == coeffs_.end() ? CoeffOps<C>::zero(matrix_dim_) : it->second;
  }

  C operator()(std::span<const double> x) const {
    C acc = CoeffOps<C>::zero(matrix_dim_);
    for (const auto& [k, c] : coeffs_) {
      double phase = 0.0;
      for (int i = 0; i < dim_; ++i) phase += k[i] * x[i];
      acc = acc + std::polar(1.0, phase) * c;
    }
    return acc;
  }

  /// Mean value over T^n, i.e. the zero-frequency coefficient.
  C mean() const { return coefficient(IntVec(dim_, 0)); }

  /// Integral over T^n = [0, 2pi)^n.
  C integrate_torus() const { return std::pow(2.0 * pi, dim_) * mean(); }

  /// Integral over T^{n-1} x [0, pi] (the last coordinate is the normal one).
  C integrate_half_cylinder() const {
    C acc = CoeffOps<C>::zero(matrix_dim_);
    const double tangential = std::pow(2.0 * pi, dim_ - 1);
    for (const auto& [k, c] : coeffs_) {
      bool tangential_zero = true;
      for (int i = 0; i + 1 < dim_; ++i) tangential_zero &= (k[i] == 0);
      if (!tangential_zero) continue;
      const int kn = k[dim_ - 1];
      cplx normal;
      if (kn == 0) {
        normal = pi;
      } else {
        const double sign = (kn % 2 == 0) ? 1.0 : -1.0;
        normal = (sign - 1.0) / (cplx{0.0, 1.0} * static_cast<double>(kn));
      }
      acc = acc + (tangential * normal) * c;
    }
    return acc;
  }

 private:
  int dim_ = 0;
  int matrix_dim_ = 1;
  std::map<IntVec, C> coeffs_;
};

namespace detail {

inline double monomial(std::span<const double> xi, const IntVec& alpha) {
  double r = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (int p = 0; p < alpha[i]; ++p) r *= xi[i];
  }
  return r;
}

inline double euclidean_norm(std::span<const double> xi) {
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

using AtomKey = std::tuple<IntVec, IntVec, double>;

}  // namespace detail

/// Integral of xi^alpha over S^{n-1}: 2 prod Gamma(b_i + 1/2) / Gamma(|b| + n/2)
/// for alpha = 2b, zero when any index is odd.
inline double sphere_moment(const IntVec& alpha) {
  const int n = static_cast<int>(alpha.size());
  double log_num = 0.0;
  int half_total = 0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    log_num += std::lgamma(a / 2 + 0.5);
    half_total += a / 2;
  }
  return 2.0 * std::exp(log_num - std::lgamma(half_total + 0.5 * n));
}

/// A function homogeneous of a fixed degree in xi, stored as atoms.
template <class C>
class BasicHomTerm {
 public:
  using Ops = CoeffOps<C>;

  BasicHomTerm() = default;
  BasicHomTerm(int dim, double degree, int matrix_dim = 1)
      : dim_(dim), matrix_dim_(matrix_dim), degree_(degree) {
    if (dim < 1) throw std::invalid_argument("HomTerm: dimension must be >= 1");
    if (matrix_dim < 1) throw std::invalid_argument("HomTerm: matrix dimension must be >= 1");
  }
  BasicHomTerm(int dim, double degree, std::vector<Atom<C>> atoms, int matrix_dim = 1)
      : BasicHomTerm(dim, degree, matrix_dim) {
    for (auto& a : atoms) add_atom(std::move(a));
  }

  int dim() const { return dim_; }
  int matrix_dim() const { return matrix_dim_; }
  double degree() const { return degree_; }
  const std::vector<Atom<C>>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

  void add_atom(Atom<C> atom) {
    if (static_cast<int>(atom.freq.size()) != dim_ || static_cast<int>(atom.alpha.size()) != dim_) {
      throw std::invalid_argument("HomTerm: atom index length does not match dimension");
    }
    for (int a : atom.alpha) {
      if (a < 0) throw std::invalid_argument("HomTerm: negative xi exponent");
    }
    if (std::abs(atom.degree() - degree_) > 1e-9) {
      std::ostringstream os;
      os << "HomTerm: atom degree " << atom.degree() << " != term degree " << degree_;
      throw std::invalid_argument(os.str());
    }
    if (Ops::dim(atom.coeff) != matrix_dim_) {
      throw std::invalid_argument("HomTerm: coefficient matrix dimension mismatch");
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      auto& existing = atoms_[i];
      if (existing.freq == atom.freq && existing.alpha == atom.alpha && existing.w == atom.w) {
        existing.coeff = existing.coeff + atom.coeff;
        if (Ops::is_zero(existing.coeff)) atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(i));
        return;
      }
    }
    if (!Ops::is_zero(atom.coeff)) atoms_.push_back(std::move(atom));
  }

  /// Value at (x, xi); for |xi| < 1 this is the homogeneous extension.
  C operator()(std::span<const double> x, std::span<const double> xi) const {
    const double r = detail::euclidean_norm(xi);
    if (r == 0.0) throw std::invalid_argument("HomTerm: evaluation at xi = 0");
    C acc = Ops::zero(matrix_dim_);
    for (const auto& a : atoms_) {
      double phase = 0.0;
      for (int i = 0; i < dim_; ++i) phase += a.freq[i] * x[i];
      const double radial = detail::monomial(xi, a.alpha) * std::pow(r, a.w);
      acc = acc + (std::polar(1.0, phase) * radial) * a.coeff;
    }
    return acc;
  }

  BasicHomTerm& operator+=(const BasicHomTerm& other) {
    check_compatible(other);
    for (const auto& a : other.atoms_) add_atom(a);
    return *this;
  }
  friend BasicHomTerm operator+(BasicHomTerm a, const BasicHomTerm& b) { return a += b; }
  friend BasicHomTerm operator-(BasicHomTerm a, const BasicHomTerm& b) { return a += b.scaled(-1.0); }

  BasicHomTerm scaled(cplx s) const {
    BasicHomTerm out(dim_, degree_, matrix_dim_);
    if (s == cplx{}) return out;
    for (const auto& a : atoms_) out.add_atom(Atom<C>{s * a.coeff, a.freq, a.alpha, a.w});
    return out;
  }

  /// Pointwise product (coefficients multiply in order this * other).
  BasicHomTerm product(const BasicHomTerm& other) const {
    check_compatible(other);
    BasicHomTerm out(dim_, degree_ + other.degree_, matrix_dim_);
    for (const auto& a : atoms_) {
      for (const auto& b : other.atoms_) {
        Atom<C> c{a.coeff * b.coeff, a.freq, a.alpha, a.w + b.w};
        for (int i = 0; i < dim_; ++i) {
          c.freq[i] += b.freq[i];
          c.alpha[i] += b.alpha[i];
        }
        out.add_atom(std::move(c));
      }
    }
    return out;
  }

  /// d/dx_j; degree is preserved.
  BasicHomTerm d_x(int j) const {
    BasicHomTerm out(dim_, degree_, matrix_dim_);
    for (const auto& a : atoms_) {
      if (a.freq[j] == 0) continue;
      out.add_atom(Atom<C>{cplx{0.0, static_cast<double>(a.freq[j])} * a.coeff, a.freq, a.alpha, a.w});
    }
    return out;
  }

  /// d/dxi_j; degree drops by exactly one.
  BasicHomTerm d_xi(int j) const {
    BasicHomTerm out(dim_, degree_ - 1.0, matrix_dim_);
    for (const auto& a : atoms_) {
      if (a.alpha[j] > 0) {
        Atom<C> lowered{static_cast<double>(a.alpha[j]) * a.coeff, a.freq, a.alpha, a.w};
        lowered.alpha[j] -= 1;
        out.add_atom(std::move(lowered));
      }
      if (a.w != 0.0) {
        Atom<C> radial{cplx{a.w, 0.0} * a.coeff, a.freq, a.alpha, a.w - 2.0};
        radial.alpha[j] += 1;
        out.add_atom(std::move(radial));
      }
    }
    return out;
  }

  /// Pointwise tr_E.
  BasicHomTerm<cplx> trace() const {
    BasicHomTerm<cplx> out(dim_, degree_, 1);
    for (const auto& a : atoms_) out.add_atom(Atom<cplx>{Ops::trace(a.coeff), a.freq, a.alpha, a.w});
    return out;
  }

  /// Exact integral over S^{n-1} as a trigonometric polynomial in x.
  TrigPoly<C> sphere_integral() const {
    if (dim_ < 2) throw std::invalid_argument("sphere_integral: requires n >= 2");
    TrigPoly<C> out(dim_, matrix_dim_);
    for (const auto& a : atoms_) {
      const double m = sphere_moment(a.alpha);
      if (m != 0.0) out.add(a.freq, m * a.coeff);
    }
    return out;
  }

  /// Value at the two points xi = -1, +1 summed (the n = 1 "sphere").
  TrigPoly<C> two_point_sum() const {
    if (dim_ != 1) throw std::invalid_argument("two_point_sum: requires n == 1");
    TrigPoly<C> out(1, matrix_dim_);
    for (const auto& a : atoms_) {
      const double plus = 1.0;
      const double minus = (a.alpha[0] % 2 == 0) ? 1.0 : -1.0;
      if (plus + minus != 0.0) out.add(a.freq, (plus + minus) * a.coeff);
    }
    return out;
  }

  double coefficient_norm() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += Ops::norm(a.coeff);
    return s;
  }

 private:
  void check_compatible(const BasicHomTerm& other) const {
    if (other.dim_ != dim_) throw std::invalid_argument("HomTerm: dimension mismatch");
    if (other.matrix_dim_ != matrix_dim_) throw std::invalid_argument("HomTerm: matrix dimension mismatch");
  }

  int dim_ = 1;
  int matrix_dim_ = 1;
  double degree_ = 0.0;
  std::vector<Atom<C>> atoms_;
};

using HomTerm = BasicHomTerm<cplx>;
using MatrixHomTerm = BasicHomTerm<CMatrix>;

/// Numerical cross-check of BasicHomTerm::sphere_integral at a fixed x, by
/// nested Gauss-Legendre quadrature in hyperspherical angles.
template <class C>
C sphere_integrate_numeric(const BasicHomTerm<C>& t, std::span<const double> x, int nodes = 48) {
  const int n = t.dim();
  if (n < 2) throw std::invalid_argument("sphere_integrate_numeric: requires n >= 2");
  // Gauss-Legendre nodes on [-1, 1] via Newton iteration on P_nodes.
  std::vector<double> gx(nodes), gw(nodes);
  for (int i = 0; i < nodes; ++i) {
    double z = std::cos(pi * (i + 0.75) / (nodes + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= nodes; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = nodes * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= nodes; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = nodes * (z * p1 - p0) / (z * z - 1.0);
    gx[i] = z;
    gw[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  const int ring = 2 * nodes;
  std::vector<double> xi(n);
  // Recursively parametrize xi = (cos th_1, sin th_1 cos th_2, ...), the last
  // pair by a full circle angle.
  std::function<C(int, double)> rec = [&](int level, double scale) -> C {
    C acc = CoeffOps<C>::zero(t.matrix_dim());
    if (level == n - 2) {
      for (int q = 0; q < ring; ++q) {
        const double phi = 2.0 * pi * q / ring;
        xi[n - 2] = scale * std::cos(phi);
        xi[n - 1] = scale * std::sin(phi);
        acc = acc + (2.0 * pi / ring) * t(x, xi);
      }
      return acc;
    }
    const int remaining = n - level - 2;  // power of sin theta in the measure
    for (int q = 0; q < nodes; ++q) {
      const double theta = 0.5 * pi * (gx[q] + 1.0);
      const double s = std::sin(theta);
      xi[level] = scale * std::cos(theta);
      const double weight = 0.5 * pi * gw[q] * std::pow(s, remaining);
      acc = acc + weight * rec(level + 1, scale * s);
    }
    return acc;
  };
  return rec(0, 1.0);
}

/// A classical symbol sum_j a_{m-j}: components of integer degree
/// m, m-1, ..., down to an exactness floor. A symbol without a floor is a
/// finite expansion, exact at every degree.
template <class C>
class BasicSymbol {
 public:
  using Term = BasicHomTerm<C>;

  BasicSymbol() = default;
  BasicSymbol(int dim, int order, std::optional<int> exact_to, int matrix_dim = 1)
      : dim_(dim), matrix_dim_(matrix_dim), order_(order), exact_to_(exact_to) {
    if (dim < 1) throw std::invalid_argument("Symbol: dimension must be >= 1");
    if (exact_to && *exact_to > order) throw std::invalid_argument("Symbol: exactness floor above order");
    if (exact_to) terms_.reserve(static_cast<std::size_t>(order - *exact_to + 1));
  }

  int dim() const { return dim_; }
  int matrix_dim() const { return matrix_dim_; }
  int order() const { return order_; }
  std::optional<int> exact_to() const { return exact_to_; }
  bool exact_at(int degree) const { return !exact_to_ || degree >= *exact_to_; }

  /// Lowest degree with an explicitly stored (possibly empty) component.
  int lowest_stored() const { return order_ - static_cast<int>(terms_.size()) + 1; }

  void set_component(const Term& t) {
    const double dd = t.degree();
    const int d = static_cast<int>(std::lround(dd));
    if (std::abs(dd - d) > 1e-9) throw std::invalid_argument("Symbol: component degree must be an integer");
    if (t.dim() != dim_ || t.matrix_dim() != matrix_dim_) throw std::invalid_argument("Symbol: component shape mismatch");
    if (d > order_) throw std::invalid_argument("Symbol: component degree exceeds order");
    if (!exact_at(d)) throw TruncationError("Symbol: component below exactness floor");
    const std::size_t idx = static_cast<std::size_t>(order_ - d);
    while (terms_.size() <= idx) terms_.emplace_back(dim_, order_ - static_cast<int>(terms_.size()), matrix_dim_);
    terms_[idx] = t;
  }
  void add_to_component(const Term& t) {
    const int d = static_cast<int>(std::lround(t.degree()));
    Term current = component(d);
    current += t;
    set_component(current);
  }

  /// The degree-d component; throws TruncationError below the floor.
  Term component(int degree) const {
    if (!exact_at(degree)) {
      std::ostringstream os;
      os << "Symbol: component of degree " << degree << " requested below exactness floor " << *exact_to_;
      throw TruncationError(os.str());
    }
    if (degree > order_ || degree < lowest_stored()) return Term(dim_, degree, matrix_dim_);
    return terms_[static_cast<std::size_t>(order_ - degree)];
  }

  /// Sum of the stored components at (x, xi).
  C operator()(std::span<const double> x, std::span<const double> xi) const {
    C acc = CoeffOps<C>::zero(matrix_dim_);
    for (const auto& t : terms_) acc = acc + t(x, xi);
    return acc;
  }

  /// Degrees at which this symbol has data: order down to the floor (or to the
  /// lowest stored term for finite expansions).
  int bottom() const { return exact_to_ ? *exact_to_ : std::min(order_, lowest_stored()); }

  BasicSymbol scaled(cplx s) const {
    BasicSymbol out(dim_, order_, exact_to_, matrix_dim_);
    for (const auto& t : terms_) out.set_component(t.scaled(s));
    return out;
  }

  friend BasicSymbol operator+(const BasicSymbol& a, const BasicSymbol& b) {
    a.check_compatible(b);
    const int order = std::max(a.order_, b.order_);
    std::optional<int> floor;
    if (a.exact_to_ || b.exact_to_) {
      floor = std::max(a.exact_to_.value_or(std::numeric_limits<int>::min()),
                       b.exact_to_.value_or(std::numeric_limits<int>::min()));
      floor = std::min(*floor, order);
    }
    BasicSymbol out(a.dim_, order, floor, a.matrix_dim_);
    const int low = floor ? *floor : std::min(a.bottom(), b.bottom());
    for (int d = order; d >= low; --d) out.set_component(a.component(d) + b.component(d));
    return out;
  }
  friend BasicSymbol operator-(const BasicSymbol& a, const BasicSymbol& b) { return a + b.scaled(-1.0); }

  /// Pointwise product a(x,xi) b(x,xi).
  BasicSymbol product(const BasicSymbol& b) const {
    check_compatible(b);
    const int order = order_ + b.order_;
    std::optional<int> floor = combined_floor(b, std::nullopt);
    BasicSymbol out(dim_, order, floor, matrix_dim_);
    const int low = floor ? *floor : bottom() + b.bottom();
    for (int d = order; d >= low; --d) {
      Term acc(dim_, d, matrix_dim_);
      for (int da = order_; da >= bottom(); --da) {
        const int db = d - da;
        if (db > b.order_ || db < b.bottom()) continue;
        acc += component(da).product(b.component(db));
      }
      out.set_component(acc);
    }
    return out;
  }

  BasicSymbol d_x(int j) const {
    BasicSymbol out(dim_, order_, exact_to_, matrix_dim_);
    for (const auto& t : terms_) out.set_component(t.d_x(j));
    return out;
  }

  BasicSymbol d_xi(int j) const {
    std::optional<int> floor;
    if (exact_to_) floor = *exact_to_ - 1;
    BasicSymbol out(dim_, order_ - 1, floor, matrix_dim_);
    for (const auto& t : terms_) out.set_component(t.d_xi(j));
    return out;
  }

  /// Largest coefficient mass over components (a scale for tolerances).
  double coefficient_norm() const {
    double s = 0.0;
    for (const auto& t : terms_) s = std::max(s, t.coefficient_norm());
    return s;
  }

  const std::vector<Term>& stored_terms() const { return terms_; }

  /// Floor of a composite whose degree-d component pairs a_{da} with b_{d-da}.
  std::optional<int> combined_floor(const BasicSymbol& b, std::optional<int> truncation) const {
    constexpr int lowest = std::numeric_limits<int>::min() / 4;
    const int fa = exact_to_ ? *exact_to_ + b.order_ : lowest;
    const int fb = b.exact_to_ ? *b.exact_to_ + order_ : lowest;
    const int ft = truncation ? *truncation : lowest;
    const int f = std::max({fa, fb, ft});
    if (f == lowest) return std::nullopt;
    return f;
  }

 private:
  void check_compatible(const BasicSymbol& b) const {
    if (b.dim_ != dim_) throw std::invalid_argument("Symbol: dimension mismatch");
    if (b.matrix_dim_ != matrix_dim_) throw std::invalid_argument("Symbol: matrix dimension mismatch");
  }

  int dim_ = 1;
  int matrix_dim_ = 1;
  int order_ = 0;
  std::vector<Term> terms_;
  std::optional<int> exact_to_;
};

using ClassicalSymbol = BasicSymbol<cplx>;
using MatrixSymbol = BasicSymbol<CMatrix>;

/// All multi-indices of length n with |alpha| = order.
inline std::vector<IntVec> multi_indices(int n, int order) {
  std::vector<IntVec> out;
  IntVec cur(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  if (n > 0) rec(0, order);
  return out;
}

inline double multi_factorial(const IntVec& alpha) {
  double f = 1.0;
  for (int a : alpha) f *= std::tgamma(a + 1.0);
  return f;
}

/// Truncated Leibniz product a # b ~ sum_alpha (-i)^|alpha| / alpha!
/// d_xi^alpha a * d_x^alpha b. Components of degree >= m_a + m_b - N are
/// computed exactly (subject to the inputs' own floors).
template <class C>
BasicSymbol<C> leibniz_compose(const BasicSymbol<C>& a, const BasicSymbol<C>& b, int truncation) {
  if (truncation < 0) throw std::invalid_argument("leibniz_compose: truncation must be >= 0");
  if (a.dim() != b.dim()) throw std::invalid_argument("leibniz_compose: dimension mismatch");
  if (a.matrix_dim() != b.matrix_dim()) throw std::invalid_argument("leibniz_compose: matrix dimension mismatch");
  const int n = a.dim();
  const int order = a.order() + b.order();
  const std::optional<int> floor = a.combined_floor(b, order - truncation);
  BasicSymbol<C> out(n, order, floor, a.matrix_dim());
  const int low = *floor;

  // Cache derivatives of each component keyed by (degree, alpha).
  std::map<std::pair<int, IntVec>, BasicHomTerm<C>> dxi_a, dx_b;
  auto xi_derivative = [&](int da, const IntVec& alpha) -> const BasicHomTerm<C>& {
    auto key = std::make_pair(da, alpha);
    auto it = dxi_a.find(key);
    if (it != dxi_a.end()) return it->second;
    BasicHomTerm<C> t = a.component(da);
    for (int j = 0; j < n; ++j) {
      for (int p = 0; p < alpha[j]; ++p) t = t.d_xi(j);
    }
    return dxi_a.emplace(key, std::move(t)).first->second;
  };
  auto x_derivative = [&](int db, const IntVec& alpha) -> const BasicHomTerm<C>& {
    auto key = std::make_pair(db, alpha);
    auto it = dx_b.find(key);
    if (it != dx_b.end()) return it->second;
    BasicHomTerm<C> t = b.component(db);
    for (int j = 0; j < n; ++j) {
      for (int p = 0; p < alpha[j]; ++p) t = t.d_x(j);
    }
    return dx_b.emplace(key, std::move(t)).first->second;
  };

  for (int d = order; d >= low; --d) {
    BasicHomTerm<C> acc(n, d, a.matrix_dim());
    for (int k = 0; k <= order - d; ++k) {
      cplx factor = std::pow(cplx{0.0, -1.0}, k);
      for (const auto& alpha : multi_indices(n, k)) {
        const cplx f = factor / multi_factorial(alpha);
        for (int da = a.order(); da >= a.bottom(); --da) {
          const int db = d + k - da;
          if (db > b.order() || db < b.bottom()) continue;
          const auto& left = xi_derivative(da, alpha);
          if (left.empty()) continue;
          const auto& right = x_derivative(db, alpha);
          if (right.empty()) continue;
          acc += left.product(right).scaled(f);
        }
      }
    }
    out.set_component(acc);
  }
  return out;
}

/// Report of transmission_check.
struct TransmissionReport {
  bool ok = true;
  int degree = 0;
  IntVec alpha;
  int normal_derivatives = 0;
  double boundary_xn = 0.0;
  double defect = 0.0;
};

/// Parity test d^k_{x_n} d^alpha_{xi'} p_j(x',x_n,0,+1) =
/// (-1)^{j-|alpha|} (same at 0,-1) for all stored j and k + |alpha| <= depth,
/// at both boundary components x_n = 0 and x_n = pi. A trigonometric
/// polynomial in x' vanishes iff every frequency coefficient vanishes, so the
/// comparison is frequency-wise and exact.
template <class C>
TransmissionReport transmission_check(const BasicSymbol<C>& p, int depth = 4, double tol = 1e-10) {
  const int n = p.dim();
  if (n < 2) throw std::invalid_argument("transmission_check: requires n >= 2");
  TransmissionReport report;
  std::vector<double> plus(n, 0.0), minus(n, 0.0);
  plus[n - 1] = 1.0;
  minus[n - 1] = -1.0;
  for (int j = p.order(); j >= p.bottom(); --j) {
    const BasicHomTerm<C> pj = p.component(j);
    if (pj.empty()) continue;
    for (int total = 0; total <= depth; ++total) {
      for (int k = 0; k <= total; ++k) {
        for (const auto& alpha_t : multi_indices(n - 1, total - k)) {
          BasicHomTerm<C> t = pj;
          for (int q = 0; q < k; ++q) t = t.d_x(n - 1);
          for (int i = 0; i < n - 1; ++i) {
            for (int q = 0; q < alpha_t[i]; ++q) t = t.d_xi(i);
          }
          const int abs_alpha = total - k;
          const double parity = ((j - abs_alpha) % 2 == 0) ? 1.0 : -1.0;
          for (double xn : {0.0, pi}) {
            std::map<IntVec, C> defect;
            for (const auto& a : t.atoms()) {
              IntVec tangential(a.freq.begin(), a.freq.end() - 1);
              const cplx phase = std::polar(1.0, a.freq[n - 1] * xn);
              const double vp = detail::monomial(plus, a.alpha);
              const double vm = detail::monomial(minus, a.alpha);
              const C contrib = (phase * (vp - parity * vm)) * a.coeff;
              auto it = defect.find(tangential);
              if (it == defect.end()) {
                defect.emplace(tangential, contrib);
              } else {
                it->second = it->second + contrib;
              }
            }
            const double scale = std::max(1.0, t.coefficient_norm());
            for (const auto& [freq, value] : defect) {
              const double mag = CoeffOps<C>::norm(value);
              if (mag > tol * scale) {
                report.ok = false;
                report.degree = j;
                report.alpha = alpha_t;
                report.normal_derivatives = k;
                report.boundary_xn = xn;
                report.defect = mag;
                return report;
              }
            }
          }
        }
      }
    }
  }
  return report;
}

namespace symbols {

/// The constant symbol c (order 0, exact).
template <class C = cplx>
BasicSymbol<C> constant(int n, const C& c, int matrix_dim = 1) {
  BasicSymbol<C> s(n, 0, std::nullopt, matrix_dim);
  BasicHomTerm<C> t(n, 0.0, matrix_dim);
  t.add_atom(Atom<C>{c, IntVec(n, 0), IntVec(n, 0), 0.0});
  s.set_component(t);
  return s;
}

inline ClassicalSymbol identity(int n) { return constant<cplx>(n, cplx{1.0, 0.0}); }

/// c * e^{i<k,x>} * xi^alpha * |xi|^w as a one-atom term.
inline HomTerm atom_term(int n, cplx c, IntVec freq, IntVec alpha, double w) {
  const double deg = abs_order(alpha) + w;
  HomTerm t(n, deg);
  t.add_atom(Atom<cplx>{c, std::move(freq), std::move(alpha), w});
  return t;
}

/// Symbol of (1 - Delta)^s = (1 + |xi|^2)^s, expanded as
/// sum_i C(s,i) |xi|^{2s-2i}. Requires 2s integral. For s a non-negative
/// integer the expansion is finite and exact; otherwise components are kept
/// down to `floor`.
inline ClassicalSymbol bessel_power(int n, double s, int floor) {
  const double two_s = 2.0 * s;
  const int order = static_cast<int>(std::lround(two_s));
  if (std::abs(two_s - order) > 1e-12) throw std::invalid_argument("bessel_power: 2s must be an integer");
  const bool finite = s >= 0 && std::abs(s - std::round(s)) < 1e-12;
  ClassicalSymbol sym(n, order, finite ? std::nullopt : std::optional<int>(std::min(floor, order)), 1);
  const int last = finite ? static_cast<int>(std::lround(s)) : (order - std::min(floor, order)) / 2;
  for (int i = 0; i <= last; ++i) {
    const double c = binomial(s, i);
    if (c == 0.0) continue;
    sym.set_component(atom_term(n, c, IntVec(n, 0), IntVec(n, 0), order - 2.0 * i));
  }
  return sym;
}

}  // namespace symbols

}  // namespace ncres
