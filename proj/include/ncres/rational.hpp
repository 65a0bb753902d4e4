#pragma once

// One-variable complex polynomials and rational functions with the
// denominator kept in factored form prod (tau - p)^m. Keeping the poles
// explicit makes the half-plane split and residues exact up to rounding of
// the coefficient arithmetic.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ncres/core.hpp"

namespace ncres {

/// Coefficients low to high: c[0] + c[1] tau + ...
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<cplx> c) : c_(c) { trim(); }
  explicit Polynomial(std::vector<cplx> c) : c_(std::move(c)) { trim(); }

  static Polynomial constant(cplx v) { return Polynomial(std::vector<cplx>{v}); }
  /// tau - root
  static Polynomial linear_factor(cplx root) { return Polynomial(std::vector<cplx>{-root, 1.0}); }

  bool is_zero() const { return c_.empty(); }
  /// Degree; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<cplx>& coefficients() const { return c_; }
  cplx coefficient(int i) const { return (i >= 0 && i <= degree()) ? c_[static_cast<std::size_t>(i)] : cplx{}; }
  cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

  cplx operator()(cplx z) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * cplx{-1.0, 0.0}; }
  friend Polynomial operator*(const Polynomial& a, cplx s) {
    std::vector<cplx> r(a.c_);
    for (auto& v : r) v *= s;
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(r));
  }

  Polynomial derivative() const {
    std::vector<cplx> r;
    for (std::size_t i = 1; i < c_.size(); ++i) r.push_back(static_cast<double>(i) * c_[i]);
    return Polynomial(std::move(r));
  }

  Polynomial power(int e) const {
    Polynomial r = constant(1.0);
    for (int i = 0; i < e; ++i) r = r * *this;
    return r;
  }

  /// Quotient and remainder by a non-zero divisor.
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const {
    if (d.is_zero()) throw std::invalid_argument("Polynomial: division by zero polynomial");
    std::vector<cplx> rem(c_);
    const int dd = d.degree();
    if (degree() < dd) return {Polynomial{}, *this};
    std::vector<cplx> q(static_cast<std::size_t>(degree() - dd + 1));
    for (int i = degree(); i >= dd; --i) {
      const cplx f = rem[static_cast<std::size_t>(i)] / d.leading();
      q[static_cast<std::size_t>(i - dd)] = f;
      for (int j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(i - dd + j)] -= f * d.c_[static_cast<std::size_t>(j)];
      rem[static_cast<std::size_t>(i)] = 0.0;
    }
    rem.resize(static_cast<std::size_t>(dd));
    return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
  }

  /// Taylor coefficients at z0 up to (and including) order `count - 1`.
  std::vector<cplx> taylor(cplx z0, int count) const {
    std::vector<cplx> work(c_);
    std::vector<cplx> out(static_cast<std::size_t>(std::max(count, 0)));
    // Repeated synthetic division by (tau - z0).
    for (int k = 0; k < count && !work.empty(); ++k) {
      cplx acc{};
      std::vector<cplx> next(work.size() > 1 ? work.size() - 1 : 0);
      for (std::size_t i = work.size(); i-- > 0;) {
        acc = acc * z0 + work[i];
        if (i > 0) next[i - 1] = acc;
      }
      out[static_cast<std::size_t>(k)] = acc;
      work = std::move(next);
    }
    return out;
  }

  /// Roots via companion-matrix eigenvalues.
  std::vector<cplx> roots() const {
    const int d = degree();
    if (d < 1) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c_[static_cast<std::size_t>(i)] / leading();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
    return r;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
  }
  std::vector<cplx> c_;
};

struct Pole {
  cplx location;
  int multiplicity = 1;
};

/// Partial-fraction data: poly + sum_p sum_r coeffs[r-1] / (tau - p)^r.
struct PartialFractions {
  struct Term {
    cplx location;
    std::vector<cplx> coeffs;  // coeffs[r-1] multiplies (tau - p)^{-r}
  };
  Polynomial poly;
  std::vector<Term> terms;

  cplx operator()(cplx z) const {
    cplx acc = poly(z);
    for (const auto& t : terms) {
      const cplx inv = 1.0 / (z - t.location);
      cplx pw = inv;
      for (const auto& c : t.coeffs) {
        acc += c * pw;
        pw *= inv;
      }
    }
    return acc;
  }

  /// Sum of the simple-pole coefficients (residues) at the listed poles.
  cplx residue_sum() const {
    cplx s{};
    for (const auto& t : terms) {
      if (!t.coeffs.empty()) s += t.coeffs[0];
    }
    return s;
  }
};

/// Relative tolerance used to merge poles and drop removable ones.
inline constexpr double pole_merge_tol = 1e-9;
/// Poles with |Im p| below this (relative to 1 + |p|) count as real.
inline constexpr double real_axis_tol = 1e-9;

/// A rational function kept in partial-fraction form
///   poly(tau) + sum_p sum_r c_{p,r} (tau - p)^{-r}.
/// This is the canonical form (common factors cannot survive), and sums and
/// products are done termwise, so no high-degree numerator is ever expanded.
/// numerator() / denominator() give the equivalent monic-denominator form.
class RationalFn {
 public:
  RationalFn() = default;
  /// numerator / prod (tau - p_i)^{m_i}
  RationalFn(const Polynomial& numerator, const std::vector<Pole>& poles) {
    std::vector<Pole> merged;
    for (const auto& p : poles) {
      if (p.multiplicity <= 0) continue;
      bool found = false;
      for (auto& q : merged) {
        if (same_point(q.location, p.location)) {
          q.multiplicity += p.multiplicity;
          found = true;
        }
      }
      if (!found) merged.push_back(p);
    }
    pf_ = expand(numerator, merged);
    normalize();
  }
  /// From coefficient lists; denominator roots are found numerically and
  /// clustered (a k-fold root splits by ~eps^{1/k} in the companion matrix).
  static RationalFn from_polynomials(const Polynomial& numerator, const Polynomial& denominator) {
    if (denominator.is_zero()) throw std::invalid_argument("RationalFn: zero denominator");
    const auto roots = denominator.roots();
    std::vector<Pole> poles;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (used[i]) continue;
      cplx sum = roots[i];
      int count = 1;
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        if (!used[j] && std::abs(roots[j] - roots[i]) < 1e-4 * (1.0 + std::abs(roots[i]))) {
          used[j] = true;
          sum += roots[j];
          ++count;
        }
      }
      poles.push_back(Pole{sum / static_cast<double>(count), count});
    }
    RationalFn f(numerator * (1.0 / denominator.leading()), poles);
    f.cancel_removable(numerator, denominator);
    return f;
  }
  static RationalFn polynomial(Polynomial p) {
    RationalFn f;
    f.pf_.poly = std::move(p);
    return f;
  }
  static RationalFn constant(cplx c) { return polynomial(Polynomial::constant(c)); }
  /// c / (tau - p)^m
  static RationalFn pole_term(cplx c, cplx p, int m = 1) {
    if (m < 1) throw std::invalid_argument("RationalFn: pole order must be >= 1");
    RationalFn f;
    if (c == cplx{}) return f;
    PartialFractions::Term t{p, std::vector<cplx>(static_cast<std::size_t>(m))};
    t.coeffs.back() = c;
    f.pf_.terms.push_back(std::move(t));
    return f;
  }
  static RationalFn from_partial_fractions(const PartialFractions& pf) {
    RationalFn f;
    f.pf_.poly = pf.poly;
    for (const auto& t : pf.terms) f.add_term(t);
    f.normalize();
    return f;
  }

  const PartialFractions& partial_fractions() const { return pf_; }
  const Polynomial& polynomial_part() const { return pf_.poly; }

  std::vector<Pole> poles() const {
    std::vector<Pole> out;
    for (const auto& t : pf_.terms) out.push_back(Pole{t.location, static_cast<int>(t.coeffs.size())});
    return out;
  }
  int denominator_degree() const {
    int d = 0;
    for (const auto& t : pf_.terms) d += static_cast<int>(t.coeffs.size());
    return d;
  }
  Polynomial denominator() const {
    Polynomial d = Polynomial::constant(1.0);
    for (const auto& t : pf_.terms) d = d * Polynomial::linear_factor(t.location).power(static_cast<int>(t.coeffs.size()));
    return d;
  }
  Polynomial numerator() const {
    Polynomial num = pf_.poly * denominator();
    for (std::size_t i = 0; i < pf_.terms.size(); ++i) {
      const auto& t = pf_.terms[i];
      const int m = static_cast<int>(t.coeffs.size());
      Polynomial others = Polynomial::constant(1.0);
      for (std::size_t j = 0; j < pf_.terms.size(); ++j) {
        if (j != i) others = others * Polynomial::linear_factor(pf_.terms[j].location).power(static_cast<int>(pf_.terms[j].coeffs.size()));
      }
      for (int r = 1; r <= m; ++r) {
        num = num + others * Polynomial::linear_factor(t.location).power(m - r) * t.coeffs[static_cast<std::size_t>(r - 1)];
      }
    }
    return num;
  }

  bool is_zero() const { return pf_.poly.is_zero() && pf_.terms.empty(); }
  bool is_proper() const { return pf_.poly.is_zero(); }
  /// deg(num) - deg(den): the polynomial degree, or -(order of decay) for
  /// proper functions; INT_MIN/2 for zero.
  int growth_order() const {
    if (is_zero()) return std::numeric_limits<int>::min() / 2;
    if (!pf_.poly.is_zero()) return pf_.poly.degree();
    return numerator().degree() - denominator_degree();
  }

  cplx operator()(cplx z) const { return pf_(z); }

  /// Throws RealPoleError if a pole sits on the real axis.
  void require_no_real_poles(const char* context) const {
    for (const auto& t : pf_.terms) {
      if (std::abs(t.location.imag()) <= real_axis_tol * (1.0 + std::abs(t.location))) {
        std::ostringstream os;
        os << context << ": pole on the real axis at " << t.location.real();
        throw RealPoleError(os.str(), t.location);
      }
    }
  }
  bool all_poles_upper() const {
    return std::all_of(pf_.terms.begin(), pf_.terms.end(), [](const auto& t) { return t.location.imag() > 0; });
  }
  bool all_poles_lower() const {
    return std::all_of(pf_.terms.begin(), pf_.terms.end(), [](const auto& t) { return t.location.imag() < 0; });
  }

  friend RationalFn operator+(const RationalFn& a, const RationalFn& b) {
    RationalFn r = a;
    r.pf_.poly = r.pf_.poly + b.pf_.poly;
    for (const auto& t : b.pf_.terms) r.add_term(t);
    r.normalize();
    return r;
  }
  friend RationalFn operator*(const RationalFn& a, cplx s) {
    RationalFn r = a;
    r.pf_.poly = r.pf_.poly * s;
    for (auto& t : r.pf_.terms) {
      for (auto& c : t.coeffs) c *= s;
    }
    r.normalize();
    return r;
  }
  friend RationalFn operator-(const RationalFn& a, const RationalFn& b) { return a + b * cplx{-1.0, 0.0}; }

  friend RationalFn operator*(const RationalFn& a, const RationalFn& b) {
    RationalFn r;
    r.pf_.poly = a.pf_.poly * b.pf_.poly;
    for (const auto& t : b.pf_.terms) r.add_poly_times_pole(a.pf_.poly, t);
    for (const auto& t : a.pf_.terms) r.add_poly_times_pole(b.pf_.poly, t);
    for (const auto& s : a.pf_.terms) {
      for (const auto& t : b.pf_.terms) {
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
          for (std::size_t j = 0; j < t.coeffs.size(); ++j) {
            const cplx c = s.coeffs[i] * t.coeffs[j];
            if (c != cplx{}) r.add_pole_pair(c, s.location, static_cast<int>(i) + 1, t.location, static_cast<int>(j) + 1);
          }
        }
      }
    }
    r.normalize();
    return r;
  }

 private:
  static bool same_point(cplx a, cplx b) { return std::abs(a - b) <= pole_merge_tol * (1.0 + std::abs(a)); }

  /// Partial fractions of num / prod (tau - p)^m via Taylor series at each pole.
  static PartialFractions expand(const Polynomial& num, const std::vector<Pole>& poles) {
    PartialFractions pf;
    Polynomial den = Polynomial::constant(1.0);
    for (const auto& p : poles) den = den * Polynomial::linear_factor(p.location).power(p.multiplicity);
    auto [q, rem] = num.divmod(den);
    pf.poly = q;
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const cplx p = poles[i].location;
      const int m = poles[i].multiplicity;
      std::vector<cplx> series = rem.taylor(p, m);
      for (std::size_t j = 0; j < poles.size(); ++j) {
        if (j == i) continue;
        const cplx d = p - poles[j].location;
        const int mq = poles[j].multiplicity;
        std::vector<cplx> factor(static_cast<std::size_t>(m));
        for (int s = 0; s < m; ++s) factor[static_cast<std::size_t>(s)] = binomial(-mq, s) * std::pow(d, -mq - s);
        std::vector<cplx> prod(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a) {
          for (int b = 0; a + b < m; ++b) prod[static_cast<std::size_t>(a + b)] += series[static_cast<std::size_t>(a)] * factor[static_cast<std::size_t>(b)];
        }
        series = std::move(prod);
      }
      PartialFractions::Term term{p, std::vector<cplx>(static_cast<std::size_t>(m))};
      for (int s = 0; s < m; ++s) term.coeffs[static_cast<std::size_t>(m - 1 - s)] = series[static_cast<std::size_t>(s)];
      pf.terms.push_back(std::move(term));
    }
    return pf;
  }

  void add_term(const PartialFractions::Term& t) {
    for (auto& u : pf_.terms) {
      if (same_point(u.location, t.location)) {
        if (u.coeffs.size() < t.coeffs.size()) u.coeffs.resize(t.coeffs.size());
        for (std::size_t i = 0; i < t.coeffs.size(); ++i) u.coeffs[i] += t.coeffs[i];
        return;
      }
    }
    pf_.terms.push_back(t);
  }
  void add_single(cplx c, cplx p, int r) {
    PartialFractions::Term t{p, std::vector<cplx>(static_cast<std::size_t>(r))};
    t.coeffs.back() = c;
    add_term(t);
  }

  /// P(tau) * sum_r c_r (tau - p)^{-r}, using the Taylor expansion of P at p.
  void add_poly_times_pole(const Polynomial& P, const PartialFractions::Term& t) {
    if (P.is_zero()) return;
    const int deg = P.degree();
    const std::vector<cplx> a = P.taylor(t.location, deg + 1);  // P = sum_s a_s (tau - p)^s
    for (std::size_t ri = 0; ri < t.coeffs.size(); ++ri) {
      const int r = static_cast<int>(ri) + 1;
      for (int s = 0; s <= deg; ++s) {
        const cplx c = t.coeffs[ri] * a[static_cast<std::size_t>(s)];
        if (c == cplx{}) continue;
        if (s < r) {
          add_single(c, t.location, r - s);
        } else {
          pf_.poly = pf_.poly + Polynomial::linear_factor(t.location).power(s - r) * c;
        }
      }
    }
  }

  /// c (tau - p)^{-r} (tau - q)^{-s}.
  void add_pole_pair(cplx c, cplx p, int r, cplx q, int s) {
    if (same_point(p, q)) {
      add_single(c, p, r + s);
      return;
    }
    // (tau - q)^{-s} = sum_j C(-s, j) (p - q)^{-s-j} (tau - p)^j near p, and symmetrically.
    for (int j = 0; j < r; ++j) add_single(c * binomial(-s, j) * std::pow(p - q, -s - j), p, r - j);
    for (int j = 0; j < s; ++j) add_single(c * binomial(-r, j) * std::pow(q - p, -r - j), q, s - j);
  }

  /// Drops trailing zero coefficients and empty poles.
  void normalize() {
    for (auto& t : pf_.terms) {
      while (!t.coeffs.empty() && t.coeffs.back() == cplx{}) t.coeffs.pop_back();
    }
    pf_.terms.erase(std::remove_if(pf_.terms.begin(), pf_.terms.end(), [](const auto& t) { return t.coeffs.empty(); }),
                    pf_.terms.end());
  }

  /// After numerical root finding, a root of the numerator can cancel a
  /// root of the denominator; its pole coefficients are then pure rounding.
  void cancel_removable(const Polynomial& num, const Polynomial& den) {
    const double scale = std::max(num.max_abs() / std::abs(den.leading()), 1e-300);
    for (auto& t : pf_.terms) {
      const double bound = 1e-10 * scale * std::pow(1.0 + std::abs(t.location), std::max(num.degree(), 0));
      while (!t.coeffs.empty() && std::abs(t.coeffs.back()) <= bound) t.coeffs.pop_back();
    }
    normalize();
  }

  PartialFractions pf_;
};

}  // namespace ncres
