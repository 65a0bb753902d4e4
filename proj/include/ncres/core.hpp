#pragma once

// Shared scalar types, error classes, compensated summation and the
// deterministic parallel-for used by the lattice sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ncres {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr const char* version_string = "0.3.0";

/// Reading a homogeneous component below a symbol's exactness floor.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rational function has a pole on the real axis.
class RealPoleError : public std::domain_error {
 public:
  RealPoleError(const std::string& what, cplx pole)
      : std::domain_error(what), pole_(pole) {}
  cplx pole() const noexcept { return pole_; }

 private:
  cplx pole_;
};

/// A requested enumeration would exceed the configured mode budget.
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit rejected (ill-conditioned or under-determined).
class FitRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double start) : sum_(start) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Execution settings for the parallel kernels. Work is always split into
/// chunks whose boundaries depend only on the problem size, never on the
/// thread count, so every reduction is bit-identical for any `threads`.
struct ExecPolicy {
  unsigned threads = 1;

  static ExecPolicy hardware() {
    return ExecPolicy{std::max(1u, std::thread::hardware_concurrency())};
  }
};

/// Runs body(chunk) for chunk in [0, chunks). Chunks are handed out in
/// strided order; callers write results into per-chunk slots.
inline void parallel_for_chunks(std::size_t chunks, const ExecPolicy& policy,
                                const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, policy.threads), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) body(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Fixed-size chunking of [0, n).
struct ChunkPlan {
  std::size_t n = 0;
  std::size_t chunk = 1;

  std::size_t count() const { return n == 0 ? 0 : (n + chunk - 1) / chunk; }
  std::size_t begin(std::size_t c) const { return c * chunk; }
  std::size_t end(std::size_t c) const { return std::min(n, (c + 1) * chunk); }
};

/// Surface area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Generalized binomial coefficient C(a, i) for real a.
inline double binomial(double a, int i) {
  double r = 1.0;
  for (int q = 0; q < i; ++q) r *= (a - q) / (q + 1);
  return r;
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

}  // namespace ncres
