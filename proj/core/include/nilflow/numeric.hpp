#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nilflow {

using cplx = std::complex<double>;
using u128 = unsigned __int128;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

// Neumaier's variant of Kahan summation.
class Neumaier {
 public:
  void add(double x) {
    const double t = s_ + x;
    if (std::fabs(s_) >= std::fabs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

class NeumaierC {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  Neumaier re_, im_;
};

// Pairwise sums in a fixed binary-tree order: the result depends only on
// the input sequence, never on how it was produced.
double tree_sum(std::span<const double> v);
cplx tree_sum(std::span<const cplx> v);

// ---- fixed-point phases -------------------------------------------------
// A phase is a fraction of a full turn. The 128-bit form stores
// frac(cycles) * 2^128, so reduction mod 1 is integer wraparound and
// integer multiples are exact.

u128 phase_of(double cycles);
u128 phase_of(__float128 cycles);
// Exact phase of the rational p/q (q > 0) rounded to 2^-128.
u128 phase_of_ratio(std::int64_t p, std::int64_t q);
inline u128 phase_mul(u128 p, std::int64_t k) {
  return k >= 0 ? p * static_cast<u128>(k) : u128(0) - p * static_cast<u128>(-k);
}
inline std::uint64_t phase_hi(u128 p) {
  return static_cast<std::uint64_t>((p + (u128(1) << 63)) >> 64);
}
double phase_to_cycles(u128 p);

// e^{2 pi i p / 2^64}. Quadrant split plus odd/even Taylor polynomials on
// [-pi/4, pi/4]; absolute error is a few ulp. Branch-free so that loops
// over it vectorize.
inline void cis_parts(std::uint64_t p, double& re, double& im) {
  const std::uint64_t q = (p + (std::uint64_t(1) << 61)) >> 62;
  const auto r = static_cast<std::int64_t>(p - (q << 62));
  constexpr double kScale = kTwoPi / 18446744073709551616.0;
  const double x = static_cast<double>(r) * kScale;
  const double x2 = x * x;
  double s = 1.0 / 355687428096000.0;  // 1/17!
  s = s * x2 - 1.0 / 1307674368000.0;
  s = s * x2 + 1.0 / 6227020800.0;
  s = s * x2 - 1.0 / 39916800.0;
  s = s * x2 + 1.0 / 362880.0;
  s = s * x2 - 1.0 / 5040.0;
  s = s * x2 + 1.0 / 120.0;
  s = s * x2 - 1.0 / 6.0;
  s = x + x * x2 * s;
  double c = 1.0 / 20922789888000.0;  // 1/16!
  c = c * x2 - 1.0 / 87178291200.0;
  c = c * x2 + 1.0 / 479001600.0;
  c = c * x2 - 1.0 / 3628800.0;
  c = c * x2 + 1.0 / 40320.0;
  c = c * x2 - 1.0 / 720.0;
  c = c * x2 + 1.0 / 24.0;
  c = c * x2 - 0.5;
  c = 1.0 + x2 * c;
  const std::uint64_t qq = q & 3;
  re = qq == 0 ? c : qq == 1 ? -s : qq == 2 ? -c : s;
  im = qq == 0 ? s : qq == 1 ? c : qq == 2 ? -s : -c;
}

inline cplx cis(std::uint64_t p) {
  double re, im;
  cis_parts(p, re, im);
  return {re, im};
}

// ---- quadrature and interpolation ---------------------------------------

struct GaussRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};
// n-point Gauss-Legendre rule mapped to [0,1]; cached per n.
const GaussRule& gauss_legendre(int n);

// Adaptive Simpson on [a,b] with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

// Chebyshev interpolant of f on [lo,hi] at n first-kind nodes.
class Chebyshev {
 public:
  Chebyshev() = default;
  Chebyshev(const std::function<double(double)>& f, double lo, double hi, int n);
  double operator()(double x) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> coef_;
};

// ---- threading ----------------------------------------------------------

// Sets the worker count for every parallel loop in the library (<= 0 means
// all available cores). Results never depend on it.
void set_threads(int n);
int threads();

// Runs body(i) for i in [0,n) on the worker pool; body must only write to
// slots owned by i.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace nilflow
