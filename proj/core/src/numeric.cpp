#include "nilflow/numeric.hpp"

#include <quadmath.h>

#include <omp.h>

#include <exception>
#include <map>
#include <mutex>

namespace nilflow {

namespace {

template <class T>
T tree_sum_impl(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return tree_sum_impl(v.subspan(0, h)) + tree_sum_impl(v.subspan(h));
}

int g_threads = 0;

}  // namespace

double tree_sum(std::span<const double> v) { return tree_sum_impl(v); }
cplx tree_sum(std::span<const cplx> v) { return tree_sum_impl(v); }

u128 phase_of(double cycles) {
  double f = cycles - std::floor(cycles);  // exact for finite doubles
  if (f <= 0.0) return 0;
  if (f >= 1.0) return 0;
  int e = 0;
  const double m = std::frexp(f, &e);  // f = m 2^e, m in [0.5,1)
  const auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
  const int shift = e - 53 + 128;
  if (shift >= 0) return static_cast<u128>(mant) << shift;
  if (shift <= -64) return 0;
  const std::uint64_t half = std::uint64_t(1) << (-shift - 1);
  return static_cast<u128>((mant + half) >> (-shift));
}

u128 phase_of(__float128 cycles) {
  __float128 f = cycles - floorq(cycles);
  if (!(f > 0) || f >= 1) return 0;
  const __float128 hi = floorq(ldexpq(f, 64));
  const __float128 lo = ldexpq(f, 64) - hi;
  return (static_cast<u128>(static_cast<std::uint64_t>(hi)) << 64) +
         static_cast<u128>(static_cast<std::uint64_t>(ldexpq(lo, 64)));
}

u128 phase_of_ratio(std::int64_t p, std::int64_t q) {
  std::int64_t r = p % q;
  if (r < 0) r += q;
  // long division of r/q in base 2^64, two limbs, rounded
  const auto qq = static_cast<u128>(q);
  u128 rem = static_cast<u128>(r);
  std::uint64_t limbs[2];
  for (auto& limb : limbs) {
    u128 acc = 0;
    for (int b = 0; b < 64; ++b) {
      rem <<= 1;
      acc <<= 1;
      if (rem >= qq) {
        rem -= qq;
        acc |= 1;
      }
    }
    limb = static_cast<std::uint64_t>(acc);
  }
  u128 out = (static_cast<u128>(limbs[0]) << 64) | limbs[1];
  if (2 * rem >= qq) out += 1;
  return out;
}

double phase_to_cycles(u128 p) {
  return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(p >> 64)), -64) +
         std::ldexp(static_cast<double>(static_cast<std::uint64_t>(p)), -128);
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    long double dp = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(static_cast<double>(dx)) < 1e-19) break;
    }
    rule.nodes[n - 1 - i] = static_cast<double>((1 - x) / 2);
    rule.weights[n - 1 - i] = static_cast<double>(1 / ((1 - x * x) * dp * dp));
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  // split once up front so a lucky single panel is never accepted
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  return simpson_rec(f, a, m, fa, fl, fm, left, tol / 2, max_depth) +
         simpson_rec(f, m, b, fm, fr, fb, right, tol / 2, max_depth);
}

Chebyshev::Chebyshev(const std::function<double(double)>& f, double lo, double hi, int n)
    : lo_(lo), hi_(hi), coef_(n, 0.0) {
  std::vector<double> fx(n);
  for (int k = 0; k < n; ++k) {
    const double t = std::cos(kPi * (k + 0.5) / n);
    fx[k] = f(0.5 * (hi + lo) + 0.5 * (hi - lo) * t);
  }
  for (int j = 0; j < n; ++j) {
    long double s = 0;
    for (int k = 0; k < n; ++k) s += fx[k] * std::cos(kPi * j * (k + 0.5) / n);
    coef_[j] = static_cast<double>(2.0L * s / n);
  }
  coef_[0] *= 0.5;
}

double Chebyshev::operator()(double x) const {
  const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = coef_.size(); j-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + coef_[j];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + coef_[0];
}

void set_threads(int n) { g_threads = n; }

int threads() { return g_threads > 0 ? g_threads : omp_get_num_procs(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  const int nt = threads();
  if (nt <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  // exceptions cannot cross the parallel region; keep the one from the
  // lowest index so the reported error does not depend on scheduling
  std::exception_ptr err;
  std::int64_t err_index = n;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(nilflow_parallel_for_error)
      if (i < err_index) {
        err_index = i;
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace nilflow
