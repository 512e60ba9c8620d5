#include "nilflow/moduli.hpp"

#include <quadmath.h>

#include <cmath>
#include <span>

#include "nilflow/csv.hpp"
#include "nilflow/error.hpp"
#include "nilflow/numeric.hpp"

namespace nilflow {

namespace {

using wide = __float128;

struct WPoint {
  wide re, im;
};

WPoint mobius_point(const WideSL2& s, wide scale_ab, wide scale_cd) {
  // (A i + C)/(B i + D) with A = s.a*scale_ab, ... ; the common factor of
  // numerator and denominator cancels, so only the ratio of scales matters.
  const wide A = s.a * scale_ab, B = s.b * scale_ab;
  const wide C = s.c * scale_cd, D = s.d * scale_cd;
  const wide den = B * B + D * D;
  if (!(den > 1e-600Q)) throw DegenerateFrame("|b i + d| vanishes");
  // (C + A i)(D - B i) = C D + A B + i (A D - B C)
  return {(C * D + A * B) / den, (A * D - B * C) / den};
}

WPoint reduce_wide(WPoint z) {
  for (int it = 0; it < 100000; ++it) {
    z.re -= roundq(z.re);
    const wide r2 = z.re * z.re + z.im * z.im;
    if (r2 >= 1) return z;
    z = {-z.re / r2, z.im / r2};
  }
  throw DegenerateFrame("fundamental-domain reduction did not terminate");
}

wide dist_wide(WPoint z, WPoint w) {
  const wide dx = z.re - w.re, dy = z.im - w.im;
  return 2 * asinhq(sqrtq(dx * dx + dy * dy) / (2 * sqrtq(z.im * w.im)));
}

double delta_wide(const WideSL2& s, wide scale_ab, wide scale_cd) {
  const WPoint z = reduce_wide(mobius_point(s, scale_ab, scale_cd));
  return static_cast<double>(dist_wide(WPoint{0, 1}, z));
}

// Trapezoid weights on n panels applied to f evaluated at t_k = k h.
double trapezoid(std::span<const double> f, double h) {
  std::vector<double> w(f.begin(), f.end());
  if (!w.empty()) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  }
  return h * tree_sum(w);
}

}  // namespace

Frame renorm(const Frame& a, double t) {
  Frame r = a;
  const double up = std::exp(t), down = std::exp(-t);
  r.a *= up;
  r.b *= up;
  r.v *= up;
  r.c *= down;
  r.d *= down;
  r.w *= down;
  if (a.wide) {
    const wide wu = expq(static_cast<wide>(t)), wd = expq(-static_cast<wide>(t));
    r.wide = WideSL2{a.wide->a * wu, a.wide->b * wu, a.wide->c * wd, a.wide->d * wd};
  }
  return r;
}

ModularPoint to_modular_point(const Frame& a) {
  const WPoint z = mobius_point(a.sl2_wide(), 1, 1);
  return {static_cast<double>(z.re), static_cast<double>(z.im)};
}

ModularPoint reduce_fundamental(const ModularPoint& z) {
  if (!(z.im > 0)) throw ValidationError("modular point must lie in the upper half plane");
  const WPoint r = reduce_wide(WPoint{z.re, z.im});
  return {static_cast<double>(r.re), static_cast<double>(r.im)};
}

double hyp_dist(const ModularPoint& z, const ModularPoint& w) {
  return static_cast<double>(dist_wide(WPoint{z.re, z.im}, WPoint{w.re, w.im}));
}

double delta_M(const Frame& a) { return delta_wide(a.sl2_wide(), 1, 1); }

double delta_M_along(const Frame& a, double t) {
  if (!(std::fabs(t) <= kWideHorizon))
    throw DomainExceeded("geodesic time " + std::to_string(t) + " beyond the 113-bit horizon " +
                         std::to_string(kWideHorizon));
  // only the ratio e^{2t} of the two scales matters
  return delta_wide(a.sl2_wide(), 1, expq(-2 * static_cast<wide>(t)));
}

ExcursionRecord dc_integral(const Frame& a, double horizon, double step) {
  if (!(step > 0) || !(horizon >= 0)) throw ValidationError("dc_integral needs step > 0, horizon >= 0");
  ExcursionRecord rec;
  rec.frame = a;
  rec.horizon = horizon;
  if (horizon == 0.0) {
    rec.step = step;
    rec.samples.push_back({0.0, delta_M(a), std::exp(delta_M(a) / 4)});
    return rec;
  }
  if (step > horizon) throw ValidationError("dc_integral needs step <= horizon");
  const auto n = static_cast<std::int64_t>(std::ceil(horizon / step - 1e-9));
  const double h = horizon / n;
  rec.step = h;
  rec.samples.resize(n + 1);
  parallel_for(n + 1, [&](std::int64_t k) {
    const double t = k * h;
    const double d = delta_M_along(a, -t);
    rec.samples[k] = {t, d, std::exp(d / 4 - t / 2)};
  });
  std::vector<double> f(n + 1);
  for (std::int64_t k = 0; k <= n; ++k) f[k] = rec.samples[k].integrand;
  rec.dc_value = trapezoid(f, h);
  rec.e_value = excursion_E(a, std::exp(horizon), step);
  return rec;
}

double excursion_E(const Frame& a, double T, double step) {
  if (!(T >= 1)) throw ValidationError("excursion_E needs T >= 1");
  if (!(step > 0)) throw ValidationError("excursion_E needs step > 0");
  const double L = std::log(T);
  if (L == 0.0) return 0.0;
  const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(L / step - 1e-9)));
  const double h = L / n;
  std::vector<double> f(n + 1);
  parallel_for(n + 1, [&](std::int64_t k) {
    const double t = k * h;
    f[k] = std::exp(delta_M_along(a, L - t) / 4 - t / 2);
  });
  return trapezoid(f, h);
}

void write_excursion_csv(std::ostream& os, const ExcursionRecord& rec) {
  CsvWriter csv(os, {"t", "delta", "integrand"});
  for (const auto& s : rec.samples) csv.row(s.t, s.delta, s.integrand);
}

namespace {

std::vector<long> cf_with_error(wide x, wide err, int k) {
  std::vector<long> out;
  x -= floorq(x);
  if (x <= err) return out;
  while (static_cast<int>(out.size()) < k) {
    const wide y = 1 / x;
    const wide ey = err / (x * x) + 1e-33Q * y;
    const wide nearest = roundq(y);
    if (fabsq(y - nearest) <= ey) {
      out.push_back(static_cast<long>(nearest));
      break;  // remainder indistinguishable from zero: rational within error
    }
    const wide a = floorq(y);
    if (floorq(y - ey) != a || floorq(y + ey) != a || a > 1e15Q) break;
    out.push_back(static_cast<long>(a));
    x = y - a;
    err = ey;
  }
  return out;
}

// floor((P + sqrt D)/Q), exact
long surd_floor(long P, long D, long Q) {
  const long double est = (P + std::sqrt(static_cast<long double>(D))) / Q;
  long a = static_cast<long>(std::floor(est));
  // a <= (P + sqrtD)/Q  <=>  sign-aware comparison of a Q - P with sqrt D
  auto le = [&](long cand) {
    // cand <= (P+sqrtD)/Q
    __int128 lhs = static_cast<__int128>(cand) * Q - P;  // compare with sqrt D (Q>0) or -sqrtD
    if (Q > 0) return lhs < 0 || lhs * lhs <= D;
    // Q < 0: cand Q >= P + sqrtD  <=>  cand Q - P >= sqrtD
    return lhs >= 0 && lhs * lhs >= D;
  };
  while (!le(a)) --a;
  while (le(a + 1)) ++a;
  return a;
}

}  // namespace

std::vector<long> cf_partial_quotients(double rho, int k) {
  if (k < 1) throw ValidationError("cf_partial_quotients needs k >= 1");
  const wide x = rho;
  const wide half_ulp = std::ldexp(std::fabs(rho) > 0 ? std::fabs(rho) : 1.0, -53);
  return cf_with_error(x, half_ulp, k);
}

std::vector<long> cf_partial_quotients(const Frame& a, int k) {
  if (k < 1) throw ValidationError("cf_partial_quotients needs k >= 1");
  const WideSL2 s = a.sl2_wide();
  if (s.a == 0) throw NonTransversal("slope b/a undefined for a = 0");
  const wide x = s.b / s.a;
  const wide err = a.wide ? 1e-32Q * (1 + fabsq(x)) : ldexpq(1 + fabsq(x), -52);
  return cf_with_error(x, err, k);
}

std::vector<long> cf_quadratic_surd(long P, long D, long Q, int k) {
  if (k < 1) throw ValidationError("cf_quadratic_surd needs k >= 1");
  const long s = static_cast<long>(std::sqrt(static_cast<long double>(D)));
  for (long r = std::max(0L, s - 1); r <= s + 1; ++r)
    if (r * r == D) throw ValidationError("cf_quadratic_surd needs non-square D");
  if (Q == 0 || (D - P * P) % Q != 0) throw ValidationError("cf_quadratic_surd needs Q | D - P^2");
  std::vector<long> out;
  long a = surd_floor(P, D, Q);
  while (static_cast<int>(out.size()) < k) {
    P = a * Q - P;
    Q = (D - P * P) / Q;
    a = surd_floor(P, D, Q);
    out.push_back(a);
  }
  return out;
}

void DiophantineParams::validate() const {
  if (!(L >= 0)) throw ValidationError("DiophantineParams.L must be >= 0");
  if (!(eta > 0 && eta < 1)) throw ValidationError("DiophantineParams.eta must lie in (0,1)");
  if (!(zeta > 0)) throw ValidationError("DiophantineParams.zeta must be > 0");
  if (!(s > 3.5)) throw ValidationError("DiophantineParams.s must exceed 7/2");
}

}  // namespace nilflow
