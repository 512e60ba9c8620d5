#include "nilflow/stats.hpp"

#include <algorithm>
#include <cmath>

#include "nilflow/error.hpp"
#include "nilflow/numeric.hpp"
#include "nilflow/rng.hpp"

namespace nilflow {

double ks_distance_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("ks distance of an empty sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // whichever sample is left over walks its CDF up to 1 against the other at 1
  d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  return d;
}

double quantile_sorted(std::span<const double> v, double p) {
  if (v.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0 && p <= 1)) throw ValidationError("quantile level must be in [0,1]");
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0 || k < 0 || k > n) throw ValidationError("wilson interval needs 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn, z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / den;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / den;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return tree_sum(v) / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> d(v.size());
  for (size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(tree_sum(d) / (n - 1) / n);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("least squares needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("least squares with constant abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

namespace {

double median_inplace(std::vector<double>& v) {
  const size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  const double hi = v[m];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + m));
}

}  // namespace

LineFit theil_sen(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("theil-sen needs >= 2 paired points");
  std::vector<double> slopes;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j < x.size(); ++j)
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  if (slopes.empty()) throw ValidationError("theil-sen with constant abscissa");
  LineFit f;
  f.slope = median_inplace(slopes);
  std::vector<double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = y[i] - f.slope * x[i];
  f.intercept = median_inplace(r);
  const double my = mean(y);
  double sse = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
    syy += (y[i] - my) * (y[i] - my);
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  return f;
}

Interval bootstrap_theil_sen(std::span<const double> x, std::span<const double> y, int resamples,
                             std::uint64_t seed, double level) {
  if (resamples < 10) throw ValidationError("bootstrap needs >= 10 resamples");
  const size_t n = x.size();
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> bx(n), by(n);
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    for (size_t i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(rng.next() % n);
      bx[i] = x[k];
      by[i] = y[k];
    }
    // a resample with a single distinct abscissa carries no slope
    if (std::all_of(bx.begin(), bx.end(), [&](double v) { return v == bx[0]; })) continue;
    slopes.push_back(theil_sen(bx, by).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  const double alpha = 0.5 * (1.0 - level);
  return {quantile_sorted(slopes, alpha), quantile_sorted(slopes, 1.0 - alpha)};
}

}  // namespace nilflow
