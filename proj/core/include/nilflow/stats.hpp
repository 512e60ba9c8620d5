#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nilflow {

// Sup distance between the empirical CDFs of two sorted samples.
double ks_distance_sorted(std::span<const double> a, std::span<const double> b);
// Type-7 (linear interpolation) quantile of a sorted sample.
double quantile_sorted(std::span<const double> v, double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.96);

double mean(std::span<const double> v);
// Sample standard deviation / sqrt(n).
double standard_error(std::span<const double> v);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);
// Median of pairwise slopes; intercept is the median of y - slope x.
LineFit theil_sen(std::span<const double> x, std::span<const double> y);
// Percentile bootstrap of the Theil-Sen slope over resampled (x,y) pairs.
Interval bootstrap_theil_sen(std::span<const double> x, std::span<const double> y, int resamples,
                             std::uint64_t seed, double level = 0.95);

}  // namespace nilflow
