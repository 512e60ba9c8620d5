#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nilflow/rng.hpp"
#include "nilflow/stats.hpp"

using namespace nilflow;

TEST_CASE("KS distance") {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4}, c{5, 6, 7, 8}, d{2.5, 3.5};
  CHECK(ks_distance_sorted(a, b) == 0.0);
  CHECK(ks_distance_sorted(a, c) == 1.0);
  // at x = 2: F_a = 0.5, F_d = 0 ; at x = 3: 0.75 vs 0.5
  CHECK(ks_distance_sorted(a, d) == doctest::Approx(0.5));
  CounterRng r(51, 0);
  std::vector<double> u1(20000), u2(20000);
  for (auto& x : u1) x = r.uniform();
  for (auto& x : u2) x = r.uniform();
  std::sort(u1.begin(), u1.end());
  std::sort(u2.begin(), u2.end());
  CHECK(ks_distance_sorted(u1, u2) < 0.02);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 5.0);
  CHECK(quantile_sorted(v, 0.5) == 3.0);
  CHECK(quantile_sorted(v, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("Wilson interval") {
  const Interval w = wilson_interval(50, 100);
  CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
  const Interval z = wilson_interval(0, 1000);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
  CHECK(z.hi < 0.005);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean(v) == 5.0);
  CHECK(standard_error(v) == doctest::Approx(std::sqrt(32.0 / 7) / std::sqrt(8.0)));
}

TEST_CASE("line fits recover an exact line and resist outliers") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3 - 0.5 * i);
  }
  const LineFit ls = least_squares(x, y);
  CHECK(ls.slope == doctest::Approx(-0.5));
  CHECK(ls.intercept == doctest::Approx(3.0));
  CHECK(ls.r2 == doctest::Approx(1.0));
  CHECK(ls.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  y[3] = 100;
  y[15] = -50;
  const LineFit ts = theil_sen(x, y);
  CHECK(ts.slope == doctest::Approx(-0.5));
  CHECK(ts.intercept == doctest::Approx(3.0));
  CHECK(least_squares(x, y).r2 < 0.9);
  const Interval ci = bootstrap_theil_sen(x, y, 500, 3);
  CHECK(ci.lo <= -0.5);
  CHECK(ci.hi >= -0.5);
  const Interval ci2 = bootstrap_theil_sen(x, y, 500, 3);
  CHECK(ci.lo == ci2.lo);
  CHECK(ci.hi == ci2.hi);
}
