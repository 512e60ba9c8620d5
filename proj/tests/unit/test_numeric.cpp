#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nilflow/numeric.hpp"
#include "nilflow/rng.hpp"

using namespace nilflow;

TEST_CASE("cis matches long double sin/cos over the full circle") {
  CounterRng rng(7, 0);
  double worst = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const std::uint64_t p = rng.next();
    const long double ang = 2.0L * 3.14159265358979323846264338327950288L * static_cast<long double>(p) / 18446744073709551616.0L;
    const cplx c = cis(p);
    worst = std::max(worst, static_cast<double>(std::fabs(c.real() - cosl(ang)) + std::fabs(c.imag() - sinl(ang))));
  }
  CHECK(worst < 1e-15);
  CHECK(cis(0).real() == 1.0);
  CHECK(std::abs(cis(std::uint64_t(1) << 62) - cplx(0, 1)) < 1e-16);
}

TEST_CASE("phases are exact fixed-point fractions") {
  CHECK(phase_of(0.5) == (u128(1) << 127));
  CHECK(phase_of(0.25) == (u128(1) << 126));
  CHECK(phase_of(1.75) == phase_of(0.75));
  CHECK(phase_of(-0.25) == phase_of(0.75));
  CHECK(phase_mul(phase_of(0.375), 8) == 0);
  CHECK(phase_mul(phase_of(0.125), -3) == phase_of(0.625));
  CHECK(phase_of_ratio(1, 3) * 3 + 1 == 0);  // floor(2^128/3) * 3 = 2^128 - 1
  CHECK(phase_to_cycles(phase_of(0.3)) == doctest::Approx(0.3).epsilon(1e-16));
  CHECK(phase_hi(phase_of(0.5)) == (std::uint64_t(1) << 63));
}

TEST_CASE("tree_sum is order-fixed and accurate") {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(1.0 / (i + 1));
  Neumaier n;
  for (double x : v) n.add(x);
  CHECK(tree_sum(v) == doctest::Approx(n.value()).epsilon(1e-15));
  CHECK(tree_sum(std::vector<double>{}) == 0.0);
  std::vector<cplx> c{{1, 2}, {3, 4}, {5, 6}};
  CHECK(tree_sum(c) == cplx(9, 12));
}

TEST_CASE("Neumaier recovers cancelled low-order bits") {
  Neumaier n;
  n.add(1.0);
  n.add(1e100);
  n.add(1.0);
  n.add(-1e100);
  CHECK(n.value() == 2.0);
}

TEST_CASE("Gauss-Legendre is exact on polynomials of degree 2n-1") {
  for (int n : {1, 2, 5, 8, 16}) {
    const GaussRule& g = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    const int deg = 2 * n - 1;
    double s = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], deg);
    CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
  }
}

TEST_CASE("adaptive Simpson and Chebyshev interpolation") {
  const double I = adaptive_simpson([](double x) { return std::exp(x) * std::sin(3 * x); }, 0.0, 2.0, 1e-12);
  const double exact = (std::exp(2.0) * (std::sin(6.0) - 3 * std::cos(6.0)) + 3.0) / 10.0;
  CHECK(I == doctest::Approx(exact).epsilon(1e-11));
  CHECK(adaptive_simpson([](double) { return 1.0; }, 1.0, 0.0, 1e-12) == doctest::Approx(-1.0));

  const Chebyshev ch([](double x) { return std::exp(x); }, -1.0, 2.0, 30);
  for (double x = -1.0; x <= 2.0; x += 0.137) CHECK(ch(x) == doctest::Approx(std::exp(x)).epsilon(1e-14));
}

TEST_CASE("parallel_for reports the lowest failing index") {
  set_threads(4);
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::int64_t i) { hit[i] = 1; });
  for (int h : hit) CHECK(h == 1);
  try {
    parallel_for(100, [](std::int64_t i) {
      if (i % 10 == 3) throw std::runtime_error(std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "3");
  }
  set_threads(0);
}

TEST_CASE("counter-based generator is keyed by (seed, index)") {
  CounterRng a(1, 5), b(1, 5), c(1, 6), d(2, 5);
  const auto va = a.next();
  CHECK(va == b.next());
  CHECK(va != c.next());
  CHECK(va != d.next());
  CounterRng u(3, 0);
  double m = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    CHECK_UNARY(x >= 0.0);
    CHECK_UNARY(x < 1.0);
    m += x;
  }
  CHECK(m / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
