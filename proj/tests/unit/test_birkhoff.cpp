#include <doctest.h>

#include <cmath>

#include "nilflow/birkhoff.hpp"
#include "nilflow/error.hpp"
#include "nilflow/rng.hpp"

using namespace nilflow;

namespace {

// Iterates the skew shift in double precision; the rounded rho and the
// iterated z drift, so agreement is only ~1e-8 at J = 1e3.
cplx brute_weyl(const CharLabel& label, const SkewShiftParams& ssp, double y, double z, std::int64_t J) {
  cplx s = 0.0;
  for (std::int64_t k = 0; k < J; ++k) {
    s += eval_character(label, ssp.K, y, z);
    std::tie(y, z) = ssp.apply(y, z);
  }
  return s;
}

// Composite Gauss-Legendre of f(phi^X_s x) over [0, T]; the bump lift is
// smooth so a fixed fine grid converges quickly.
cplx brute_integral(const Observable& f, const Frame& a, const GroupElement& x, double T, int panels) {
  const GaussRule& g = gauss_legendre(10);
  const double h = T / panels;
  cplx s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * h * f.evaluate(a, nilflow::nilflow(a, x, (p + g.nodes[i]) * h));
  return s;
}

WeylSumSpec spec_for(const Frame& a, CharLabel label, double y, double z, std::int64_t J) {
  WeylSumSpec s;
  s.label = label;
  s.K = a.lattice.K();
  s.ssp = return_params(a);
  s.y = y;
  s.z = z;
  s.J = J;
  return s;
}

}  // namespace

TEST_CASE("Weyl kernel matches brute iteration and the quad-precision sum") {
  const Frame frames[] = {golden_frame(), sqrt2_frame(2), Frame::make(-0.7, 0.31, 0.0, -1 / 0.7, 0.12, 0, 3)};
  const CharLabel labels[] = {{0, 1}, {3, -2}, {1, 1}};
  for (const Frame& a : frames) {
    for (const CharLabel& l : labels) {
      WeylSumSpec s = spec_for(a, l, 0.123, 0.037, 1000);
      CHECK(std::abs(weyl_sum(s) - brute_weyl(l, s.ssp, s.y, s.z, s.J)) < 1e-8);
      s.J = 100003;
      CHECK(std::abs(weyl_sum(s) - weyl_sum_direct(s)) < 1e-9);
    }
  }
}

TEST_CASE("Weyl sum is bitwise independent of threading") {
  WeylSumSpec s = spec_for(golden_frame(), {2, 1}, 0.4, 0.37, 3000017);
  set_threads(1);
  const cplx one = weyl_sum(s);
  set_threads(8);
  const cplx eight = weyl_sum(s);
  set_threads(0);
  CHECK(one == eight);
  CHECK(weyl_sum_serial(s) == one);
  const WeylKernel k(s.label, s.ssp, s.y, s.z);
  CHECK(k.sum(0, s.J, false) == one);
  CHECK(std::abs(k.term(12345) - cis(phase_hi(k.phase_at(12345)))) == 0.0);
}

TEST_CASE("partial sums") {
  WeylSumSpec s = spec_for(golden_frame(), {0, 1}, 0.1, 0.2, 1000);
  const auto ps = weyl_partial_sums(s, 300);
  REQUIRE(ps.size() == 4);
  CHECK(ps.back().first == 1000);
  CHECK(std::abs(ps.back().second - weyl_sum(s)) < 1e-12);
  for (const auto& [j, v] : ps) {
    CHECK(std::abs(v - brute_weyl(s.label, s.ssp, s.y, s.z, j)) < 1e-8);
    CHECK(std::abs(v - weyl_sum(WeylSumSpec{s.label, s.K, s.ssp, s.y, s.z, j})) < 1e-12);
  }
}

TEST_CASE("mean square over y equals J") {
  const Frame a = golden_frame();
  const SkewShiftParams ssp = return_params(a);
  for (std::int64_t J : {10, 100, 1000}) {
    const CharLabel l{0, 1};
    const std::int64_t Q = default_l2_grid(l, 1, J);
    CHECK(Q > 4 * J);
    const L2OverY r = weyl_sum_l2_over_y(l, 1, ssp, 0.37, J, Q);
    CHECK(r.l2 == doctest::Approx(static_cast<double>(J)).epsilon(1e-12));
    // only k = 0 carries zero y-frequency
    CHECK(std::abs(r.mean - eval_character(l, 1, 0.0, 0.37)) < 1e-12);
  }
  // a label whose zero y-frequency is reached at k = 3
  {
    SkewShiftParams s2 = ssp;
    s2.y_sign = -1;
    const CharLabel l{3, 1};
    const L2OverY r = weyl_sum_l2_over_y(l, 1, s2, 0.1, 10, 64);
    cplx direct = 0.0;
    for (int q = 0; q < 64; ++q) direct += brute_weyl(l, s2, q / 64.0, 0.1, 10);
    CHECK(std::abs(r.mean - direct / 64.0) < 1e-12);
    CHECK(std::abs(r.mean) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(weyl_sum_l2_over_y({0, 1}, 1, ssp, 0.0, 100, 128), GridTooCoarse);
}

TEST_CASE("ergodic integral against direct quadrature") {
  const Frame frames[] = {golden_frame(), Frame::make(-1.4, 0.5, 0.3, -(1 + 0.15) / 1.4, 0.2, 0.0, 2)};
  CounterRng r(41, 0);
  for (const Frame& a : frames) {
    const Observable f = lift_R_chi(LadderFunction{{1, 1}, {{0, 1.0}, {1, cplx(0.3, -0.2)}}}, a);
    for (int i = 0; i < 5; ++i) {
      const GroupElement x{r.uniform(), r.uniform(), r.uniform() / a.lattice.K()};
      const double T = 3.7 + 10 * r.uniform();
      const ErgodicIntegral I = ergodic_integral(f, a, x, T);
      CHECK(std::abs(I.value - brute_integral(f, a, x, T, 4000)) < 1e-9);
    }
  }
}

TEST_CASE("ergodic integral is an additive cocycle") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{2, 1}, a);
  CounterRng r(42, 0);
  for (int i = 0; i < 100; ++i) {
    const GroupElement x{r.uniform(), r.uniform(), r.uniform()};
    const double s = 500 * r.uniform(), t = 500 * r.uniform();
    const cplx whole = ergodic_integral(f, a, x, s + t).value;
    const cplx parts = ergodic_integral(f, a, x, s).value + ergodic_integral(f, a, nilflow::nilflow(a, x, s), t).value;
    CHECK(std::abs(whole - parts) < 1e-10);
  }
}

TEST_CASE("central equivariance and the Y-twist identity") {
  const Frame a = golden_frame();
  const GroupElement x{0.3, 0.6, 0.2};
  CHECK(z_equivariance_check({1, 1}, a, x, 250.0, 0.3) < 1e-10);
  CHECK(z_equivariance_check({0, -2}, a, x, 250.0, 0.77) < 1e-10);
  const YTwistResult y0 = ytwist_residual({0, 1}, a, x, 100.0, 0.0);
  CHECK(y0.residual == 0.0);
  // the identity is exact for the twisted orbit up to the O(t_y) displacement of the bump window
  const YTwistResult y1 = ytwist_residual({0, 1}, a, x, 100.0, 1e-7);
  CHECK(y1.residual < 1e-4);
}

TEST_CASE("trajectory moments") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const GroupElement x{0.1, 0.2, 0.3};
  const double T = 9.0;
  const TrajectoryMoments tm = trajectory_moments(f, a, x, T, 0.0, 2);
  CHECK(std::abs(tm.I_T - ergodic_integral(f, a, x, T).value) < 1e-12);
  // M_0 = int_0^T I_s ds and M_1 = int_0^T (s/T) I_s ds by a fine grid
  cplx m0 = 0.0, m1 = 0.0;
  const int n = 3000;
  const GaussRule& g = gauss_legendre(6);
  for (int p = 0; p < n; ++p)
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      const double s = (p + g.nodes[i]) * T / n;
      const cplx I = ergodic_integral(f, a, x, s).value;
      m0 += g.weights[i] * (T / n) * I;
      m1 += g.weights[i] * (T / n) * (s / T) * I;
    }
  CHECK(std::abs(tm.moments[0] - m0) < 1e-8);
  CHECK(std::abs(tm.moments[1] - m1) < 1e-8);
  CHECK(tm.sup_abs_I > 0.0);
  CHECK_THROWS_AS(trajectory_moments(f, a, x, 1e4, cplx(0, 1), 1), DomainExceeded);
}

TEST_CASE("renormalized estimator scales covariantly") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const GroupElement x{0.1, 0.2, 0.3};
  const BufetovEstimate b = bufetov_estimate(f, a, x, 1.0, 1e3);
  CHECK(b.T == doctest::Approx(1e3));
  CHECK(std::isfinite(std::abs(b.value)));
  CHECK(b.error_budget > 0.0);
  const double rel = scaling_check(f, a, x, 1.0, 4.0, 1e3) / std::abs(b.value);
  CHECK(rel < 1e-10);
}

TEST_CASE("sampling modes land in the fundamental domain") {
  const Frame a = golden_frame(3);
  for (Sampling m : {Sampling::Volume, Sampling::Transverse, Sampling::TransverseGrid}) {
    for (int i = 0; i < 1000; ++i) {
      const GroupElement p = sample_point(m, 9, i, 1000, a);
      CHECK_UNARY(p.x >= 0.0);
      CHECK_UNARY(p.x < 1.0);
      CHECK_UNARY(p.y >= 0.0);
      CHECK_UNARY(p.y < 1.0);
      CHECK_UNARY(p.z >= 0.0);
      CHECK_UNARY(p.z < 1.0 / 3);
      if (m != Sampling::Volume) CHECK(p.x == 0.0);
    }
  }
  CHECK(sample_point(Sampling::TransverseGrid, 9, 250, 1000, a).y == 0.25);
  const Observable f = lift_R_chi(CharLabel{0, 1}, golden_frame());
  const auto h = holder_ratio_scan(f, golden_frame(), 64, {10.0, 100.0}, 5);
  CHECK(h.size() == 2);
  CHECK(h[0] > 0.0);
}
