#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "nilflow/analysis.hpp"
#include "nilflow/error.hpp"

using namespace nilflow;

TEST_CASE("ECDF") {
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back((i * 37) % 200);
  const Ecdf e = Ecdf::from(v, 4);
  CHECK(e.N == 200);
  CHECK(std::is_sorted(e.values.begin(), e.values.end()));
  CHECK(e(-1) == 0.0);
  CHECK(e(99) == doctest::Approx(0.5));
  CHECK(e(1e9) == 1.0);
  CHECK(e.quantile(0.5) == doctest::Approx(99.5));
  CHECK(ks_distance(e, e) == 0.0);
  CHECK_THROWS_AS(Ecdf::from(std::vector<double>(99, 0.0), 1), ValidationError);
  std::ostringstream os;
  write_ecdf_csv(os, e);
  CHECK(os.str().find('\n') != std::string::npos);
}

TEST_CASE("empirical distribution of normalized integrals") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const EmpiricalDistribution d = empirical_distribution(f, a, 100.0, 400, 8);
  CHECK(d.modulus.N == 400);
  CHECK(d.modulus.values.front() >= 0.0);
  // direct recomputation of one sample and of the second moment
  double m2 = 0.0;
  std::vector<double> mods;
  for (int i = 0; i < 400; ++i) {
    const GroupElement x = sample_point(Sampling::Volume, 8, i, 400, a);
    const double m = std::abs(ergodic_integral(f, a, x, 100.0).value) / 10.0;
    m2 += m * m / 400;
    mods.push_back(m);
  }
  std::sort(mods.begin(), mods.end());
  CHECK(d.second_moment == doctest::Approx(m2).epsilon(1e-12));
  for (size_t i = 0; i < mods.size(); ++i) CHECK(d.modulus.values[i] == doctest::Approx(mods[i]).epsilon(1e-13));
  const EmpiricalDistribution d2 = empirical_distribution(f, a, 100.0, 400, 8);
  CHECK(d2.real.values == d.real.values);
  const auto track = second_moment_track(f, a, {100.0}, 400, 8);
  REQUIRE(track.size() == 1);
  CHECK(track[0].m2 == doctest::Approx(m2).epsilon(1e-12));
  CHECK(track[0].stderr_m2 > 0.0);
}

TEST_CASE("sublevel measures") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const std::vector<double> eps{0.02, 0.05, 0.1, 0.2, 0.4};
  CHECK_THROWS_AS(sublevel_measure(f, a, 100.0, eps, 9999, 1), ValidationError);
  CHECK_THROWS_AS(sublevel_measure(f, a, 100.0, {0.2, 0.1}, 10000, 1), ValidationError);
  const SublevelReport r = sublevel_measure(f, a, 100.0, eps, 10000, 1);
  CHECK(r.threshold_scale == doctest::Approx(10.0));
  for (size_t k = 0; k < eps.size(); ++k) {
    CHECK(r.ci[k].lo <= r.measure[k]);
    CHECK(r.ci[k].hi >= r.measure[k]);
    if (k) CHECK(r.measure[k] >= r.measure[k - 1]);
  }
  CHECK(r.delta_hat > 0.0);
  SublevelOptions g;
  g.regime = Regime::Generic;
  const SublevelReport rg = sublevel_measure(f, a, 100.0, eps, 10000, 1, g);
  CHECK(rg.threshold_scale == doctest::Approx(10.0 / std::pow(std::log(100.0), 0.35)));
  CHECK(std::string(regime_name(Regime::Generic)) == "generic");
  std::ostringstream os;
  write_sublevel_csv(os, r);
  CHECK(os.str().rfind("epsilon,measure", 0) == 0);
}

TEST_CASE("complex extension is holomorphic in y") {
  const Frame a = golden_frame();
  const GroupElement x{0.2, 0.4, 0.1};
  const CharLabel l{0, 1};
  const double T = 50.0, y0 = 0.003, h = 1e-6;
  const cplx f0 = complex_extension_eval(l, a, x, T, y0, 0.0);
  const cplx fp = complex_extension_eval(l, a, x, T, y0 + h, 0.0);
  const cplx fm = complex_extension_eval(l, a, x, T, y0 - h, 0.0);
  const cplx fi = complex_extension_eval(l, a, x, T, cplx(y0, h), 0.0);
  // f(y0 + i h) = f(y0) + i h f'(y0) + O(h^2)
  const cplx deriv = (fp - fm) / (2 * h);
  CHECK(std::abs(fi - (f0 + cplx(0, h) * deriv)) < 1e-3 * std::abs(deriv) * h);
  // z enters through the central character only
  const cplx fz = complex_extension_eval(l, a, x, T, y0, cplx(0.1, 0.02));
  CHECK(std::abs(fz - f0 * std::exp(cplx(0, kTwoPi) * cplx(0.1, 0.02))) < 1e-12 * std::abs(fz));
  CHECK_THROWS_AS(complex_extension_eval(l, a, x, T, 0.0, cplx(0, 100)), DomainExceeded);
  // y = 0 is the plain ergodic integral
  CHECK(complex_extension_eval(l, a, x, T, 0.0, 0.0) == ergodic_integral(lift_R_chi(l, a), a, x, T).value);
}

TEST_CASE("leaf function agrees with direct evaluation") {
  const Frame a = golden_frame();
  const GroupElement x{0.2, 0.4, 0.1};
  const CharLabel l{0, 1};
  const double T = 200.0;
  const LeafFunction leaf(l, a, x, T, 0.05, 0.0);
  for (const cplx w : {cplx(0.3, 0.0), cplx(-0.2, 0.4), cplx(0.0, -0.7)}) {
    const cplx direct = complex_extension_eval(l, a, x, T, w * leaf.y_scale(), 0.05);
    CHECK(std::abs(leaf(w) - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("Remez inequality on monomials") {
  for (int J : {1, 3, 8}) {
    std::vector<double> v(4096);
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::pow((i + 0.5) / v.size(), J);
    const RemezResult r = remez_check(v, {{0.0, 0.5}}, J);
    CHECK(r.holds);
    CHECK(r.leb_omega == doctest::Approx(0.5));
    // sup_D / sup_omega = 2^J = 8^{J/3}
    CHECK(r.min_d == doctest::Approx(J / 3.0).epsilon(1e-3));
    CHECK_FALSE(remez_check(v, {{0.0, 0.5}}, J / 4.0).holds);
  }
  CHECK(empirical_chebyshev_degree(std::vector<double>(2048, 1.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(remez_check(std::vector<double>(10, 1.0), {{0.0, 0.5}}, 1.0), ValidationError);
}

TEST_CASE("valency of monomials and analyticity guard") {
  CHECK(valency_constant(10, 1) == doctest::Approx(1 / std::log(4.5)));
  CHECK_THROWS_AS(valency_constant(3, 1), ValidationError);
  for (int k = 1; k <= 6; ++k) {
    const ValencyReport r = valency_bound([k](cplx z) { return std::pow(z, k); }, 10.0, 1.0);
    CHECK(r.observed == k);
    CHECK(r.bound >= k);
    CHECK(r.M == doctest::Approx(std::pow(10.0, k)).epsilon(1e-12));
    CHECK(r.O == doctest::Approx(2.0).epsilon(1e-3));
  }
  const ValencyReport c = valency_bound([](cplx) { return cplx(2.0); }, 10.0, 1.0);
  CHECK(c.bound == 0.0);
  CHECK(c.observed == 0);
  CHECK_THROWS_AS(valency_bound([](cplx z) { return 1.0 / ((z - 9.0905) * (z - 9.0905)); }, 9.0, 1.0), NonAnalytic);
}
