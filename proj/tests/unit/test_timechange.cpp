#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nilflow/error.hpp"
#include "nilflow/rng.hpp"
#include "nilflow/timechange.hpp"

using namespace nilflow;

namespace {

// composite Gauss-Legendre of g(phi^X_r x) over [0, s]
double brute_along(const Frame& a, const GroupElement& x, double s, const std::function<double(const GroupElement&)>& g) {
  const GaussRule& q = gauss_legendre(10);
  const int panels = std::max(1, static_cast<int>(s * 200));
  const double h = s / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p)
    for (size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * h * g(nilflow::nilflow(a, x, (p + q.nodes[i]) * h));
  return acc;
}

bool near_mod(const GroupElement& a, const GroupElement& b, double tol) {
  auto cd = [](double u, double v) {
    const double d = std::fmod(std::fabs(u - v), 1.0);
    return std::min(d, 1.0 - d);
  };
  return cd(a.x, b.x) < tol && cd(a.y, b.y) < tol && cd(a.z, b.z) < tol;
}

Observable base_p(const Frame& a) {
  return lift_R_chi(LadderFunction{{0, 1}, {{0, 1.0}, {1, cplx(0.2, 0.1)}}}, a);
}

}  // namespace

TEST_CASE("alpha is the affine function of the base observable") {
  const Frame a = golden_frame();
  const TimeChange al(base_p(a), 0.2, a);
  CHECK_FALSE(al.trivial());
  CHECK(al.alpha_min() > 0.0);
  CHECK(al.alpha_max() > 1.0);
  CounterRng r(61, 0);
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (int i = 0; i < 20000; ++i) {
    const GroupElement x{r.uniform(), r.uniform(), r.uniform()};
    const double v = al.alpha(x);
    CHECK(v == doctest::Approx(1.0 + 0.2 * base_p(a).evaluate(a, x).real()));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // certified bounds enclose every sampled value
  CHECK(al.alpha_min() <= lo);
  CHECK(al.alpha_max() >= hi);
  CHECK_THROWS_AS(TimeChange(base_p(a), 50.0, a), NonPositiveAlpha);
  const TimeChange triv(base_p(a), 0.0, a);
  CHECK(triv.trivial());
  const GroupElement x{0.3, 0.2, 0.1};
  CHECK(flow_V(triv, x, 7.5).x == nilflow::nilflow(a, x, 7.5).x);
}

TEST_CASE("return-time tables") {
  const Frame a = golden_frame();
  const TimeChange al(base_p(a), 0.2, a);
  const BumpProfile& B = *default_bump();
  for (double A : {-0.1, 0.0, 0.05, 0.12}) {
    const double G = adaptive_simpson([&](double u) { return 1.0 / (1.0 + A * B.density(u)); }, 0, 1, 1e-14);
    const double H = adaptive_simpson([&](double u) {
      const double c = B.density(u);
      return c / ((1 + A * c) * (1 + A * c));
    }, 0, 1, 1e-14);
    CHECK(al.G(A) == doctest::Approx(G).epsilon(1e-12));
    CHECK(al.H(A) == doctest::Approx(H).epsilon(1e-12));
  }
}

TEST_CASE("time conversions against direct quadrature") {
  const Frame frames[] = {golden_frame(), Frame::make(-1.4, 0.5, 0.3, -(1 + 0.15) / 1.4, 0.2, 0.0, 2)};
  CounterRng r(62, 0);
  for (const Frame& a : frames) {
    const TimeChange al(base_p(a), 0.1, a);
    for (int i = 0; i < 4; ++i) {
      const GroupElement x{r.uniform(), r.uniform(), r.uniform() / a.lattice.K()};
      const double s = 2 + 10 * r.uniform();
      const double tau = x_to_v_time(al, x, s);
      CHECK(tau == doctest::Approx(brute_along(a, x, s, [&](const GroupElement& p) { return 1.0 / al.alpha(p); })).epsilon(1e-10));
      CHECK(v_to_x_time(al, x, tau) == doctest::Approx(s).epsilon(1e-10));
      const double D = brute_along(a, x, s, [&](const GroupElement& p) {
        const double v = al.alpha(p);
        return al.z_alpha(p) / (v * v);
      });
      CHECK(std::fabs(stretch_D(al, x, tau) - D) < 1e-9);
    }
  }
}

TEST_CASE("V-flow is a flow") {
  const Frame a = golden_frame();
  const TimeChange al(base_p(a), 0.3, a);
  CounterRng r(63, 0);
  for (int i = 0; i < 30; ++i) {
    const GroupElement x{r.uniform(), r.uniform(), r.uniform()};
    const double s = 50 * r.uniform(), t = 50 * r.uniform();
    CHECK(near_mod(flow_V(al, flow_V(al, x, s), t), flow_V(al, x, s + t), 1e-9));
  }
  VTrajectory traj(al, GroupElement{0.1, 0.1, 0.1});
  traj.at(5.0);
  CHECK_THROWS_AS(traj.at(4.0), ValidationError);
  CHECK_THROWS_AS(flow_V(al, GroupElement{}, -1.0), ValidationError);
}

TEST_CASE("coboundary obstructions") {
  const Frame a = golden_frame(2);
  const SkewShiftParams ssp = return_params(a);
  LadderFunction G{{1, 1}, {{-1, cplx(0.4, 0.1)}, {0, 1.0}, {2, cplx(0, -0.3)}}};
  LadderFunction cob = pullback(G, ssp);
  for (const auto& [j, c] : G.coeffs) cob.coeffs[j] -= c;
  const Observable f = lift_R_chi(cob, a) + lift_R_chi(CharLabel{0, 3}, a);
  const auto obs = coboundary_obstructions(f, ssp);
  REQUIRE(obs.size() == 2);
  for (const auto& [label, v] : obs) {
    if (label == CharLabel{1, 1}) CHECK(std::abs(v) < 1e-13);
    else CHECK(std::abs(v) == doctest::Approx(1.0));
  }
}

TEST_CASE("correlations for the unperturbed flow") {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const TimeChange triv(f, 0.0, a);
  const BumpProfile& B = *default_bump();
  const double ta = return_params(a).t_return;
  // ||f||^2 = (1/t_a) int chi^2
  const double norm2 = adaptive_simpson([&](double u) { return B.density(u) * B.density(u); }, 0, 1, 1e-13) / ta;
  const CorrelationSeries s = correlation_series(f, f, triv, {0.0, 1.5 * ta, 4.0 * ta}, 20000, 3);
  CHECK(std::abs(s.values[0] - norm2) < 4 * s.stderr_values[0]);
  // distinct returns see orthogonal characters
  CHECK(std::abs(s.values[1]) < 4 * s.stderr_values[1] + 1e-3);
  CHECK(std::abs(s.values[2]) < 4 * s.stderr_values[2] + 1e-3);
  const CorrelationValue c0 = correlation(f, f, triv, 0.0, 20000, 3);
  CHECK(c0.value == s.values[0]);
  std::ostringstream os;
  write_correlation_csv(os, s);
  CHECK(os.str().rfind("t,re,im,stderr\n", 0) == 0);
}

TEST_CASE("decay fit recovers a synthetic power law") {
  CorrelationSeries s;
  for (int j = 0; j < 12; ++j) {
    const double t = std::pow(10.0, 0.25 * j);
    s.t.push_back(t);
    s.values.push_back(std::pow(t, -0.7) * (1 + 0.01 * ((j * 7) % 3 - 1)));
    s.stderr_values.push_back(1e-6);
  }
  const DecayFit f = decay_fit(s, 5, 500);
  CHECK(f.points == 12);
  CHECK(f.delta_hat == doctest::Approx(0.7).epsilon(0.02));
  CHECK(f.delta_ci.lo <= f.delta_hat);
  CHECK(f.delta_ci.hi >= f.delta_hat);
  CHECK(f.power_residual < f.log_residual);
  for (auto& e : s.stderr_values) e = 1.0;
  CHECK_THROWS_AS(decay_fit(s), InsufficientSignal);
}

TEST_CASE("stretch band") {
  const Frame a = golden_frame();
  const TimeChange al(lift_R_chi(CharLabel{0, 1}, a), 0.25, a);
  const auto band = stretch_band(al, {10.0, 100.0}, 32, 4);
  REQUIRE(band.size() == 2);
  for (const auto& p : band) {
    CHECK(p.max_ratio >= p.rms_ratio);
    CHECK(p.rms_ratio > 0.0);
  }
  CHECK_THROWS_AS(stretch_band(al, {100.0, 10.0}, 4, 1), ValidationError);
}
