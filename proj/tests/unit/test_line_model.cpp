#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nilflow/error.hpp"
#include "nilflow/line_model.hpp"

using namespace nilflow;

namespace {

cplx gauss(double u) { return std::exp(-2 * u * u); }

}  // namespace

TEST_CASE("grid geometry") {
  const LineGrid g = LineGrid::make(1 << 10, 16.0);
  CHECK(g.spacing() == doctest::Approx(1.0 / 32));
  CHECK(g.node(0) == -16.0);
  CHECK(g.node(512) == doctest::Approx(0.0));
  CHECK(g.freq(1) == doctest::Approx(kPi / 16));
  CHECK(g.freq(1023) == doctest::Approx(-kPi / 16));
  CHECK_THROWS_AS(LineGrid::make(1000, 16.0), ValidationError);
  CHECK_THROWS_AS(LineGrid::make(128, 16.0), ValidationError);
}

TEST_CASE("unitary transform of a Gaussian") {
  // f = exp(-2u^2)  ->  f^(w) = (1/2) exp(-w^2/8)
  const LineGrid g = LineGrid::make(1 << 12, 32.0);
  const LineFunction f = LineFunction::sample(g, gauss);
  const auto F = line_fourier(f);
  for (std::int64_t k : {0, 1, 17, 100, 4000}) {
    const double w = g.freq(k);
    CHECK(std::abs(F[k] - cplx(0.5 * std::exp(-w * w / 8))) < 1e-13);
  }
  CHECK(f.l2_norm() == doctest::Approx(std::pow(kPi / 4, 0.25)).epsilon(1e-13));
  CHECK(std::abs(f.lebesgue() - cplx(std::sqrt(kPi / 2))) < 1e-13);
  CHECK(fourier_roundtrip_error(f) < 1e-14);
  // shift by 3: f^ picks up exp(-3 i w)
  const LineFunction fs = LineFunction::sample(g, [](double u) { return gauss(u - 3); });
  const auto Fs = line_fourier(fs);
  for (std::int64_t k : {1, 5, 40}) CHECK(std::abs(Fs[k] - std::polar(1.0, -3 * g.freq(k)) * F[k]) < 1e-13);
  CHECK(f.edge_ratio(4.0) < 1e-100);
}

TEST_CASE("kernel chi and its L2 constant") {
  CHECK(std::abs(chi(0.0) - cplx(1.0)) < 1e-16);
  for (double u : {1e-6, 1e-3, 0.5, 2.0, -7.0}) {
    const cplx ref = (std::polar(1.0, u) - 1.0) / cplx(0.0, u);
    CHECK(std::abs(chi(u) - ref) < 1e-9 * std::max(1.0, 1e-6 / std::fabs(u)));
  }
  CHECK(std::abs(chi(5e-5) - cplx(1.0 - 5e-5 * 5e-5 / 6, 5e-5 / 2 - 5e-5 * 5e-5 * 5e-5 / 24)) < 1e-15);
  // int |chi|^2 = int 4 sin^2(u/2)/u^2 = 2 pi
  CHECK(c_constant() == doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));
  CHECK(std::abs(theta_hat_scaled(4.0, 0.25) - 2.0 * chi(1.0)) < 1e-15);
}

TEST_CASE("residual decays like T^{-1/2} for a smooth start") {
  const LineGrid g = LineGrid::make(1 << 16, 256.0);
  const LineFunction f = LineFunction::sample(g, gauss);
  double prev = l2_convergence_residual(f, 8.0);
  for (double T : {16.0, 32.0, 64.0}) {
    const double r = l2_convergence_residual(f, T);
    CHECK(r / prev == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
    prev = r;
  }
  CHECK_THROWS_AS(l2_convergence_residual(f, 100.0), GridOverflow);
  std::ostringstream os;
  write_convergence_csv(os, {{1.0, 0.5}});
  CHECK(os.str().rfind("T,", 0) == 0);
}

TEST_CASE("dilation is unitary and intertwines the Lebesgue functional") {
  const LineGrid g = LineGrid::make(1 << 14, 64.0);
  const LineFunction f = LineFunction::sample(g, gauss);
  for (double t : {-1.0, -0.3, 0.4, 1.5}) CHECK(intertwine_check(f, t) < 1e-10);
  const LineFunction u = apply_U(apply_U(f, 0.7), -0.7);
  double err = 0;
  for (size_t j = 0; j < f.samples.size(); ++j) err = std::max(err, std::abs(u.samples[j] - f.samples[j]));
  CHECK(err < 1e-10);
  const LineFunction wide = LineFunction::sample(g, [](double x) { return std::exp(-x * x / 400); });
  CHECK_THROWS_AS(apply_U(wide, -3.0), GridOverflow);
}
