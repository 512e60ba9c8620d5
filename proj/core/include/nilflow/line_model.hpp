#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "nilflow/numeric.hpp"

namespace nilflow {

// N samples u_j = -W + j h, h = 2W/N. Frequencies w_k = k pi / W in FFT
// order (k >= N/2 stands for k - N).
struct LineGrid {
  std::int64_t N = 1 << 12;
  double W = 32.0;

  static LineGrid make(std::int64_t N, double W);
  double spacing() const { return 2.0 * W / static_cast<double>(N); }
  double node(std::int64_t j) const { return -W + static_cast<double>(j) * spacing(); }
  double freq_spacing() const { return kPi / W; }
  double freq(std::int64_t k) const;
};

struct LineFunction {
  LineGrid grid;
  std::vector<cplx> samples;

  static LineFunction sample(const LineGrid& grid, const std::function<cplx(double)>& f);
  double l2_norm() const;
  cplx lebesgue() const;  // int f du
  // Largest sample magnitude within `band` of either edge, relative to the
  // global maximum (0 for f = 0).
  double edge_ratio(double band) const;
};

// Unitary transform f^(w) = (2 pi)^{-1/2} int f(u) e^{-i u w} du on the
// frequency grid, FFT order.
std::vector<cplx> line_fourier(const LineFunction& f);
LineFunction line_inverse_fourier(const LineGrid& grid, const std::vector<cplx>& spectrum);
double fourier_roundtrip_error(const LineFunction& f);

// (e^{iu} - 1)/(iu).
cplx chi(double u);
// sqrt(int |chi|^2) with the integral truncated to [-L, L] and the tail
// replaced by 4/L; L is rounded to a multiple of 2 pi.
double c_constant(double L = kTwoPi * 4096.0);
cplx theta_hat_scaled(double T, double u);

double l2_convergence_residual(const LineFunction& f, double T);

// (U_t f)(u) = e^{t/2} f(e^t u), sampled by local Lagrange interpolation.
LineFunction apply_U(const LineFunction& f, double t);
// max(| ||U_t f|| - ||f|| |, |Leb(U_t f) - e^{-t/2} Leb(f)|)
double intertwine_check(const LineFunction& f, double t);

void write_convergence_csv(std::ostream& os, const std::vector<std::pair<double, double>>& rows);

}  // namespace nilflow
