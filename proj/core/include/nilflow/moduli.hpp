#pragma once

#include <ostream>
#include <vector>

#include "nilflow/heis.hpp"

namespace nilflow {

struct ModularPoint {
  double re = 0.0;
  double im = 1.0;
};

// g_t: (a,b,v) scaled by e^t, (c,d,w) by e^{-t}.
Frame renorm(const Frame& a, double t);

// z(a) = (a i + c)/(b i + d). Right multiplication of the frame matrix by
// gamma in SL(2,Z) acts on z by the Moebius map of gamma^T, so the point is
// well defined on the modular surface; g_t moves it along the geodesic from
// c/d to a/b.
ModularPoint to_modular_point(const Frame& a);
ModularPoint reduce_fundamental(const ModularPoint& z);
double hyp_dist(const ModularPoint& z, const ModularPoint& w);
double delta_M(const Frame& a);
// delta_M(renorm(a, t)) evaluated at 113-bit precision from the original
// frame. The relative error grows like e^{2|t|} 2^{-113}, so |t| is capped
// at kWideHorizon (DomainExceeded beyond it).
inline constexpr double kWideHorizon = 36.0;
double delta_M_along(const Frame& a, double t);

struct ExcursionSample {
  double t;
  double delta;
  double integrand;
};

struct ExcursionRecord {
  Frame frame;
  double horizon = 0.0;
  double step = 0.0;
  std::vector<ExcursionSample> samples;  // (t, delta(g_{-t} a), integrand)
  double dc_value = 0.0;
  double e_value = 0.0;  // E_M(a, e^horizon)
};

inline constexpr double kDefaultExcursionStep = 1.0 / 64.0;

// Trapezoid approximation of int_0^horizon exp(delta(g_{-t} a)/4 - t/2) dt;
// horizon <= kWideHorizon.
ExcursionRecord dc_integral(const Frame& a, double horizon, double step = kDefaultExcursionStep);
// E_M(a,T) = int_0^{log T} exp(delta(g_{log T - t} a)/4 - t/2) dt.
double excursion_E(const Frame& a, double T, double step = kDefaultExcursionStep);

void write_excursion_csv(std::ostream& os, const ExcursionRecord& rec);

// Partial quotients a_1, a_2, ... of frac(rho). The input is treated as
// known to half an ulp; expansion stops once the remainder is no longer
// determined by the input (so 1/3 yields [3]).
std::vector<long> cf_partial_quotients(double rho, int k);
// Same, for the slope b/a of a frame at the frame's stored precision.
std::vector<long> cf_partial_quotients(const Frame& a, int k);
// Exact expansion of frac((P + sqrt(D))/Q) for non-square D > 0, Q != 0,
// Q | D - P^2.
std::vector<long> cf_quadratic_surd(long P, long D, long Q, int k);

struct DiophantineParams {
  double L = 0.0;
  double eta = 0.5;
  double zeta = 0.1;
  double s = 4.0;
  void validate() const;
};

}  // namespace nilflow
