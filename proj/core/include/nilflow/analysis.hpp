#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nilflow/birkhoff.hpp"
#include "nilflow/stats.hpp"

namespace nilflow {

struct Ecdf {
  std::vector<double> values;  // sorted
  std::int64_t N = 0;
  std::uint64_t seed = 0;

  static Ecdf from(std::vector<double> v, std::uint64_t seed);
  double operator()(double x) const;  // fraction of samples <= x
  double quantile(double p) const;
};

double ks_distance(const Ecdf& e1, const Ecdf& e2);
void write_ecdf_csv(std::ostream& os, const Ecdf& e);

struct EmpiricalDistribution {
  double T = 0.0;
  Ecdf real;     // Re E_T
  Ecdf modulus;  // |E_T|
  double second_moment = 0.0;
};

// E_T(x) = T^{-1/2} I_T(f)(x) at N sampled points.
EmpiricalDistribution empirical_distribution(const Observable& f, const Frame& a, double T,
                                             std::int64_t N, std::uint64_t seed,
                                             Sampling mode = Sampling::Volume);

struct MomentPoint {
  double T = 0.0;
  double m2 = 0.0;  // mean |E_T|^2
  double stderr_m2 = 0.0;
};
std::vector<MomentPoint> second_moment_track(const Observable& f, const Frame& a,
                                             const std::vector<double>& T_grid, std::int64_t N,
                                             std::uint64_t seed, Sampling mode = Sampling::Volume);

enum class Regime { Compact, Generic };
const char* regime_name(Regime r);

struct SublevelOptions {
  Regime regime = Regime::Compact;
  double zeta = 0.1;
  double C_zeta = 1.0;
  Sampling mode = Sampling::Volume;
};

struct SublevelReport {
  double T = 0.0;
  std::int64_t N = 0;
  std::uint64_t seed = 0;
  Regime regime = Regime::Compact;
  double threshold_scale = 0.0;  // |I_T| <= eps * threshold_scale
  std::vector<double> eps;
  std::vector<double> measure;
  std::vector<Interval> ci;
  std::vector<int> fitted;  // indices used by the fit
  double delta_hat = 0.0;
  Interval delta_ci;
  double r2 = 0.0;
  std::string fit_method;
  double budget = 0.0;  // |I_T - beta| budget, compared against eps T^{1/2}/10
};

SublevelReport sublevel_measure(const Observable& f, const Frame& a, double T,
                                const std::vector<double>& eps, std::int64_t N, std::uint64_t seed,
                                const SublevelOptions& opt = {});
void write_sublevel_csv(std::ostream& os, const SublevelReport& r);

// e^{2 pi i n K z} [e^{-i kappa T} I_T + i kappa int_0^T e^{-i kappa s} I_s ds],
// kappa = 2 pi n K y, for complex (y, z).
cplx complex_extension_eval(const CharLabel& label, const Frame& a, const GroupElement& x, double T,
                            cplx y, cplx z, TrajectoryQuadrature quad = {});

// w -> complex_extension_eval at y = y0 + w / (2 pi n K T), fixed z: the
// analyticity strip has unit width in w. Evaluated from a Taylor expansion
// in w of the trajectory integral.
class LeafFunction {
 public:
  LeafFunction(const CharLabel& label, const Frame& a, const GroupElement& x, double T, double z,
               double y0 = 0.0, int terms = 60);
  cplx operator()(cplx w) const;
  double y_scale() const { return s_w_; }

 private:
  double T_ = 0.0, s_w_ = 0.0, kappa0_ = 0.0;
  cplx prefactor_ = 1.0;
  cplx I_T_ = 0.0;
  std::vector<cplx> moments_;
};

struct RemezResult {
  bool holds = false;
  double margin = 0.0;  // rhs / lhs
  double min_d = 0.0;
  double sup_D = 0.0;
  double sup_omega = 0.0;
  double leb_D = 0.0;
  double leb_omega = 0.0;
};

// |f| sampled at the midpoints of equal cells of D = [lo, hi]; omega is a
// union of intervals. Checks sup_D |f| <= (4 Leb D / Leb omega)^d sup_omega |f|.
RemezResult remez_check(std::span<const double> abs_values, const std::vector<Interval>& omega,
                        double d, double lo = 0.0, double hi = 1.0);
// Largest min_d over sublevel sets {|f| <= level} of measure fractions
// 2%..50%.
double empirical_chebyshev_degree(std::span<const double> abs_values);

struct ValencyReport {
  double r = 0.0;
  double t = 0.0;
  double M = 0.0;  // max |f| on |zeta| = r
  double O = 0.0;  // diameter of f(B(0,t))
  double C = 0.0;
  double bound = 0.0;
  int observed = 0;      // max over probe levels of #zeros of f - w in |zeta| < t
  int sign_changes = 0;  // diagnostic: sign changes of Re(f - w) on [-t, t]
};

// 1 / log((r - t)/(2t)); needs r > 3t.
double valency_constant(double r, double t);
ValencyReport valency_bound(const std::function<cplx(cplx)>& fn, double r, double t,
                            int samples = 4096);

}  // namespace nilflow
