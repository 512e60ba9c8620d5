#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nilflow/birkhoff.hpp"
#include "nilflow/stats.hpp"

namespace nilflow {

// alpha = 1 + eps Re p for a finite character combination p = R^chi_a(P).
// Along the X-orbit, inside return k, alpha = 1 + A_k chi(u) with
// A_k = eps Re P(xi_k) / t_a; full returns are handled through the tables
//   G(A) = int_0^1 du / (1 + A chi),  H(A) = int_0^1 chi du / (1 + A chi)^2.
class TimeChange {
 public:
  TimeChange(Observable p, double eps, const Frame& a);

  const Observable& base() const { return p_; }
  double eps() const { return eps_; }
  const Frame& frame() const { return a_; }
  bool trivial() const { return trivial_; }

  double alpha(const GroupElement& x) const;
  double z_alpha(const GroupElement& x) const;
  // certified bounds: 64^3 grid extremes widened by the gradient margin
  double alpha_min() const { return alpha_min_; }
  double alpha_max() const { return alpha_max_; }

  double A_of(cplx P) const { return eps_ * P.real() / ta_; }
  double G(double A) const { return G_(A); }
  double H(double A) const { return H_(A); }
  double t_return() const { return ta_; }

 private:
  Observable p_, zp_;
  double eps_;
  Frame a_;
  double ta_ = 1.0;
  bool trivial_ = false;
  double alpha_min_ = 1.0, alpha_max_ = 1.0;
  Chebyshev G_, H_;
};

// Walks the V-orbit of x forward; queries must come with nondecreasing t.
class VTrajectory {
 public:
  VTrajectory(const TimeChange& alpha, const GroupElement& x);

  struct State {
    GroupElement point;
    double s = 0.0;  // X-time with phi^V_t(x) = phi^X_s(x)
    double D = 0.0;  // int_0^s (Z alpha / alpha^2)(phi^X_r x) dr
  };
  State at(double t);

 private:
  void load_return();
  double partial_tau(double u0, double u1) const;
  double partial_D(double u0, double u1) const;

  const TimeChange& al_;
  GroupElement x_;
  SkewShiftParams ssp_;
  TransverseSplit split_;
  std::vector<std::pair<cplx, WeylKernel>> kernels_;
  std::int64_t k_ = 0;
  double u_start_ = 0.0;
  double A_ = 0.0, ReQ_ = 0.0;
  Neumaier tau_done_, D_done_;
  double last_t_ = 0.0;
};

GroupElement flow_V(const TimeChange& alpha, const GroupElement& x, double t);
// X-time s with phi^V_t(x) = phi^X_s(x).
double v_to_x_time(const TimeChange& alpha, const GroupElement& x, double t);
// tau_V(x, s) = int_0^s 1/alpha(phi^X_r x) dr.
double x_to_v_time(const TimeChange& alpha, const GroupElement& x, double s);
double stretch_D(const TimeChange& alpha, const GroupElement& x, double t);

// (component label, obstruction value) for every component in the support.
std::vector<std::pair<CharLabel, cplx>> coboundary_obstructions(const Observable& f,
                                                                const SkewShiftParams& ssp);

struct CorrelationValue {
  cplx value = 0.0;
  double stderr_value = 0.0;
};

struct CorrelationSeries {
  std::vector<double> t;
  std::vector<cplx> values;
  std::vector<double> stderr_values;
  std::int64_t N = 0;
  std::uint64_t seed = 0;
  std::string h_id, g_id;
};

// Self-normalized estimate of <h o phi^V_t, g> in L^2(omega_V) with the
// omega_V means of h and g removed.
CorrelationValue correlation(const Observable& h, const Observable& g, const TimeChange& alpha,
                             double t, std::int64_t N, std::uint64_t seed);
CorrelationSeries correlation_series(const Observable& h, const Observable& g,
                                     const TimeChange& alpha, const std::vector<double>& t_grid,
                                     std::int64_t N, std::uint64_t seed);
void write_correlation_csv(std::ostream& os, const CorrelationSeries& s);

struct DecayFit {
  double delta_hat = 0.0;  // minus the Theil-Sen slope of log|corr| against log t
  Interval delta_ci;
  double slope = 0.0;
  Interval slope_ci;
  double power_delta = 0.0, power_residual = 0.0;  // t^{-delta}
  double log_delta = 0.0, log_residual = 0.0;      // t^{-1/(1 + log^delta t)}
  int points = 0;
};
DecayFit decay_fit(const CorrelationSeries& s, std::uint64_t seed = 1, int resamples = 2000);

struct StretchPoint {
  double t = 0.0;
  double max_ratio = 0.0;  // max_x |D_t(x)| / t^{1/2}
  double rms_ratio = 0.0;
};
std::vector<StretchPoint> stretch_band(const TimeChange& alpha, const std::vector<double>& t_grid,
                                       std::int64_t N, std::uint64_t seed);

}  // namespace nilflow
