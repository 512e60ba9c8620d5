#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nilflow/heis.hpp"
#include "nilflow/numeric.hpp"
#include "nilflow/spectral.hpp"

namespace nilflow {

struct WeylSumSpec {
  CharLabel label;
  int K = 1;
  SkewShiftParams ssp;
  double y = 0.0;
  double z = 0.0;
  std::int64_t J = 0;
};

inline constexpr std::int64_t kWeylChunk = 512;

// Phases of e_{m,n}(T^k(y,z)) = e(phi0 + k psi0 + C(k,2) c) as exact 128-bit
// fixed-point integers. Inside a chunk the same quantities are advanced by
// the second-order recurrence in 64-bit arithmetic; integer wraparound is
// the reduction mod 1.
class WeylKernel {
 public:
  WeylKernel(const CharLabel& label, const SkewShiftParams& ssp, double y, double z);
  u128 phase_at(std::int64_t k) const;
  cplx term(std::int64_t k) const { return cis(phase_hi(phase_at(k))); }
  // sum over one chunk [k0, k0 + len), len <= kWeylChunk
  cplx chunk_sum(std::int64_t k0, std::int64_t len) const;
  // sum over [begin, end) as a fixed-order tree of chunk sums; chunk
  // boundaries are multiples of kWeylChunk counted from `begin`
  cplx sum(std::int64_t begin, std::int64_t end, bool parallel = true) const;

 private:
  u128 phi0_, psi0_, c_;
};

cplx weyl_sum(const WeylSumSpec& spec);
cplx weyl_sum_serial(const WeylSumSpec& spec);
// Slow reference: each phase evaluated in closed form at 113-bit precision.
cplx weyl_sum_direct(const WeylSumSpec& spec);
// Partial sums S_j for j = stride, 2 stride, ..., J (and J itself).
std::vector<std::pair<std::int64_t, cplx>> weyl_partial_sums(const WeylSumSpec& spec,
                                                             std::int64_t stride);

struct L2OverY {
  double l2 = 0.0;   // (1/Q) sum_q |S_J(q/Q, z)|^2
  cplx mean = 0.0;   // (1/Q) sum_q S_J(q/Q, z)
  std::int64_t Q = 0;
};
L2OverY weyl_sum_l2_over_y(const CharLabel& label, int K, const SkewShiftParams& ssp, double z,
                           std::int64_t J, std::int64_t Q);
// Smallest power of two above 4 K |n| J.
std::int64_t default_l2_grid(const CharLabel& label, int K, std::int64_t J);

struct ErgodicIntegral {
  cplx value = 0.0;
  double T = 0.0;
  Frame frame;
  GroupElement x;
  std::int64_t complete_returns = 0;
};

ErgodicIntegral ergodic_integral(const Observable& f, const Frame& a, const GroupElement& x,
                                 double T);

// Moments of the partial-integral trajectory s -> I_s(f)(x):
//   M_k = int_0^T (s/T)^k e^{-i kappa s} I_s ds,  k < n_moments,
// with Gauss-Legendre nodes inside every return interval (I_s is smooth
// there). kappa may be complex.
struct TrajectoryMoments {
  cplx I_T = 0.0;
  double sup_abs_I = 0.0;
  std::vector<cplx> moments;
};
struct TrajectoryQuadrature {
  int panels_per_return = 8;
  int gauss_order = 8;
};
TrajectoryMoments trajectory_moments(const Observable& f, const Frame& a, const GroupElement& x,
                                     double T, cplx kappa, int n_moments,
                                     TrajectoryQuadrature quad = {});

struct BufetovEstimate {
  cplx value = 0.0;
  double T = 0.0;      // T_ref * t, the flow time actually integrated
  double t = 0.0;
  double log_T_ref = 0.0;
  double error_budget = 0.0;
};

struct BufetovOptions {
  double budget_constant = 1.0;  // calibrated C in C (1 + L) |f|_{a,s}
  double sobolev_index = 4.0;
  double dc_horizon = 32.0;
  std::optional<double> dc_value;  // reuse a precomputed L
};

double bufetov_error_budget(const Observable& f, const Frame& a, const BufetovOptions& opt = {});

// beta(a, x, t) ~ T_ref^{-1/2} I_{T_ref t}(t_b^{1/2} R^chi_b(F); b, x) with
// b = g_{-log T_ref}(a). The factor t_b^{1/2} is the covariant
// normalization of the lift under renormalization.
BufetovEstimate bufetov_estimate(const Observable& f, const Frame& a, const GroupElement& x,
                                 double t, double T_ref, const BufetovOptions& opt = {});

// |beta(a,x,Tt) - T^{1/2} beta(g_{log T} a, x, t)| at matched total depth.
double scaling_check(const Observable& f, const Frame& a, const GroupElement& x, double t,
                     double T, double T_ref);

double z_equivariance_check(const CharLabel& label, const Frame& a, const GroupElement& x,
                            double T, double t_z);

struct YTwistResult {
  cplx lhs = 0.0;
  cplx rhs = 0.0;
  double residual = 0.0;
};
YTwistResult ytwist_residual(const CharLabel& label, const Frame& a, const GroupElement& x,
                             double T, double t_y, TrajectoryQuadrature quad = {});

enum class Sampling {
  Volume,          // uniform on the fundamental domain of M
  Transverse,      // uniform on the transverse torus
  TransverseGrid,  // transverse torus, y on the grid i/N, z uniform
};

GroupElement sample_point(Sampling mode, std::uint64_t seed, std::int64_t i, std::int64_t N,
                          const Frame& a);

std::vector<double> holder_ratio_scan(const Observable& f, const Frame& a, std::int64_t N,
                                      const std::vector<double>& T_grid, std::uint64_t seed,
                                      Sampling mode = Sampling::TransverseGrid);

}  // namespace nilflow
