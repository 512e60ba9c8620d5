#include "nilflow/birkhoff.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>

#include "nilflow/error.hpp"
#include "nilflow/moduli.hpp"
#include "nilflow/rng.hpp"

namespace nilflow {

namespace {

constexpr std::int64_t kChunksPerTask = 256;

cplx local_chunk(std::uint64_t p, std::uint64_t psi, std::uint64_t c, std::int64_t n) {
  double sr[8] = {}, si[8] = {};
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) {
      const auto k = static_cast<std::uint64_t>(i + l);
      const std::uint64_t ph = p + k * psi + c * ((k * (k - 1)) >> 1);
      double re, im;
      cis_parts(ph, re, im);
      sr[l] += re;
      si[l] += im;
    }
  }
  for (; i < n; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    double re, im;
    cis_parts(p + k * psi + c * ((k * (k - 1)) >> 1), re, im);
    sr[i & 7] += re;
    si[i & 7] += im;
  }
  const double r = ((sr[0] + sr[1]) + (sr[2] + sr[3])) + ((sr[4] + sr[5]) + (sr[6] + sr[7]));
  const double m = ((si[0] + si[1]) + (si[2] + si[3])) + ((si[4] + si[5]) + (si[6] + si[7]));
  return {r, m};
}

}  // namespace

WeylKernel::WeylKernel(const CharLabel& label, const SkewShiftParams& ssp, double y, double z) {
  label.validate();
  const long Kn = static_cast<long>(ssp.K) * label.n;
  const u128 py = phase_of(y), pz = phase_of(z), prho = ssp.rho_phase(),
             psig = ssp.sigma_phase();
  phi0_ = phase_mul(py, label.m) + phase_mul(pz, Kn);
  psi0_ = phase_mul(prho, label.m) + phase_mul(phase_mul(py, ssp.y_sign) + psig, Kn);
  c_ = phase_mul(prho, ssp.y_sign * Kn);
}

u128 WeylKernel::phase_at(std::int64_t k) const {
  const auto kk = static_cast<u128>(k);
  return phi0_ + kk * psi0_ + ((kk * (kk - 1)) >> 1) * c_;
}

cplx WeylKernel::chunk_sum(std::int64_t k0, std::int64_t len) const {
  const u128 P = phase_at(k0);
  const u128 Psi = psi0_ + static_cast<u128>(k0) * c_;
  return local_chunk(phase_hi(P), phase_hi(Psi), phase_hi(c_), len);
}

cplx WeylKernel::sum(std::int64_t begin, std::int64_t end, bool parallel) const {
  if (end <= begin) return 0.0;
  const std::int64_t n = end - begin;
  const std::int64_t chunks = (n + kWeylChunk - 1) / kWeylChunk;
  std::vector<cplx> sums(chunks);
  auto run_task = [&](std::int64_t task) {
    const std::int64_t c0 = task * kChunksPerTask;
    const std::int64_t c1 = std::min(chunks, c0 + kChunksPerTask);
    for (std::int64_t c = c0; c < c1; ++c) {
      const std::int64_t k0 = begin + c * kWeylChunk;
      sums[c] = chunk_sum(k0, std::min(kWeylChunk, end - k0));
    }
  };
  const std::int64_t tasks = (chunks + kChunksPerTask - 1) / kChunksPerTask;
  if (parallel && tasks > 1) {
    parallel_for(tasks, run_task);
  } else {
    for (std::int64_t t = 0; t < tasks; ++t) run_task(t);
  }
  return tree_sum(sums);
}

cplx weyl_sum(const WeylSumSpec& spec) {
  if (spec.J < 0) throw ValidationError("weyl_sum needs J >= 0");
  return WeylKernel(spec.label, spec.ssp, spec.y, spec.z).sum(0, spec.J, true);
}

cplx weyl_sum_serial(const WeylSumSpec& spec) {
  if (spec.J < 0) throw ValidationError("weyl_sum needs J >= 0");
  return WeylKernel(spec.label, spec.ssp, spec.y, spec.z).sum(0, spec.J, false);
}

cplx weyl_sum_direct(const WeylSumSpec& spec) {
  if (spec.J < 0) throw ValidationError("weyl_sum needs J >= 0");
  using wide = __float128;
  const wide Kn = static_cast<wide>(spec.ssp.K) * spec.label.n;
  auto cycles = [](u128 ph) {
    return ldexpq(static_cast<wide>(static_cast<std::uint64_t>(ph >> 64)), -64) +
           ldexpq(static_cast<wide>(static_cast<std::uint64_t>(ph)), -128);
  };
  const wide m = spec.label.m, y = spec.y, z = spec.z;
  const wide rho = cycles(spec.ssp.rho_phase()), sig = cycles(spec.ssp.sigma_phase());
  const wide eps = spec.ssp.y_sign;
  const wide phi0 = m * y + Kn * z;
  const wide psi0 = m * rho + Kn * (eps * y + sig);
  const wide c = eps * Kn * rho;
  NeumaierC acc;
  for (std::int64_t k = 0; k < spec.J; ++k) {
    const wide kk = k;
    wide th = phi0 + kk * psi0 + (kk * (kk - 1) / 2) * c;
    th -= floorq(th);
    const double t = static_cast<double>(th);
    acc.add({std::cos(kTwoPi * t), std::sin(kTwoPi * t)});
  }
  return acc.value();
}

std::vector<std::pair<std::int64_t, cplx>> weyl_partial_sums(const WeylSumSpec& spec,
                                                             std::int64_t stride) {
  if (stride <= 0) throw ValidationError("partial-sum stride must be positive");
  const WeylKernel ker(spec.label, spec.ssp, spec.y, spec.z);
  std::vector<std::pair<std::int64_t, cplx>> out;
  NeumaierC acc;
  std::int64_t j = 0;
  while (j < spec.J) {
    const std::int64_t next = std::min(spec.J, j + stride);
    acc.add(ker.sum(j, next, true));
    j = next;
    out.emplace_back(j, acc.value());
  }
  return out;
}

std::int64_t default_l2_grid(const CharLabel& label, int K, std::int64_t J) {
  const std::int64_t need = 4 * static_cast<std::int64_t>(K) * std::labs(label.n) * std::max<std::int64_t>(J, 1);
  std::int64_t Q = 1;
  while (Q < need) Q <<= 1;
  return Q;
}

L2OverY weyl_sum_l2_over_y(const CharLabel& label, int K, const SkewShiftParams& ssp, double z,
                           std::int64_t J, std::int64_t Q) {
  label.validate();
  if (J < 0) throw ValidationError("J must be >= 0");
  if (Q <= 2 * static_cast<std::int64_t>(K) * std::labs(label.n) * J)
    throw GridTooCoarse("need Q > 2 K |n| J = " +
                        std::to_string(2 * static_cast<std::int64_t>(K) * std::labs(label.n) * J));
  std::vector<double> sq(Q);
  std::vector<cplx> vals(Q);
  parallel_for(Q, [&](std::int64_t q) {
    const double y = static_cast<double>(q) / static_cast<double>(Q);
    const cplx S = WeylKernel(label, ssp, y, z).sum(0, J, false);
    vals[q] = S;
    sq[q] = std::norm(S);
  });
  L2OverY out;
  out.Q = Q;
  out.l2 = tree_sum(sq) / static_cast<double>(Q);
  out.mean = tree_sum(vals) / static_cast<double>(Q);
  return out;
}

namespace {

struct LabelKernel {
  cplx c;
  WeylKernel ker;
};

std::vector<LabelKernel> make_kernels(const Observable& f, const SkewShiftParams& ssp, double y,
                                      double z) {
  std::vector<LabelKernel> ks;
  for (const auto& [label, c] : f.coeffs()) ks.push_back({c, WeylKernel(label, ssp, y, z)});
  return ks;
}

cplx transverse_at(const std::vector<LabelKernel>& ks, std::int64_t k) {
  cplx s = 0.0;
  for (const auto& lk : ks) s += lk.c * lk.ker.term(k);
  return s;
}

struct OrbitSetup {
  SkewShiftParams ssp;
  TransverseSplit split;
  double ta = 1.0;
  std::int64_t k_end = 0;
  double u_start = 0.0;  // t0 / t_a
  double u_end = 0.0;    // position in the last return interval
};

OrbitSetup setup_orbit(const Observable& f, const Frame& a, const GroupElement& x, double T) {
  if (!(T >= 0) || !std::isfinite(T)) throw ValidationError("integration time must be finite and >= 0");
  if (!(a.lattice == f.lattice())) throw ValidationError("frame and observable disagree on K");
  OrbitSetup o;
  o.ssp = return_params(a);
  o.split = split_transverse(a, x);
  o.ta = o.ssp.t_return;
  o.u_start = o.split.t / o.ta;
  const double u_total = (o.split.t + T) / o.ta;
  o.k_end = static_cast<std::int64_t>(std::floor(u_total));
  o.u_end = u_total - static_cast<double>(o.k_end);
  return o;
}

}  // namespace

ErgodicIntegral ergodic_integral(const Observable& f, const Frame& a, const GroupElement& x,
                                 double T) {
  ErgodicIntegral out;
  out.T = T;
  out.frame = a;
  out.x = x;
  if (a.a == 0.0) throw NonTransversal("ergodic integral needs a transversal frame");
  if (T == 0.0 || f.empty()) {
    if (!(T >= 0)) throw ValidationError("integration time must be >= 0");
    return out;
  }
  const OrbitSetup o = setup_orbit(f, a, x, T);
  const BumpProfile& B = f.bump();
  const auto ks = make_kernels(f, o.ssp, o.split.y, o.split.z);
  const cplx F0 = transverse_at(ks, 0);
  if (o.k_end == 0) {
    out.value = F0 * (B.cdf(o.u_end) - B.cdf(o.u_start));
    return out;
  }
  cplx mid = 0.0;
  for (const auto& lk : ks) mid += lk.c * lk.ker.sum(1, o.k_end, false);
  out.value = F0 * (1.0 - B.cdf(o.u_start)) + mid + transverse_at(ks, o.k_end) * B.cdf(o.u_end);
  out.complete_returns = o.k_end - 1;
  return out;
}

TrajectoryMoments trajectory_moments(const Observable& f, const Frame& a, const GroupElement& x,
                                     double T, cplx kappa, int n_moments,
                                     TrajectoryQuadrature quad) {
  if (n_moments < 1) throw ValidationError("need at least one moment");
  TrajectoryMoments out;
  out.moments.assign(n_moments, 0.0);
  if (T == 0.0 || f.empty()) return out;
  if (std::fabs(kappa.imag()) * T > 600.0)
    throw DomainExceeded("|Im kappa| T = " + std::to_string(std::fabs(kappa.imag()) * T) +
                         " overflows the exponential factor");
  const OrbitSetup o = setup_orbit(f, a, x, T);
  const BumpProfile& B = f.bump();
  const auto ks = make_kernels(f, o.ssp, o.split.y, o.split.z);
  const GaussRule& g = gauss_legendre(quad.gauss_order);
  std::vector<NeumaierC> acc(n_moments);
  NeumaierC base;
  const double t0 = o.split.t;
  for (std::int64_t k = 0; k <= o.k_end; ++k) {
    const double s0 = k == 0 ? 0.0 : k * o.ta - t0;
    const double s1 = std::min(T, (k + 1) * o.ta - t0);
    const double u0 = k == 0 ? o.u_start : 0.0;
    const double u1 = k == o.k_end ? o.u_end : 1.0;
    if (!(s1 > s0)) continue;
    const cplx Fk = transverse_at(ks, k);
    const cplx Ibase = base.value();
    const double B0 = B.cdf(u0);
    const double width = (s1 - s0) / quad.panels_per_return;
    for (int p = 0; p < quad.panels_per_return; ++p) {
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double s = s0 + (p + g.nodes[q]) * width;
        const double u = (t0 + s) / o.ta - static_cast<double>(k);
        const cplx Is = Ibase + Fk * (B.cdf(u) - B0);
        out.sup_abs_I = std::max(out.sup_abs_I, std::abs(Is));
        const cplx w = g.weights[q] * width * std::exp(cplx(0.0, -1.0) * kappa * s) * Is;
        double pw = 1.0;
        const double r = s / T;
        for (int j = 0; j < n_moments; ++j) {
          acc[j].add(w * pw);
          pw *= r;
        }
      }
    }
    base.add(Fk * (B.cdf(u1) - B0));
    out.sup_abs_I = std::max(out.sup_abs_I, std::abs(base.value()));
  }
  out.I_T = base.value();
  for (int j = 0; j < n_moments; ++j) out.moments[j] = acc[j].value();
  return out;
}

double bufetov_error_budget(const Observable& f, const Frame& a, const BufetovOptions& opt) {
  if (f.empty()) return 0.0;
  const double L = opt.dc_value ? *opt.dc_value : dc_integral(a, opt.dc_horizon).dc_value;
  return opt.budget_constant * (1.0 + L) * sobolev_surrogate(f, a, opt.sobolev_index);
}

BufetovEstimate bufetov_estimate(const Observable& f, const Frame& a, const GroupElement& x,
                                 double t, double T_ref, const BufetovOptions& opt) {
  if (!(t > 0)) throw ValidationError("bufetov_estimate needs t > 0");
  if (!(T_ref >= 1)) throw ValidationError("bufetov_estimate needs T_ref >= 1");
  BufetovEstimate est;
  est.t = t;
  est.T = T_ref * t;
  est.log_T_ref = std::log(T_ref);
  if (f.empty()) return est;
  const Frame b = renorm(a, -est.log_T_ref);
  const double tb = 1.0 / std::fabs(b.a);
  est.value = std::sqrt(tb / T_ref) * ergodic_integral(f, b, x, est.T).value;
  est.error_budget = bufetov_error_budget(f, a, opt);
  return est;
}

double scaling_check(const Observable& f, const Frame& a, const GroupElement& x, double t,
                     double T, double T_ref) {
  if (!(T > 0) || !(t > 0)) throw ValidationError("scaling_check needs T, t > 0");
  BufetovOptions opt;
  opt.dc_value = 0.0;  // budgets are not needed here
  const BufetovEstimate lhs = bufetov_estimate(f, a, x, T * t, T_ref, opt);
  const BufetovEstimate rhs = bufetov_estimate(f, renorm(a, std::log(T)), x, t, T_ref * T, opt);
  return std::abs(lhs.value - std::sqrt(T) * rhs.value);
}

double z_equivariance_check(const CharLabel& label, const Frame& a, const GroupElement& x,
                            double T, double t_z) {
  const Observable f = lift_R_chi(label, a);
  const cplx shifted = ergodic_integral(f, a, flow_Z(x, t_z, a.lattice), T).value;
  const cplx base = ergodic_integral(f, a, x, T).value;
  const u128 ph = phase_mul(phase_of(t_z), static_cast<long>(a.lattice.K()) * label.n);
  return std::abs(shifted - cis(phase_hi(ph)) * base);
}

YTwistResult ytwist_residual(const CharLabel& label, const Frame& a, const GroupElement& x,
                             double T, double t_y, TrajectoryQuadrature quad) {
  if (!(T > 0)) throw ValidationError("ytwist_residual needs T > 0");
  const Observable f = lift_R_chi(label, a);
  YTwistResult r;
  r.lhs = ergodic_integral(f, a, flow_Y(a, x, t_y), T).value;
  const double kappa = kTwoPi * static_cast<double>(label.n) * a.lattice.K() * t_y;
  if (t_y == 0.0) {
    r.rhs = ergodic_integral(f, a, x, T).value;
  } else {
    const TrajectoryMoments tm = trajectory_moments(f, a, x, T, kappa, 1, quad);
    r.rhs = std::polar(1.0, -kappa * T) * tm.I_T + cplx(0.0, kappa) * tm.moments[0];
  }
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

GroupElement sample_point(Sampling mode, std::uint64_t seed, std::int64_t i, std::int64_t N,
                          const Frame& a) {
  CounterRng rng(seed, static_cast<std::uint64_t>(i));
  const double period = a.lattice.central_period();
  switch (mode) {
    case Sampling::Volume: {
      const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform() * period;
      return {x, y, z};
    }
    case Sampling::Transverse: {
      const double y = rng.uniform(), z = rng.uniform() * period;
      return {0.0, y, z};
    }
    case Sampling::TransverseGrid:
    default:
      return {0.0, static_cast<double>(i) / static_cast<double>(N), rng.uniform() * period};
  }
}

std::vector<double> holder_ratio_scan(const Observable& f, const Frame& a, std::int64_t N,
                                      const std::vector<double>& T_grid, std::uint64_t seed,
                                      Sampling mode) {
  if (N < 1) throw ValidationError("holder_ratio_scan needs N >= 1");
  std::vector<double> out(T_grid.size(), 0.0);
  if (f.empty()) return out;
  std::vector<double> vals(N);
  for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
    const double T = T_grid[ti];
    if (!(T > 0)) throw ValidationError("holder_ratio_scan needs T > 0");
    parallel_for(N, [&](std::int64_t i) {
      const GroupElement x = sample_point(mode, seed, i, N, a);
      vals[i] = std::abs(ergodic_integral(f, a, x, T).value) / std::sqrt(T);
    });
    out[ti] = *std::max_element(vals.begin(), vals.end());
  }
  return out;
}

}  // namespace nilflow
