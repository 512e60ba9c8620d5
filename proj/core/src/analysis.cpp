#include "nilflow/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "nilflow/csv.hpp"
#include "nilflow/error.hpp"

namespace nilflow {

Ecdf Ecdf::from(std::vector<double> v, std::uint64_t seed) {
  if (v.size() < 100) throw ValidationError("an ECDF needs N >= 100");
  std::sort(v.begin(), v.end());
  Ecdf e;
  e.N = static_cast<std::int64_t>(v.size());
  e.values = std::move(v);
  e.seed = seed;
  return e;
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) / static_cast<double>(N);
}

double Ecdf::quantile(double p) const { return quantile_sorted(values, p); }

double ks_distance(const Ecdf& e1, const Ecdf& e2) { return ks_distance_sorted(e1.values, e2.values); }

void write_ecdf_csv(std::ostream& os, const Ecdf& e) {
  CsvWriter w(os, {"value", "rank_over_n"});
  for (std::int64_t i = 0; i < e.N; ++i)
    w.row(e.values[i], static_cast<double>(i + 1) / static_cast<double>(e.N));
}

namespace {

std::vector<cplx> sample_integrals(const Observable& f, const Frame& a, double T, std::int64_t N,
                                   std::uint64_t seed, Sampling mode) {
  std::vector<cplx> out(N);
  parallel_for(N, [&](std::int64_t i) {
    out[i] = ergodic_integral(f, a, sample_point(mode, seed, i, N, a), T).value;
  });
  return out;
}

}  // namespace

EmpiricalDistribution empirical_distribution(const Observable& f, const Frame& a, double T,
                                             std::int64_t N, std::uint64_t seed, Sampling mode) {
  if (N < 100) throw ValidationError("empirical_distribution needs N >= 100");
  if (!(T > 0)) throw ValidationError("empirical_distribution needs T > 0");
  const std::vector<cplx> I = sample_integrals(f, a, T, N, seed, mode);
  const double s = 1.0 / std::sqrt(T);
  std::vector<double> re(N), mod(N), sq(N);
  for (std::int64_t i = 0; i < N; ++i) {
    re[i] = I[i].real() * s;
    mod[i] = std::abs(I[i]) * s;
    sq[i] = mod[i] * mod[i];
  }
  EmpiricalDistribution d;
  d.T = T;
  d.second_moment = mean(sq);
  d.real = Ecdf::from(std::move(re), seed);
  d.modulus = Ecdf::from(std::move(mod), seed);
  return d;
}

std::vector<MomentPoint> second_moment_track(const Observable& f, const Frame& a,
                                             const std::vector<double>& T_grid, std::int64_t N,
                                             std::uint64_t seed, Sampling mode) {
  if (N < 2) throw ValidationError("second_moment_track needs N >= 2");
  std::vector<MomentPoint> out;
  for (double T : T_grid) {
    if (!(T > 0)) throw ValidationError("second_moment_track needs T > 0");
    const std::vector<cplx> I = sample_integrals(f, a, T, N, seed, mode);
    std::vector<double> sq(N);
    for (std::int64_t i = 0; i < N; ++i) sq[i] = std::norm(I[i]) / T;
    out.push_back({T, mean(sq), standard_error(sq)});
  }
  return out;
}

const char* regime_name(Regime r) { return r == Regime::Compact ? "compact" : "generic"; }

SublevelReport sublevel_measure(const Observable& f, const Frame& a, double T,
                                const std::vector<double>& eps, std::int64_t N, std::uint64_t seed,
                                const SublevelOptions& opt) {
  if (N < 10000) throw ValidationError("sublevel_measure needs N >= 1e4");
  if (!(T > 1)) throw ValidationError("sublevel_measure needs T > 1");
  for (double e : eps)
    if (!(e > 0 && e < 1)) throw ValidationError("epsilon grid must lie in (0,1)");
  if (!std::is_sorted(eps.begin(), eps.end())) throw ValidationError("epsilon grid must be increasing");

  SublevelReport r;
  r.T = T;
  r.N = N;
  r.seed = seed;
  r.regime = opt.regime;
  r.eps = eps;
  r.threshold_scale = std::sqrt(T);
  if (opt.regime == Regime::Generic)
    r.threshold_scale /= opt.C_zeta * std::pow(std::log(T), 0.25 + opt.zeta);

  const std::vector<cplx> I = sample_integrals(f, a, T, N, seed, opt.mode);
  std::vector<double> mod(N);
  for (std::int64_t i = 0; i < N; ++i) mod[i] = std::abs(I[i]);
  std::sort(mod.begin(), mod.end());

  std::vector<double> lx, ly;
  for (size_t k = 0; k < eps.size(); ++k) {
    const double thr = eps[k] * r.threshold_scale;
    const auto cnt = static_cast<std::int64_t>(std::upper_bound(mod.begin(), mod.end(), thr) - mod.begin());
    const double m = static_cast<double>(cnt) / static_cast<double>(N);
    r.measure.push_back(m);
    r.ci.push_back(wilson_interval(cnt, N));
    if (m > 10.0 / static_cast<double>(N) && m < 0.5) {
      r.fitted.push_back(static_cast<int>(k));
      lx.push_back(std::log(eps[k]));
      ly.push_back(std::log(m));
    }
  }
  if (lx.size() < 3)
    throw InsufficientSamples(std::to_string(lx.size()) + " epsilon values in the fittable band, need 3");

  const LineFit ls = least_squares(lx, ly);
  if (ls.r2 >= 0.9) {
    r.fit_method = "least_squares";
    r.delta_hat = ls.slope;
    r.r2 = ls.r2;
    r.delta_ci = {ls.slope - 1.96 * ls.slope_se, ls.slope + 1.96 * ls.slope_se};
  } else {
    const LineFit ts = theil_sen(lx, ly);
    r.fit_method = "theil_sen";
    r.delta_hat = ts.slope;
    r.r2 = ts.r2;
    r.delta_ci = bootstrap_theil_sen(lx, ly, 1000, seed);
  }
  BufetovOptions bo;
  bo.dc_horizon = 20.0;
  r.budget = bufetov_error_budget(f, a, bo);
  return r;
}

void write_sublevel_csv(std::ostream& os, const SublevelReport& r) {
  CsvWriter w(os, {"epsilon", "measure", "ci_lo", "ci_hi"});
  for (size_t k = 0; k < r.eps.size(); ++k) w.row(r.eps[k], r.measure[k], r.ci[k].lo, r.ci[k].hi);
}

cplx complex_extension_eval(const CharLabel& label, const Frame& a, const GroupElement& x, double T,
                            cplx y, cplx z, TrajectoryQuadrature quad) {
  label.validate();
  const double nK = static_cast<double>(label.n) * a.lattice.K();
  if (std::fabs(kTwoPi * nK * z.imag()) > 600.0)
    throw DomainExceeded("|Im z| too large for the central character");
  const cplx zfac = std::exp(cplx(0.0, kTwoPi * nK) * z);
  const Observable f = lift_R_chi(label, a);
  if (y == 0.0) return zfac * ergodic_integral(f, a, x, T).value;
  const cplx kappa = kTwoPi * nK * y;
  const TrajectoryMoments tm = trajectory_moments(f, a, x, T, kappa, 1, quad);
  return zfac * (std::exp(cplx(0.0, -1.0) * kappa * T) * tm.I_T + cplx(0.0, 1.0) * kappa * tm.moments[0]);
}

LeafFunction::LeafFunction(const CharLabel& label, const Frame& a, const GroupElement& x, double T,
                           double z, double y0, int terms)
    : T_(T) {
  label.validate();
  if (!(T > 0)) throw ValidationError("leaf function needs T > 0");
  if (terms < 1) throw ValidationError("leaf function needs >= 1 Taylor term");
  const double nK = static_cast<double>(label.n) * a.lattice.K();
  s_w_ = 1.0 / (kTwoPi * nK * T);
  kappa0_ = kTwoPi * nK * y0;
  prefactor_ = std::polar(1.0, kTwoPi * nK * z);
  const TrajectoryMoments tm = trajectory_moments(lift_R_chi(label, a), a, x, T, kappa0_, terms);
  I_T_ = tm.I_T;
  moments_ = tm.moments;
}

cplx LeafFunction::operator()(cplx w) const {
  // kappa = kappa0 + w / T and e^{-i kappa s} = e^{-i kappa0 s} sum_k (-i w s/T)^k / k!
  const cplx kappa = kappa0_ + w / T_;
  const cplx miw = cplx(0.0, -1.0) * w;
  cplx term = 1.0, acc = 0.0;
  for (size_t k = 0; k < moments_.size(); ++k) {
    acc += term * moments_[k];
    term *= miw / static_cast<double>(k + 1);
  }
  return prefactor_ * (std::exp(cplx(0.0, -1.0) * kappa * T_) * I_T_ + cplx(0.0, 1.0) * kappa * acc);
}

RemezResult remez_check(std::span<const double> abs_values, const std::vector<Interval>& omega,
                        double d, double lo, double hi) {
  if (abs_values.size() < 1024) throw ValidationError("remez_check needs >= 2^10 samples");
  if (!(hi > lo)) throw ValidationError("remez_check needs a nonempty domain");
  if (!(d > 0)) throw ValidationError("remez_check needs d > 0");
  const size_t n = abs_values.size();
  const double h = (hi - lo) / static_cast<double>(n);
  RemezResult r;
  r.leb_D = hi - lo;
  for (const Interval& iv : omega) r.leb_omega += std::max(0.0, std::min(iv.hi, hi) - std::max(iv.lo, lo));
  if (!(r.leb_omega > 0)) throw ValidationError("omega has zero measure inside D");
  for (size_t i = 0; i < n; ++i) {
    r.sup_D = std::max(r.sup_D, abs_values[i]);
    const double u = lo + (static_cast<double>(i) + 0.5) * h;
    for (const Interval& iv : omega)
      if (u >= iv.lo && u <= iv.hi) {
        r.sup_omega = std::max(r.sup_omega, abs_values[i]);
        break;
      }
  }
  const double base = 4.0 * r.leb_D / r.leb_omega;
  if (r.sup_D == 0.0) {
    r.holds = true;
    r.margin = 1.0;
    return r;
  }
  const double rhs = std::pow(base, d) * r.sup_omega;
  r.holds = r.sup_D <= rhs;
  r.margin = rhs / r.sup_D;
  r.min_d = r.sup_omega > 0 ? std::max(0.0, std::log(r.sup_D / r.sup_omega) / std::log(base))
                            : HUGE_VAL;
  return r;
}

double empirical_chebyshev_degree(std::span<const double> abs_values) {
  if (abs_values.size() < 1024) throw ValidationError("chebyshev degree needs >= 2^10 samples");
  const size_t n = abs_values.size();
  std::vector<double> sorted(abs_values.begin(), abs_values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sup = sorted.back();
  if (sup == 0.0) return 0.0;
  double d = 0.0;
  for (double frac : {0.02, 0.05, 0.1, 0.2, 0.3, 0.5}) {
    const auto k = static_cast<size_t>(std::ceil(frac * static_cast<double>(n)));
    const double level = sorted[std::max<size_t>(k, 1) - 1];
    const auto cnt = static_cast<size_t>(std::upper_bound(sorted.begin(), sorted.end(), level) - sorted.begin());
    const double leb = static_cast<double>(cnt) / static_cast<double>(n);
    if (leb >= 1.0) continue;
    if (level == 0.0) return HUGE_VAL;
    d = std::max(d, std::log(sup / level) / std::log(4.0 / leb));
  }
  return d;
}

double valency_constant(double r, double t) {
  if (!(t > 0) || !(r > 3 * t)) throw ValidationError("valency bound needs r > 3t > 0");
  return 1.0 / std::log((r - t) / (2.0 * t));
}

namespace {

std::vector<cplx> circle(const std::function<cplx(cplx)>& fn, double rad, int samples) {
  std::vector<cplx> v(samples);
  parallel_for(samples, [&](std::int64_t j) {
    v[j] = fn(std::polar(rad, kTwoPi * static_cast<double>(j) / samples));
  });
  return v;
}

int winding(const std::vector<cplx>& boundary, cplx w) {
  double total = 0.0;
  for (size_t j = 0; j < boundary.size(); ++j) {
    const cplx a = boundary[j] - w, b = boundary[(j + 1) % boundary.size()] - w;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace

ValencyReport valency_bound(const std::function<cplx(cplx)>& fn, double r, double t, int samples) {
  ValencyReport rep;
  rep.r = r;
  rep.t = t;
  rep.C = valency_constant(r, t);
  if (samples < 256) throw ValidationError("valency_bound needs >= 256 boundary samples");

  const std::vector<cplx> outer = circle(fn, r, samples);
  for (const cplx& v : outer) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NonAnalytic("non-finite value on |zeta| = r");
    rep.M = std::max(rep.M, std::abs(v));
  }
  double M_refined = 0.0;
  for (const cplx& v : circle(fn, r * 1.01, samples)) M_refined = std::max(M_refined, std::abs(v));
  if (!std::isfinite(M_refined) || M_refined > 1e3 * rep.M)
    throw NonAnalytic("boundary maximum explodes under radius refinement");

  const std::vector<cplx> inner = circle(fn, t, samples);
  // diameter of the image: the oscillation over the disc is attained on its boundary
  const int stride = std::max(1, samples / 1024);
  for (int i = 0; i < samples; i += stride)
    for (int j = i + stride; j < samples; j += stride)
      rep.O = std::max(rep.O, std::abs(inner[i] - inner[j]));
  if (rep.O == 0.0) {
    rep.bound = 0.0;
    return rep;
  }
  rep.bound = rep.C * std::log(4.0 * rep.M / rep.O);

  std::vector<cplx> probes{fn(0.0)};
  for (int ri = 1; ri <= 12; ++ri)
    for (int ai = 0; ai < 24; ++ai)
      probes.push_back(fn(std::polar(t * ri / 13.0, kTwoPi * (ai + 0.5 * (ri & 1)) / 24.0)));

  std::vector<double> real_line(samples);
  for (int j = 0; j < samples; ++j)
    real_line[j] = fn(cplx(-t + 2.0 * t * j / (samples - 1), 0.0)).real();

  for (const cplx& w : probes) {
    rep.observed = std::max(rep.observed, winding(inner, w));
    int changes = 0;
    for (int j = 1; j < samples; ++j)
      if ((real_line[j - 1] - w.real()) * (real_line[j] - w.real()) < 0) ++changes;
    rep.sign_changes = std::max(rep.sign_changes, changes);
  }
  return rep;
}

}  // namespace nilflow
