#include "nilflow/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nilflow/csv.hpp"
#include "nilflow/error.hpp"

namespace nilflow {

namespace {

constexpr int kTableNodes = 96;
constexpr double kSimpsonTol = 1e-12;

// int_0^1 g(chi(u)) du by composite Gauss-Legendre; chi is smooth, so this
// is accurate to rounding.
double bump_integral(const BumpProfile& B, const std::function<double(double)>& g) {
  const GaussRule& r = gauss_legendre(16);
  constexpr int panels = 64;
  Neumaier acc;
  for (int p = 0; p < panels; ++p)
    for (size_t q = 0; q < r.nodes.size(); ++q)
      acc.add(r.weights[q] * g(B.density((p + r.nodes[q]) / panels)));
  return acc.value() / panels;
}

}  // namespace

TimeChange::TimeChange(Observable p, double eps, const Frame& a)
    : p_(std::move(p)), zp_(p_.z_derivative()), eps_(eps), a_(a) {
  if (!std::isfinite(eps)) throw ValidationError("time-change amplitude must be finite");
  if (a.a == 0.0) throw NonTransversal("time change needs a transversal frame");
  if (!(a.lattice == p_.lattice())) throw ValidationError("frame and observable disagree on K");
  ta_ = 1.0 / std::fabs(a.a);
  trivial_ = eps == 0.0 || p_.empty();
  if (trivial_) return;

  // Re P on a 64 x 64 torus grid, widened by the gradient bound times half
  // a cell diagonal; the bump factor enters through its extremes 0 and sup.
  const int K = p_.K();
  double sum_abs = 0.0, grad_y = 0.0, grad_z = 0.0;
  for (const auto& [label, c] : p_.coeffs()) {
    sum_abs += std::abs(c);
    grad_y += std::abs(c) * kTwoPi * std::fabs(static_cast<double>(label.m));
    grad_z += std::abs(c) * kTwoPi * std::fabs(static_cast<double>(label.n)) * K;
  }
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      const double v = p_.transverse(i / 64.0, j / (64.0 * K)).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double margin = grad_y / 128.0 + grad_z / (128.0 * K);
  lo = std::max(-sum_abs, lo - margin);
  hi = std::min(sum_abs, hi + margin);
  double A_lo = eps * lo / ta_, A_hi = eps * hi / ta_;
  if (A_lo > A_hi) std::swap(A_lo, A_hi);
  const double chi_max = p_.bump().sup();
  alpha_min_ = 1.0 + std::min(0.0, A_lo) * chi_max;
  alpha_max_ = 1.0 + std::max(0.0, A_hi) * chi_max;
  if (!(alpha_min_ > 0))
    throw NonPositiveAlpha("certified lower bound of alpha is " + std::to_string(alpha_min_));

  if (A_hi - A_lo < 1e-12) {
    A_lo -= 1e-6;
    A_hi += 1e-6;
  }
  const BumpProfile& B = p_.bump();
  G_ = Chebyshev([&](double A) { return bump_integral(B, [A](double c) { return 1.0 / (1.0 + A * c); }); },
                 A_lo, A_hi, kTableNodes);
  H_ = Chebyshev(
      [&](double A) {
        return bump_integral(B, [A](double c) { return c / ((1.0 + A * c) * (1.0 + A * c)); });
      },
      A_lo, A_hi, kTableNodes);
}

double TimeChange::alpha(const GroupElement& x) const {
  if (trivial_) return 1.0;
  return 1.0 + eps_ * p_.evaluate(a_, x).real();
}

double TimeChange::z_alpha(const GroupElement& x) const {
  if (trivial_) return 0.0;
  return eps_ * zp_.evaluate(a_, x).real();
}

VTrajectory::VTrajectory(const TimeChange& alpha, const GroupElement& x) : al_(alpha), x_(x) {
  if (alpha.trivial()) return;
  const Frame& a = alpha.frame();
  ssp_ = return_params(a);
  split_ = split_transverse(a, x);
  for (const auto& [label, c] : alpha.base().coeffs())
    kernels_.emplace_back(c, WeylKernel(label, ssp_, split_.y, split_.z));
  u_start_ = split_.t / ssp_.t_return;
  load_return();
}

void VTrajectory::load_return() {
  cplx P = 0.0, Q = 0.0;
  const int K = al_.base().K();
  auto it = al_.base().coeffs().begin();
  for (const auto& [c, ker] : kernels_) {
    const cplx e = ker.term(k_);
    P += c * e;
    Q += c * cplx(0.0, kTwoPi * static_cast<double>(it->first.n) * K) * e;
    ++it;
  }
  A_ = al_.A_of(P);
  ReQ_ = Q.real();
}

double VTrajectory::partial_tau(double u0, double u1) const {
  const BumpProfile& B = al_.base().bump();
  const double A = A_;
  return ssp_.t_return *
         adaptive_simpson([&](double u) { return 1.0 / (1.0 + A * B.density(u)); }, u0, u1, kSimpsonTol);
}

double VTrajectory::partial_D(double u0, double u1) const {
  if (ReQ_ == 0.0) return 0.0;
  const BumpProfile& B = al_.base().bump();
  const double A = A_;
  const double I = adaptive_simpson(
      [&](double u) {
        const double c = B.density(u);
        return c / ((1.0 + A * c) * (1.0 + A * c));
      },
      u0, u1, kSimpsonTol);
  return al_.eps() * ReQ_ * I;
}

VTrajectory::State VTrajectory::at(double t) {
  if (!(t >= last_t_) || !std::isfinite(t))
    throw ValidationError("V-trajectory queries must be finite and nondecreasing");
  last_t_ = t;
  const Frame& a = al_.frame();
  if (al_.trivial()) return {nilflow(a, x_, t), t, 0.0};

  const double ta = ssp_.t_return;
  for (;;) {
    const bool whole = u_start_ == 0.0;
    const double full = whole ? ta * al_.G(A_) : partial_tau(u_start_, 1.0);
    if (t < tau_done_.value() + full) break;
    tau_done_.add(full);
    D_done_.add(whole ? al_.eps() * ReQ_ * al_.H(A_) : partial_D(u_start_, 1.0));
    ++k_;
    u_start_ = 0.0;
    load_return();
  }

  // solve t_a int_{u_start}^{u} du / (1 + A chi) = rem by safeguarded Newton
  const BumpProfile& B = al_.base().bump();
  const double target = (t - tau_done_.value()) / ta;
  double lo = u_start_, hi = 1.0, u = u_start_, acc = 0.0;
  const double tol = 1e-13 * (1.0 + t) / ta;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const double F = acc - target;
    if (std::fabs(F) <= tol) {
      converged = true;
      break;
    }
    if (F < 0)
      lo = u;
    else
      hi = u;
    const double deriv = 1.0 / (1.0 + A_ * B.density(u));
    double next = u - F / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == u) {
      converged = true;
      break;
    }
    acc += partial_tau(u, next) / ta;
    u = next;
  }
  if (!converged) throw RootFinderFailure("V-time inversion did not converge at t = " + std::to_string(t));

  State st;
  st.s = ta * (static_cast<double>(k_) + u) - split_.t;
  st.D = D_done_.value() + partial_D(u_start_, u);
  st.point = nilflow(a, x_, st.s);
  return st;
}

GroupElement flow_V(const TimeChange& alpha, const GroupElement& x, double t) {
  if (!(t >= 0)) throw ValidationError("flow_V needs t >= 0");
  return VTrajectory(alpha, x).at(t).point;
}

double v_to_x_time(const TimeChange& alpha, const GroupElement& x, double t) {
  if (!(t >= 0)) throw ValidationError("v_to_x_time needs t >= 0");
  return VTrajectory(alpha, x).at(t).s;
}

double stretch_D(const TimeChange& alpha, const GroupElement& x, double t) {
  if (!(t >= 0)) throw ValidationError("stretch_D needs t >= 0");
  return VTrajectory(alpha, x).at(t).D;
}

double x_to_v_time(const TimeChange& alpha, const GroupElement& x, double s) {
  if (!(s >= 0)) throw ValidationError("x_to_v_time needs s >= 0");
  if (alpha.trivial()) return s;
  const SkewShiftParams ssp = return_params(alpha.frame());
  const TransverseSplit sp = split_transverse(alpha.frame(), x);
  const double ta = ssp.t_return;
  const BumpProfile& B = alpha.base().bump();
  std::vector<std::pair<cplx, WeylKernel>> ks;
  for (const auto& [label, c] : alpha.base().coeffs()) ks.emplace_back(c, WeylKernel(label, ssp, sp.y, sp.z));
  auto A_at = [&](std::int64_t k) {
    cplx P = 0.0;
    for (const auto& [c, ker] : ks) P += c * ker.term(k);
    return alpha.A_of(P);
  };
  auto piece = [&](double A, double u0, double u1) {
    return ta * adaptive_simpson([&](double u) { return 1.0 / (1.0 + A * B.density(u)); }, u0, u1, kSimpsonTol);
  };
  const double u_total = (sp.t + s) / ta;
  const auto k_end = static_cast<std::int64_t>(std::floor(u_total));
  const double u0 = sp.t / ta;
  if (k_end == 0) return piece(A_at(0), u0, u_total);
  Neumaier acc;
  acc.add(piece(A_at(0), u0, 1.0));
  for (std::int64_t k = 1; k < k_end; ++k) acc.add(ta * alpha.G(A_at(k)));
  acc.add(piece(A_at(k_end), 0.0, u_total - static_cast<double>(k_end)));
  return acc.value();
}

std::vector<std::pair<CharLabel, cplx>> coboundary_obstructions(const Observable& f,
                                                                const SkewShiftParams& ssp) {
  const int K = f.K();
  std::map<CharLabel, LadderFunction> ladders;
  for (const auto& [label, c] : f.coeffs()) {
    const CharLabel base = label.canonical(K);
    const long Kn = static_cast<long>(K) * label.n;
    auto& F = ladders[base];
    F.label = base;
    F.coeffs[(label.m - base.m) / Kn] += c;
  }
  std::vector<std::pair<CharLabel, cplx>> out;
  for (const auto& [base, F] : ladders) out.emplace_back(base, invariant_distribution(base, K, ssp, F));
  return out;
}

namespace {

struct SeriesSamples {
  std::vector<double> w;
  std::vector<cplx> g;
  std::vector<cplx> h;  // N x T, row-major by sample
};

SeriesSamples sample_series(const Observable& h, const Observable& g, const TimeChange& alpha,
                            const std::vector<double>& t_grid, std::int64_t N, std::uint64_t seed) {
  const size_t nt = t_grid.size();
  std::vector<size_t> order(nt);
  for (size_t i = 0; i < nt; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) { return t_grid[i] < t_grid[j]; });
  SeriesSamples s{std::vector<double>(N), std::vector<cplx>(N), std::vector<cplx>(N * nt)};
  const Frame& a = alpha.frame();
  parallel_for(N, [&](std::int64_t i) {
    const GroupElement x = sample_point(Sampling::Volume, seed, i, N, a);
    s.w[i] = 1.0 / alpha.alpha(x);
    s.g[i] = g.evaluate(a, x);
    VTrajectory traj(alpha, x);
    for (size_t j : order) s.h[i * nt + j] = h.evaluate(a, traj.at(t_grid[j]).point);
  });
  return s;
}

}  // namespace

CorrelationSeries correlation_series(const Observable& h, const Observable& g,
                                     const TimeChange& alpha, const std::vector<double>& t_grid,
                                     std::int64_t N, std::uint64_t seed) {
  if (N < 2) throw ValidationError("correlation needs N >= 2");
  for (double t : t_grid)
    if (!(t >= 0) || !std::isfinite(t)) throw ValidationError("correlation times must be finite and >= 0");
  if (!(h.lattice() == alpha.frame().lattice) || !(g.lattice() == alpha.frame().lattice))
    throw ValidationError("observables and time change disagree on K");
  const SeriesSamples S = sample_series(h, g, alpha, t_grid, N, seed);
  const size_t nt = t_grid.size();
  const double W = tree_sum(S.w);
  std::vector<cplx> wg(N);
  for (std::int64_t i = 0; i < N; ++i) wg[i] = S.w[i] * S.g[i];
  const cplx mg = tree_sum(wg) / W;

  CorrelationSeries out;
  out.t = t_grid;
  out.N = N;
  out.seed = seed;
  std::vector<cplx> col(N), prod(N);
  std::vector<double> z2(N);
  for (size_t j = 0; j < nt; ++j) {
    for (std::int64_t i = 0; i < N; ++i) col[i] = S.w[i] * S.h[i * nt + j];
    const cplx mh = tree_sum(col) / W;
    for (std::int64_t i = 0; i < N; ++i)
      prod[i] = S.w[i] * (S.h[i * nt + j] - mh) * std::conj(S.g[i] - mg);
    const cplx c = tree_sum(prod) / W;
    for (std::int64_t i = 0; i < N; ++i)
      z2[i] = std::norm(prod[i] - S.w[i] * c);
    out.values.push_back(c);
    out.stderr_values.push_back(std::sqrt(tree_sum(z2)) / W);
  }
  return out;
}

CorrelationValue correlation(const Observable& h, const Observable& g, const TimeChange& alpha,
                             double t, std::int64_t N, std::uint64_t seed) {
  const CorrelationSeries s = correlation_series(h, g, alpha, {t}, N, seed);
  return {s.values[0], s.stderr_values[0]};
}

void write_correlation_csv(std::ostream& os, const CorrelationSeries& s) {
  CsvWriter w(os, {"t", "re", "im", "stderr"});
  for (size_t j = 0; j < s.t.size(); ++j) w.row(s.t[j], s.values[j].real(), s.values[j].imag(), s.stderr_values[j]);
}

namespace {

// best delta on a grid for y ~ c - shape(delta, t); returns (delta, rms)
std::pair<double, double> template_fit(const std::vector<double>& t, const std::vector<double>& y,
                                       double (*shape)(double, double)) {
  double best_d = 0.0, best_r = HUGE_VAL;
  std::vector<double> r(t.size());
  for (int i = 1; i <= 3000; ++i) {
    const double d = i * 1e-3;
    for (size_t k = 0; k < t.size(); ++k) r[k] = y[k] + shape(d, t[k]);
    const double c = mean(r);
    double ss = 0.0;
    for (double v : r) ss += (v - c) * (v - c);
    const double rms = std::sqrt(ss / static_cast<double>(t.size()));
    if (rms < best_r) {
      best_r = rms;
      best_d = d;
    }
  }
  return {best_d, best_r};
}

double power_shape(double d, double t) { return d * std::log1p(t); }
double log_shape(double d, double t) {
  const double L = std::log1p(t);
  return L / (1.0 + std::pow(L, d));
}

}  // namespace

DecayFit decay_fit(const CorrelationSeries& s, std::uint64_t seed, int resamples) {
  std::vector<double> t, lx, ly;
  for (size_t j = 0; j < s.t.size(); ++j) {
    const double m = std::abs(s.values[j]);
    if (s.t[j] > 0 && m > 3.0 * s.stderr_values[j] && m > 0) {
      t.push_back(s.t[j]);
      lx.push_back(std::log(s.t[j]));
      ly.push_back(std::log(m));
    }
  }
  if (t.size() < 8)
    throw InsufficientSignal(std::to_string(t.size()) + " points above 3 standard errors, need 8");
  DecayFit f;
  f.points = static_cast<int>(t.size());
  f.slope = theil_sen(lx, ly).slope;
  f.slope_ci = bootstrap_theil_sen(lx, ly, resamples, seed);
  f.delta_hat = -f.slope;
  f.delta_ci = {-f.slope_ci.hi, -f.slope_ci.lo};
  std::tie(f.power_delta, f.power_residual) = template_fit(t, ly, power_shape);
  std::tie(f.log_delta, f.log_residual) = template_fit(t, ly, log_shape);
  return f;
}

std::vector<StretchPoint> stretch_band(const TimeChange& alpha, const std::vector<double>& t_grid,
                                       std::int64_t N, std::uint64_t seed) {
  if (N < 1) throw ValidationError("stretch_band needs N >= 1");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.empty() || !(t_grid.front() > 0))
    throw ValidationError("stretch_band needs an increasing positive t grid");
  const size_t nt = t_grid.size();
  std::vector<double> D(N * nt);
  parallel_for(N, [&](std::int64_t i) {
    VTrajectory traj(alpha, sample_point(Sampling::Volume, seed, i, N, alpha.frame()));
    for (size_t j = 0; j < nt; ++j) D[i * nt + j] = traj.at(t_grid[j]).D;
  });
  std::vector<StretchPoint> out;
  std::vector<double> sq(N);
  for (size_t j = 0; j < nt; ++j) {
    const double rt = std::sqrt(t_grid[j]);
    double mx = 0.0;
    for (std::int64_t i = 0; i < N; ++i) {
      const double r = std::fabs(D[i * nt + j]) / rt;
      mx = std::max(mx, r);
      sq[i] = r * r;
    }
    out.push_back({t_grid[j], mx, std::sqrt(mean(sq))});
  }
  return out;
}

}  // namespace nilflow
