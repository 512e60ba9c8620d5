#include "nilflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nilflow/error.hpp"

namespace nilflow {

CharLabel CharLabel::canonical(int K) const {
  validate();
  const long period = static_cast<long>(K) * std::labs(n);
  long r = m % period;
  if (r < 0) r += period;
  return {r, n};
}

void CharLabel::validate() const {
  if (n == 0) throw ValidationError("character label needs n != 0 (the n = 0 part is out of scope)");
}

cplx eval_character(const CharLabel& label, int K, double y, double z) {
  const u128 p = phase_mul(phase_of(y), label.m) + phase_mul(phase_of(z), label.n * K);
  return cis(phase_hi(p));
}

LadderFunction pullback(const LadderFunction& F, const SkewShiftParams& ssp) {
  const long Kn = ssp.K * F.label.n;
  const u128 rho = ssp.rho_phase(), sigma = ssp.sigma_phase();
  LadderFunction out{F.label, {}};
  for (const auto& [j, Fj] : F.coeffs) {
    const u128 ph = phase_mul(rho, F.label.m + j * Kn) + phase_mul(sigma, Kn);
    out.coeffs[j + ssp.y_sign] += Fj * cis(phase_hi(ph));
  }
  return out;
}

cplx invariant_distribution(const CharLabel& label, int K, const SkewShiftParams& ssp,
                            const LadderFunction& F) {
  label.validate();
  if (!(F.label == label))
    throw LabelMismatch("ladder function lives on a different base label");
  if (K != ssp.K) throw LabelMismatch("lattice K differs from the skew shift's K");
  const long Kn = static_cast<long>(K) * label.n;
  const int eps = ssp.y_sign;
  const u128 rho = ssp.rho_phase(), sigma = ssp.sigma_phase();
  // D(e_j) = e(-[A jj + eps Kn rho jj(jj-1)/2]), jj = eps j, A = m rho + Kn sigma
  const u128 A = phase_mul(rho, label.m) + phase_mul(sigma, Kn);
  const u128 B = phase_mul(rho, eps * Kn);
  NeumaierC acc;
  for (const auto& [j, Fj] : F.coeffs) {
    const long jj = eps * j;
    const u128 ph = phase_mul(A, jj) + phase_mul(B, jj * (jj - 1) / 2);
    acc.add(Fj * cis(phase_hi(u128(0) - ph)));
  }
  return acc.value();
}

// ---- bump ---------------------------------------------------------------

namespace {

double raw_bump(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(-1.0 / (u * (1.0 - u)));
}

}  // namespace

BumpProfile::BumpProfile(int resolution) : resolution_(resolution) {
  if (resolution < 16) throw ValidationError("bump resolution must be >= 16");
  const GaussRule& g = gauss_legendre(10);
  const double h = 1.0 / resolution;
  cdf_nodes_.assign(resolution + 1, 0.0);
  Neumaier acc;
  for (int i = 0; i < resolution; ++i) {
    double cell = 0.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) cell += g.weights[q] * raw_bump((i + g.nodes[q]) * h);
    acc.add(cell * h);
    cdf_nodes_[i + 1] = acc.value();
  }
  norm_ = cdf_nodes_.back();
  for (double& c : cdf_nodes_) c /= norm_;
  cdf_nodes_.back() = 1.0;
  pdf_nodes_.resize(resolution + 1);
  for (int i = 0; i <= resolution; ++i) pdf_nodes_[i] = raw_bump(i * h) / norm_;
  sup_ = raw_bump(0.5) / norm_;
}

double BumpProfile::density(double u) const { return raw_bump(u) / norm_; }

double BumpProfile::cdf(double u) const {
  if (!(u > 0.0)) return 0.0;
  if (u >= 1.0) return 1.0;
  const double s = u * resolution_;
  int i = static_cast<int>(s);
  if (i >= resolution_) i = resolution_ - 1;
  const double t = s - i, h = 1.0 / resolution_;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * cdf_nodes_[i] + h10 * h * pdf_nodes_[i] + h01 * cdf_nodes_[i + 1] +
         h11 * h * pdf_nodes_[i + 1];
}

std::vector<double> BumpProfile::taylor(double u, int order) const {
  std::vector<double> E(order + 1, 0.0);
  if (u <= 0.0 || u >= 1.0) return E;
  // p(h) = (u+h)(1-u-h), q = 1/p, chi = exp(-q)/norm
  const double p0 = u * (1 - u), p1 = 1 - 2 * u, p2 = -1;
  std::vector<double> q(order + 1, 0.0);
  q[0] = 1 / p0;
  for (int k = 1; k <= order; ++k) {
    double s = p1 * q[k - 1];
    if (k >= 2) s += p2 * q[k - 2];
    q[k] = -s / p0;
  }
  E[0] = std::exp(-q[0]) / norm_;
  for (int k = 1; k <= order; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * q[j] * E[k - j];
    E[k] = -s / k;
  }
  return E;
}

double BumpProfile::derivative_bound(int k) const {
  if (k <= 0) return sup_;
  if (k > 40) throw ValidationError("bump derivative bound supports k <= 40");
  if (deriv_bounds_.empty()) {
    deriv_bounds_.assign(41, 0.0);
    constexpr int kGrid = 4000;
    for (int i = 1; i < kGrid; ++i) {
      const std::vector<double> E = taylor(static_cast<double>(i) / kGrid, 40);
      double fact = 1.0;
      for (int j = 1; j <= 40; ++j) {
        fact *= j;
        deriv_bounds_[j] = std::max(deriv_bounds_[j], std::fabs(E[j]) * fact);
      }
    }
  }
  return deriv_bounds_[k];
}

std::shared_ptr<const BumpProfile> default_bump() {
  static const auto bump = std::make_shared<const BumpProfile>();
  return bump;
}

// ---- observables --------------------------------------------------------

Observable::Observable(LatticeSpec lattice, std::shared_ptr<const BumpProfile> bump, CoeffMap coeffs)
    : lattice_(lattice), bump_(std::move(bump)) {
  if (!bump_) throw ValidationError("observable needs a bump profile");
  for (const auto& [label, c] : coeffs) {
    label.validate();
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ValidationError("non-finite observable coefficient");
    if (c != cplx(0.0)) coeffs_[label] += c;
  }
}

cplx Observable::transverse(double y, double z) const {
  cplx s = 0.0;
  for (const auto& [label, c] : coeffs_) s += c * eval_character(label, K(), y, z);
  return s;
}

TransverseSplit split_transverse(const Frame& a, const GroupElement& p) {
  if (a.a == 0.0) throw NonTransversal("frame has <X,X0> = 0");
  const GroupElement r = reduce(p, a.lattice);
  const double abs_a = std::fabs(a.a);
  double t = a.a > 0 ? r.x / abs_a : (r.x > 0.0 ? (1.0 - r.x) / abs_a : 0.0);
  const GroupElement xi = reduce(mul(r, exp_lie(a.a, a.b, a.v, -t)), a.lattice);
  return {t, xi.y, xi.z};
}

cplx Observable::evaluate(const Frame& a, const GroupElement& p) const {
  if (coeffs_.empty()) return 0.0;
  if (!(a.lattice == lattice_)) throw ValidationError("frame and observable disagree on K");
  const TransverseSplit s = split_transverse(a, p);
  const double ta = 1.0 / std::fabs(a.a);
  return bump_->density(s.t / ta) / ta * transverse(s.y, s.z);
}

Observable Observable::z_derivative() const {
  CoeffMap out;
  for (const auto& [label, c] : coeffs_)
    out[label] = c * cplx(0.0, kTwoPi * static_cast<double>(label.n) * K());
  return Observable(lattice_, bump_, out);
}

Observable Observable::scaled(cplx s) const {
  CoeffMap out;
  for (const auto& [label, c] : coeffs_) out[label] = c * s;
  return Observable(lattice_, bump_, out);
}

Observable Observable::operator+(const Observable& o) const {
  if (!(o.lattice_ == lattice_) || o.bump_ != bump_)
    throw ValidationError("observables with different K or bump cannot be added");
  CoeffMap out = coeffs_;
  for (const auto& [label, c] : o.coeffs_) out[label] += c;
  return Observable(lattice_, bump_, out);
}

Observable lift_R_chi(const LadderFunction& F, const Frame& a,
                      std::shared_ptr<const BumpProfile> bump) {
  if (a.a == 0.0) throw NonTransversal("R^chi lift needs a transversal frame");
  F.label.validate();
  const long Kn = static_cast<long>(a.lattice.K()) * F.label.n;
  CoeffMap c;
  for (const auto& [j, Fj] : F.coeffs) c[{F.label.m + j * Kn, F.label.n}] += Fj;
  return Observable(a.lattice, std::move(bump), c);
}

Observable lift_R_chi(const CharLabel& label, const Frame& a,
                      std::shared_ptr<const BumpProfile> bump, cplx c) {
  return lift_R_chi(LadderFunction{label, {{0, c}}}, a, std::move(bump));
}

CoeffNorms coeff_norms(const CoeffMap& c, int K, double s, double R) {
  CoeffNorms out{s, R, 0.0, 0.0};
  Neumaier sob, ana;
  for (const auto& [label, v] : c) {
    const double kn = static_cast<double>(K) * label.n;
    sob.add(std::pow(1.0 + kn * kn, s) * std::norm(v));
    ana.add(std::exp(std::fabs(static_cast<double>(label.n)) * R) * std::abs(v));
  }
  out.sobolev = std::sqrt(sob.value());
  out.analytic = ana.value();
  return out;
}

OmegaReport omega_eta_check(const CoeffMap& c, double eta, const std::vector<double>& R_grid) {
  if (!(eta > 0 && eta < 1)) throw ValidationError("omega_eta_check needs eta in (0,1)");
  OmegaReport rep;
  rep.eta = eta;
  rep.R = R_grid;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < R_grid.size(); ++i) {
    const double R = R_grid[i];
    // work in logs: terms can exceed double range on wide grids
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    for (const auto& [label, v] : c) {
      const double an = std::fabs(static_cast<double>(label.n));
      if (v == cplx(0.0)) continue;
      logs.push_back(std::log(an * std::abs(v)) + an * R);
      lmax = std::max(lmax, logs.back());
    }
    double lhs_log = lmax;
    if (!logs.empty()) {
      double s = 0.0;
      for (double l : logs) s += std::exp(l - lmax);
      lhs_log += std::log(s);
    }
    const double ratio_log = lhs_log - std::pow(std::max(R, 0.0), 2.0 - eta);
    rep.lhs.push_back(std::exp(lhs_log));
    rep.ratio.push_back(std::exp(ratio_log));
    if (rep.ratio.back() > rep.ratio[argmax]) argmax = i;
  }
  rep.C_eta = rep.ratio.empty() ? 0.0 : *std::max_element(rep.ratio.begin(), rep.ratio.end());
  rep.pass = std::isfinite(rep.C_eta) &&
             (rep.C_eta == 0.0 || rep.ratio.size() < 2 || argmax + 1 < rep.ratio.size());
  return rep;
}

double sobolev_surrogate(const Observable& obs, const Frame& a, double s) {
  if (obs.empty()) return 0.0;
  const SkewShiftParams ssp = return_params(a);
  const double inv_ta = 1.0 / ssp.t_return;
  const double normY = std::sqrt(a.c * a.c + a.d * a.d + a.w * a.w);
  const double Cb = obs.bump().derivative_bound(static_cast<int>(std::ceil(s)));
  Neumaier acc;
  for (const auto& [label, c] : obs.coeffs()) {
    const double kn = static_cast<double>(obs.K()) * label.n;
    acc.add(std::abs(c) * inv_ta * std::pow(1.0 + inv_ta * normY, s) *
            std::pow(1.0 + kn * kn, s / 2) * Cb);
  }
  return acc.value();
}

}  // namespace nilflow
