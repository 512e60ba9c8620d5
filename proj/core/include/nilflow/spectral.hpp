#pragma once

#include <map>
#include <memory>
#include <vector>

#include "nilflow/heis.hpp"
#include "nilflow/numeric.hpp"

namespace nilflow {

// Character e_{m,n}(y,z) = exp(2 pi i (m y + n K z)) on the transverse torus.
struct CharLabel {
  long m = 0;
  long n = 1;
  auto operator<=>(const CharLabel&) const = default;
  // Representative of the irreducible component: m mod K|n|.
  CharLabel canonical(int K) const;
  void validate() const;
};

cplx eval_character(const CharLabel& label, int K, double y, double z);

// F = sum_j F_j e_{m + j K n, n}: one ladder of the component of `label`.
struct LadderFunction {
  CharLabel label;
  std::map<long, cplx> coeffs;
};

// Pullback of a ladder function by the skew shift, F o T, on the same ladder.
LadderFunction pullback(const LadderFunction& F, const SkewShiftParams& ssp);

cplx invariant_distribution(const CharLabel& label, int K, const SkewShiftParams& ssp,
                            const LadderFunction& F);

// chi(u) proportional to exp(-1/(u(1-u))) on (0,1), unit mass.
class BumpProfile {
 public:
  explicit BumpProfile(int resolution = 1 << 14);
  int resolution() const { return resolution_; }
  double density(double u) const;
  // int_0^u chi, clamped to [0,1] outside the support.
  double cdf(double u) const;
  double sup() const { return sup_; }
  // sup |chi^{(k)}| (k = 0 gives sup chi).
  double derivative_bound(int k) const;
  double normalizer() const { return norm_; }
  // n-th Taylor coefficient of chi at u (derivative / n!), n <= 40.
  std::vector<double> taylor(double u, int order) const;

 private:
  int resolution_;
  double norm_ = 1.0;
  double sup_ = 0.0;
  std::vector<double> cdf_nodes_;
  std::vector<double> pdf_nodes_;
  mutable std::vector<double> deriv_bounds_;
};

std::shared_ptr<const BumpProfile> default_bump();

using CoeffMap = std::map<CharLabel, cplx>;

// f_c = sum c_{m,n} R^chi_a(e_{m,n}); the frame is supplied at evaluation.
class Observable {
 public:
  Observable() : Observable(LatticeSpec(1), default_bump(), {}) {}
  Observable(LatticeSpec lattice, std::shared_ptr<const BumpProfile> bump, CoeffMap coeffs);

  const LatticeSpec& lattice() const { return lattice_; }
  int K() const { return lattice_.K(); }
  const BumpProfile& bump() const { return *bump_; }
  std::shared_ptr<const BumpProfile> bump_ptr() const { return bump_; }
  const CoeffMap& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  // Transverse data F(y,z) = sum c e_{m,n}(y,z).
  cplx transverse(double y, double z) const;
  cplx evaluate(const Frame& a, const GroupElement& p) const;

  // Z-derivative: c_{m,n} -> 2 pi i n K c_{m,n}.
  Observable z_derivative() const;
  Observable scaled(cplx s) const;
  Observable operator+(const Observable& o) const;

 private:
  LatticeSpec lattice_;
  std::shared_ptr<const BumpProfile> bump_;
  CoeffMap coeffs_;
};

// p = phi^X_t(xi) with xi on the transverse torus (x = 0) and t in [0, t_a).
struct TransverseSplit {
  double t = 0.0;
  double y = 0.0;
  double z = 0.0;
};
TransverseSplit split_transverse(const Frame& a, const GroupElement& p);

Observable lift_R_chi(const LadderFunction& F, const Frame& a,
                      std::shared_ptr<const BumpProfile> bump = default_bump());
Observable lift_R_chi(const CharLabel& label, const Frame& a,
                      std::shared_ptr<const BumpProfile> bump = default_bump(), cplx c = 1.0);

struct CoeffNorms {
  double s = 0.0;
  double R = 0.0;
  double sobolev = 0.0;   // |c|_s
  double analytic = 0.0;  // ||c||_{omega,R}
};
CoeffNorms coeff_norms(const CoeffMap& c, int K, double s, double R);

struct OmegaReport {
  double eta = 0.5;
  std::vector<double> R;
  std::vector<double> lhs;    // sum |n| |c| e^{|n| R}
  std::vector<double> ratio;  // lhs / e^{R^{2-eta}}
  double C_eta = 0.0;
  bool pass = false;
};
// The bound is accepted on the grid when the worst ratio is attained before
// the last grid point (the ratio has turned over).
OmegaReport omega_eta_check(const CoeffMap& c, double eta, const std::vector<double>& R_grid);

double sobolev_surrogate(const Observable& obs, const Frame& a, double s);

}  // namespace nilflow
