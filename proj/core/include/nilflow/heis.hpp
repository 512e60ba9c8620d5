#pragma once

#include <optional>
#include <string>
#include <utility>

#include "nilflow/numeric.hpp"

namespace nilflow {

// Upper-triangular matrix entries: (x,y,z) is [[1,x,z],[0,1,y],[0,0,1]].
struct GroupElement {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

GroupElement mul(const GroupElement& g1, const GroupElement& g2);
GroupElement inverse(const GroupElement& g);
// exp(t (p X0 + q Y0 + r Z0)).
GroupElement exp_lie(double p, double q, double r, double t);

class LatticeSpec {
 public:
  explicit LatticeSpec(int K = 1);
  int K() const { return K_; }
  double central_period() const { return 1.0 / K_; }
  bool operator==(const LatticeSpec&) const = default;

 private:
  int K_;
};

// Representative of Gamma_K g in [0,1) x [0,1) x [0,1/K).
GroupElement reduce(const GroupElement& g, const LatticeSpec& lattice);

// SL(2,R) part carried at 113-bit precision. Only the renormalization
// dynamics needs it: geodesic orbits lose a bit of accuracy per unit time.
struct WideSL2 {
  __float128 a, b, c, d;
};

// X = a X0 + b Y0 + v Z0, Y = c X0 + d Y0 + w Z0 with ad - bc = 1.
struct Frame {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double v = 0.0, w = 0.0;
  LatticeSpec lattice{1};
  std::optional<WideSL2> wide;

  static Frame make(double a, double b, double c, double d, double v = 0.0, double w = 0.0,
                    int K = 1);
  double det() const { return a * d - b * c; }
  WideSL2 sl2_wide() const;
};

Frame identity_frame(int K = 1);
// Bounded-type frames on the closed geodesic through the quadratic
// irrational rho; the two named ones are golden and silver.
Frame quadratic_frame(double rho, int K = 1);
Frame golden_frame(int K = 1);
Frame sqrt2_frame(int K = 1);
// X = X0 + (p/q) Y0.
Frame rational_frame(long p, long q, int K = 1);
// "identity", "golden", "sqrt2" or "rational:p/q".
Frame named_frame(const std::string& name, int K = 1);

GroupElement nilflow(const Frame& a, const GroupElement& g, double t);
GroupElement flow_Y(const Frame& a, const GroupElement& g, double t);
GroupElement flow_Z(const GroupElement& g, double t, const LatticeSpec& lattice);

struct SkewShiftParams {
  double rho = 0.0;       // in [0,1)
  double sigma = 0.0;     // in [0,1/K)
  double t_return = 1.0;  // 1/|a|
  int y_sign = -1;
  int K = 1;
  // rho and sigma as 128-bit phases; return_params fills these from the
  // quad-precision frame, otherwise they are derived from the doubles
  u128 rho_fx = 0, sigma_fx = 0;
  bool exact = false;

  u128 rho_phase() const { return exact ? rho_fx : phase_of(rho); }
  u128 sigma_phase() const { return exact ? sigma_fx : phase_of(sigma); }

  // T(y,z) = (y + rho, z + y_sign*y + sigma), reduced.
  std::pair<double, double> apply(double y, double z) const;
};

SkewShiftParams return_params(const Frame& a);

// frac(u) in [0,1) and u mod p in [0,p), both with the boundary snap used
// by reduce().
double wrap_unit(double u);
double wrap_period(double u, double p);

}  // namespace nilflow
