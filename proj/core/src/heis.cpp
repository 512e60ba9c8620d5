#include "nilflow/heis.hpp"

#include <quadmath.h>

#include <cmath>
#include <stdexcept>

#include "nilflow/error.hpp"

namespace nilflow {

namespace {

constexpr double kSnap = 1e-14;

double snapped_floor(double u) {
  double f = std::floor(u);
  if (u - f >= 1.0 - kSnap) f += 1.0;
  return f;
}

Frame frame_from_wide(const WideSL2& s, int K) {
  Frame f = Frame::make(static_cast<double>(s.a), static_cast<double>(s.b),
                        static_cast<double>(s.c), static_cast<double>(s.d), 0.0, 0.0, K);
  f.wide = s;
  return f;
}

Frame make_quadratic(__float128 rho, int K) {
  const __float128 d = 1 / (1 + rho * rho);
  return frame_from_wide(WideSL2{1, rho, -rho * d, d}, K);
}

using wide = __float128;

wide wide_floor(wide u) {
  wide f = floorq(u);
  if (u - f >= 1 - static_cast<wide>(kSnap)) f += 1;
  return f;
}

wide wide_wrap(wide u, wide p) {
  wide r = u - wide_floor(u / p) * p;
  if (r < 0 || r >= p) r = 0;
  return r;
}

// g * exp(t (p X + q Y + r Z)), reduced, with the unreduced product kept in
// quad precision so that large t does not eat the fractional digits
GroupElement flow_wide(const GroupElement& g, wide p, wide q, wide r, double t, const LatticeSpec& L) {
  const wide tt = t;
  const wide dx = tt * p, dy = tt * q, dz = tt * r + tt * tt * p * q / 2;
  wide x = static_cast<wide>(g.x) + dx, y = static_cast<wide>(g.y) + dy;
  wide z = static_cast<wide>(g.z) + dz + static_cast<wide>(g.x) * dy;
  const wide m = -wide_floor(x);
  x += m;
  z += m * y;
  y -= wide_floor(y);
  GroupElement out{static_cast<double>(x), static_cast<double>(y),
                   static_cast<double>(wide_wrap(z, static_cast<wide>(1) / L.K()))};
  if (!(out.x >= 0.0) || out.x >= 1.0) out.x = 0.0;
  if (!(out.y >= 0.0) || out.y >= 1.0) out.y = 0.0;
  if (out.z >= L.central_period()) out.z = 0.0;
  return out;
}

}  // namespace

GroupElement mul(const GroupElement& g1, const GroupElement& g2) {
  return {g1.x + g2.x, g1.y + g2.y, g1.z + g2.z + g1.x * g2.y};
}

GroupElement inverse(const GroupElement& g) { return {-g.x, -g.y, g.x * g.y - g.z}; }

GroupElement exp_lie(double p, double q, double r, double t) {
  return {t * p, t * q, t * r + 0.5 * t * t * p * q};
}

LatticeSpec::LatticeSpec(int K) : K_(K) {
  if (K < 1) throw ValidationError("lattice refinement K must be >= 1");
}

double wrap_period(double u, double p) {
  const double f = snapped_floor(u / p);
  double r = u - f * p;
  if (r < 0.0 || r >= p) r = 0.0;
  return r;
}

double wrap_unit(double u) { return wrap_period(u, 1.0); }

GroupElement reduce(const GroupElement& g, const LatticeSpec& lattice) {
  const double m = -snapped_floor(g.x);
  double x = g.x + m;
  if (x < 0.0) x = 0.0;
  double z = g.z + m * g.y;
  const double n = -snapped_floor(g.y);
  double y = g.y + n;
  if (y < 0.0) y = 0.0;
  z = wrap_period(z, lattice.central_period());
  return {x, y, z};
}

Frame Frame::make(double a, double b, double c, double d, double v, double w, int K) {
  for (double e : {a, b, c, d, v, w})
    if (!std::isfinite(e)) throw InvalidFrame("non-finite frame entry");
  Frame f;
  f.a = a;
  f.b = b;
  f.c = c;
  f.d = d;
  f.v = v;
  f.w = w;
  f.lattice = LatticeSpec(K);
  if (std::fabs(f.det() - 1.0) > 1e-12)
    throw InvalidFrame("ad - bc = " + std::to_string(f.det()) + ", expected 1");
  return f;
}

WideSL2 Frame::sl2_wide() const {
  if (wide) return *wide;
  return WideSL2{a, b, c, d};
}

Frame identity_frame(int K) { return Frame::make(1, 0, 0, 1, 0, 0, K); }

Frame quadratic_frame(double rho, int K) { return make_quadratic(rho, K); }

Frame golden_frame(int K) { return make_quadratic((sqrtq(5.0Q) - 1) / 2, K); }

Frame sqrt2_frame(int K) { return make_quadratic(sqrtq(2.0Q) - 1, K); }

Frame rational_frame(long p, long q, int K) {
  if (q == 0) throw ValidationError("rational frame with zero denominator");
  const __float128 r = static_cast<__float128>(p) / q;
  return frame_from_wide(WideSL2{1, r, 0, 1}, K);
}

Frame named_frame(const std::string& name, int K) {
  if (name == "identity") return identity_frame(K);
  if (name == "golden") return golden_frame(K);
  if (name == "sqrt2") return sqrt2_frame(K);
  const std::string prefix = "rational:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string frac = name.substr(prefix.size());
    const auto slash = frac.find('/');
    if (slash == std::string::npos) throw ValidationError("expected rational:p/q, got " + name);
    try {
      std::size_t used_p = 0, used_q = 0;
      const long p = std::stol(frac.substr(0, slash), &used_p);
      const long q = std::stol(frac.substr(slash + 1), &used_q);
      if (used_p != slash || used_q != frac.size() - slash - 1) throw std::invalid_argument(name);
      return rational_frame(p, q, K);
    } catch (const std::logic_error&) {
      throw ValidationError("malformed rational frame name: " + name);
    }
  }
  throw ValidationError("unknown frame name: " + name);
}

GroupElement nilflow(const Frame& a, const GroupElement& g, double t) {
  const WideSL2 m = a.sl2_wide();
  return flow_wide(g, m.a, m.b, a.v, t, a.lattice);
}

GroupElement flow_Y(const Frame& a, const GroupElement& g, double t) {
  const WideSL2 m = a.sl2_wide();
  return flow_wide(g, m.c, m.d, a.w, t, a.lattice);
}

GroupElement flow_Z(const GroupElement& g, double t, const LatticeSpec& lattice) {
  return reduce(GroupElement{g.x, g.y, g.z + t}, lattice);
}

std::pair<double, double> SkewShiftParams::apply(double y, double z) const {
  return {wrap_unit(y + rho), wrap_period(z + y_sign * y + sigma, 1.0 / K)};
}

SkewShiftParams return_params(const Frame& a) {
  if (a.a == 0.0 || !std::isfinite(1.0 / a.a))
    throw NonTransversal("frame has <X,X0> = 0; the flow never crosses the transverse torus");
  SkewShiftParams s;
  const double abs_a = std::fabs(a.a);
  s.K = a.lattice.K();
  s.t_return = 1.0 / abs_a;
  s.rho = wrap_unit(a.b / abs_a);
  s.sigma = wrap_period(a.v / abs_a - a.b / (2.0 * a.a), 1.0 / s.K);
  s.y_sign = a.a > 0 ? -1 : 1;
  const WideSL2 m = a.sl2_wide();
  const wide wa = fabsq(m.a);
  s.rho_fx = phase_of(m.b / wa);
  s.sigma_fx = phase_of(wide_wrap(static_cast<wide>(a.v) / wa - m.b / (2 * m.a), static_cast<wide>(1) / s.K));
  s.exact = true;
  return s;
}

}  // namespace nilflow
