#include "nilflow/line_model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "nilflow/csv.hpp"
#include "nilflow/error.hpp"

namespace nilflow {

namespace {

// fftw planning is not thread-safe; execution on a private plan is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftBuffer {
  explicit FftBuffer(std::int64_t n) : n(n), data(fftw_alloc_complex(static_cast<size_t>(n))) {}
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  std::int64_t n;
  fftw_complex* data;
};

void fft_inplace(FftBuffer& buf, int sign) {
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(buf.n), buf.data, buf.data, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(plan);
}

bool is_pow2(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

LineGrid LineGrid::make(std::int64_t N, double W) {
  if (!is_pow2(N) || N < 256) throw ValidationError("line grid needs N a power of two >= 256");
  if (!(W > 0) || !std::isfinite(W)) throw ValidationError("line grid needs W > 0");
  return LineGrid{N, W};
}

double LineGrid::freq(std::int64_t k) const {
  const std::int64_t kk = k < N / 2 ? k : k - N;
  return static_cast<double>(kk) * freq_spacing();
}

LineFunction LineFunction::sample(const LineGrid& grid, const std::function<cplx(double)>& f) {
  LineFunction out{LineGrid::make(grid.N, grid.W), std::vector<cplx>(grid.N)};
  for (std::int64_t j = 0; j < grid.N; ++j) out.samples[j] = f(grid.node(j));
  return out;
}

double LineFunction::l2_norm() const {
  std::vector<double> sq(samples.size());
  for (size_t j = 0; j < samples.size(); ++j) sq[j] = std::norm(samples[j]);
  return std::sqrt(tree_sum(sq) * grid.spacing());
}

cplx LineFunction::lebesgue() const { return tree_sum(samples) * grid.spacing(); }

double LineFunction::edge_ratio(double band) const {
  double peak = 0.0;
  for (const cplx& s : samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return 0.0;
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  const std::int64_t w = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::ceil(band / grid.spacing())), 1, n);
  double edge = 0.0;
  for (std::int64_t j = 0; j < w; ++j)
    edge = std::max({edge, std::abs(samples[j]), std::abs(samples[n - 1 - j])});
  return edge / peak;
}

std::vector<cplx> line_fourier(const LineFunction& f) {
  const std::int64_t N = f.grid.N;
  FftBuffer buf(N);
  for (std::int64_t j = 0; j < N; ++j) {
    buf.data[j][0] = f.samples[j].real();
    buf.data[j][1] = f.samples[j].imag();
  }
  fft_inplace(buf, FFTW_FORWARD);
  const double scale = f.grid.spacing() / std::sqrt(kTwoPi);
  std::vector<cplx> out(N);
  // u_0 = -W contributes e^{i w_k W} = (-1)^k
  for (std::int64_t k = 0; k < N; ++k) {
    const double s = (k & 1) ? -scale : scale;
    out[k] = {buf.data[k][0] * s, buf.data[k][1] * s};
  }
  return out;
}

LineFunction line_inverse_fourier(const LineGrid& grid, const std::vector<cplx>& spectrum) {
  const std::int64_t N = grid.N;
  if (static_cast<std::int64_t>(spectrum.size()) != N)
    throw ValidationError("spectrum length does not match the grid");
  FftBuffer buf(N);
  for (std::int64_t k = 0; k < N; ++k) {
    const double s = (k & 1) ? -1.0 : 1.0;
    buf.data[k][0] = spectrum[k].real() * s;
    buf.data[k][1] = spectrum[k].imag() * s;
  }
  fft_inplace(buf, FFTW_BACKWARD);
  // inverse of the forward scale h / sqrt(2 pi), times 1/N
  const double scale = std::sqrt(kTwoPi) / (grid.spacing() * static_cast<double>(N));
  LineFunction out{grid, std::vector<cplx>(N)};
  for (std::int64_t j = 0; j < N; ++j) out.samples[j] = {buf.data[j][0] * scale, buf.data[j][1] * scale};
  return out;
}

double fourier_roundtrip_error(const LineFunction& f) {
  const LineFunction back = line_inverse_fourier(f.grid, line_fourier(f));
  double err = 0.0;
  for (size_t j = 0; j < f.samples.size(); ++j) err = std::max(err, std::abs(back.samples[j] - f.samples[j]));
  return err;
}

cplx chi(double u) {
  if (std::fabs(u) < 1e-4) {
    // sum_k (iu)^k / (k+1)!
    const cplx iu(0.0, u);
    cplx term = 1.0, s = 1.0;
    for (int k = 1; k < 6; ++k) {
      term *= iu / static_cast<double>(k + 1);
      s += term;
    }
    return s;
  }
  return (std::polar(1.0, u) - 1.0) / cplx(0.0, u);
}

double c_constant(double L) {
  if (!(L > 0)) throw ValidationError("c_constant needs L > 0");
  const std::int64_t periods = std::max<std::int64_t>(1, std::llround(L / kTwoPi));
  const GaussRule& g = gauss_legendre(20);
  // |chi|^2 = (2 - 2 cos u)/u^2, even; one Gauss panel per half period
  std::vector<double> panel(2 * periods);
  for (std::int64_t p = 0; p < 2 * periods; ++p) {
    const double a = static_cast<double>(p) * kPi;
    Neumaier acc;
    for (size_t q = 0; q < g.nodes.size(); ++q) {
      const double u = a + g.nodes[q] * kPi;
      const double s = std::sin(0.5 * u);
      // 2 - 2cos u = 4 sin^2(u/2) avoids cancellation at small u
      const double v = u < 1e-8 ? 1.0 : 4.0 * s * s / (u * u);
      acc.add(g.weights[q] * v);
    }
    panel[p] = acc.value() * kPi;
  }
  const double Lr = static_cast<double>(periods) * kTwoPi;
  return std::sqrt(2.0 * tree_sum(panel) + 4.0 / Lr);
}

cplx theta_hat_scaled(double T, double u) {
  if (!(T > 0)) throw ValidationError("theta_hat_scaled needs T > 0");
  return std::sqrt(T) * chi(T * u);
}

double l2_convergence_residual(const LineFunction& f, double T) {
  if (!(T > 0)) throw ValidationError("l2_convergence_residual needs T > 0");
  if (T > f.grid.W / 4.0)
    throw GridOverflow("translation length T exceeds W/4 for W = " + std::to_string(f.grid.W));
  if (f.edge_ratio(T) > 1e-12)
    throw GridOverflow("test function is not negligible within T of the grid edge");
  const std::vector<cplx> fh = line_fourier(f);
  const cplx f0 = fh[0];
  const std::int64_t N = f.grid.N;
  std::vector<double> sq(N);
  for (std::int64_t k = 0; k < N; ++k) {
    const double w = f.grid.freq(k);
    sq[k] = std::norm(theta_hat_scaled(T, w) * (fh[k] - f0));
  }
  return std::sqrt(tree_sum(sq) * f.grid.freq_spacing());
}

namespace {

constexpr int kLagrangePoints = 12;

cplx interpolate(const LineFunction& f, double u) {
  const double h = f.grid.spacing();
  const double pos = (u + f.grid.W) / h;
  const std::int64_t N = f.grid.N;
  if (pos < -1.0 || pos > static_cast<double>(N)) return 0.0;
  const auto j0 = static_cast<std::int64_t>(std::floor(pos)) - kLagrangePoints / 2 + 1;
  cplx s = 0.0;
  for (int i = 0; i < kLagrangePoints; ++i) {
    const std::int64_t j = j0 + i;
    if (j < 0 || j >= N) continue;
    double w = 1.0;
    for (int l = 0; l < kLagrangePoints; ++l) {
      if (l == i) continue;
      w *= (pos - static_cast<double>(j0 + l)) / static_cast<double>(i - l);
    }
    s += w * f.samples[j];
  }
  return s;
}

}  // namespace

LineFunction apply_U(const LineFunction& f, double t) {
  if (!std::isfinite(t)) throw ValidationError("apply_U needs finite t");
  // U_t f lives on e^{-t} times the support of f
  if (t < 0 && f.edge_ratio(f.grid.W * (1.0 - std::exp(t))) > 1e-12)
    throw GridOverflow("dilated function leaves the grid");
  const double e = std::exp(t), amp = std::exp(0.5 * t);
  LineFunction out{f.grid, std::vector<cplx>(f.grid.N)};
  parallel_for(f.grid.N, [&](std::int64_t j) { out.samples[j] = amp * interpolate(f, e * f.grid.node(j)); });
  return out;
}

double intertwine_check(const LineFunction& f, double t) {
  if (t == 0.0) return 0.0;
  const LineFunction g = apply_U(f, t);
  const double r1 = std::fabs(g.l2_norm() - f.l2_norm());
  const double r2 = std::abs(g.lebesgue() - std::exp(-0.5 * t) * f.lebesgue());
  return std::max(r1, r2);
}

void write_convergence_csv(std::ostream& os, const std::vector<std::pair<double, double>>& rows) {
  CsvWriter w(os, {"T", "residual"});
  for (const auto& [T, r] : rows) w.row(T, r);
}

}  // namespace nilflow
