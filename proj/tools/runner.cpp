#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nilflow/analysis.hpp"
#include "nilflow/birkhoff.hpp"
#include "nilflow/csv.hpp"
#include "nilflow/error.hpp"
#include "nilflow/heis.hpp"
#include "nilflow/line_model.hpp"
#include "nilflow/moduli.hpp"
#include "nilflow/rng.hpp"
#include "nilflow/timechange.hpp"
#include "nilflow/version.hpp"

namespace nilflow::lab {

using nlohmann::json;

namespace {

struct KeyDoc {
  std::string name;
  json fallback;  // null means required
  std::string doc;
};

struct CsvDoc {
  std::string file;
  std::vector<std::string> columns;
};

class Reader;
struct Context;
using RunFn = std::function<json(Reader&, Context&)>;

struct Experiment {
  std::string kind;
  std::string doc;
  std::vector<KeyDoc> keys;
  std::vector<CsvDoc> csv;
  RunFn run;
};

// Typed access to one JSON object; every key must be declared, and
// unknown keys are rejected before anything runs.
class Reader {
 public:
  Reader(const json& obj, std::vector<KeyDoc> keys, std::string where)
      : obj_(obj), keys_(std::move(keys)), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + " must be a JSON object");
    std::set<std::string> known;
    for (const auto& k : keys_) known.insert(k.name);
    for (const auto& [k, v] : obj_.items())
      if (!known.count(k)) throw ValidationError("unknown key '" + k + "' in " + where_);
  }

  const json& raw(const std::string& key) const {
    if (obj_.contains(key)) return obj_.at(key);
    for (const auto& k : keys_)
      if (k.name == key) {
        if (k.fallback.is_null()) throw ValidationError("missing required key '" + key + "' in " + where_);
        return k.fallback;
      }
    throw std::logic_error("undeclared key " + key);
  }

  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

  template <class T>
  T get(const std::string& key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError("key '" + key + "' in " + where_ + ": " + e.what());
    }
  }

 private:
  const json& obj_;
  std::vector<KeyDoc> keys_;
  std::string where_;
};

struct Context {
  std::filesystem::path out;
  std::uint64_t seed = 1;
  json partial;  // reported alongside a guard that aborts the run

  std::ofstream csv(const std::string& name) const {
    std::ofstream os(out / name);
    if (!os) throw std::runtime_error("cannot write " + (out / name).string());
    return os;
  }
};

// ---- shared config pieces ------------------------------------------------

const KeyDoc kFrameKey{"frame", "golden",
                       "named frame (identity, golden, sqrt2, rational:p/q) or {a,b,c,d,v,w}"};
const KeyDoc kLatticeKey{"K", 1, "lattice index K >= 1"};
const KeyDoc kSeedKey{"seed", 1, "base seed of the counter-based generator"};
const json kDefaultObservable = json::array({json{{"m", 0}, {"n", 1}, {"re", 1.0}, {"im", 0.0}}});

Frame read_frame(const Reader& r) {
  const int K = r.get<int>("K");
  const json& f = r.raw("frame");
  if (f.is_string()) return named_frame(f.get<std::string>(), K);
  Reader fr(f, {{"a", nullptr, ""}, {"b", nullptr, ""}, {"c", nullptr, ""}, {"d", nullptr, ""},
                {"v", 0.0, ""}, {"w", 0.0, ""}},
            "frame");
  return Frame::make(fr.get<double>("a"), fr.get<double>("b"), fr.get<double>("c"), fr.get<double>("d"),
                     fr.get<double>("v"), fr.get<double>("w"), K);
}

CharLabel read_label(const Reader& r, const std::string& key = "label") {
  Reader lr(r.raw(key), {{"m", nullptr, ""}, {"n", nullptr, ""}}, key);
  CharLabel l{lr.get<long>("m"), lr.get<long>("n")};
  l.validate();
  return l;
}

Observable read_observable(const Reader& r, const std::string& key, const Frame& a) {
  const json& arr = r.raw(key);
  if (!arr.is_array() || arr.empty()) throw ValidationError(key + " must be a nonempty array");
  CoeffMap c;
  for (const json& e : arr) {
    Reader er(e, {{"m", nullptr, ""}, {"n", nullptr, ""}, {"re", 1.0, ""}, {"im", 0.0, ""}}, key);
    CharLabel l{er.get<long>("m"), er.get<long>("n")};
    l.validate();
    c[l] += cplx(er.get<double>("re"), er.get<double>("im"));
  }
  return Observable(a.lattice, default_bump(), c);
}

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi > lo) || count < 2) throw ValidationError("log grid needs 0 < min < max, count >= 2");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

// ---- experiments ---------------------------------------------------------

json run_weyl_sum(Reader& r, Context& ctx) {
  WeylSumSpec s;
  s.label = read_label(r);
  s.K = r.get<int>("K");
  if (r.has("skew_shift")) {
    Reader sr(r.raw("skew_shift"), {{"rho", nullptr, ""}, {"sigma", nullptr, ""}, {"y_sign", nullptr, ""}},
              "skew_shift");
    s.ssp.rho = sr.get<double>("rho");
    s.ssp.sigma = sr.get<double>("sigma");
    s.ssp.y_sign = sr.get<int>("y_sign");
    s.ssp.K = s.K;
    if (s.ssp.y_sign != 1 && s.ssp.y_sign != -1) throw ValidationError("skew_shift.y_sign must be +1 or -1");
  } else {
    s.ssp = return_params(read_frame(r));
  }
  s.y = r.get<double>("y");
  s.z = r.get<double>("z");
  s.J = r.get<std::int64_t>("J");
  const auto stride = r.get<std::int64_t>("stride");
  const auto check_J = r.get<std::int64_t>("check_J");
  if (s.J < 1) throw ValidationError("J must be >= 1");

  const cplx S = weyl_sum(s);
  {
    auto os = ctx.csv("partial_sums.csv");
    CsvWriter w(os, {"j", "re", "im"});
    for (const auto& [j, v] : weyl_partial_sums(s, stride)) w.row(static_cast<long long>(j), v.real(), v.imag());
  }
  WeylSumSpec chk = s;
  chk.J = std::min(s.J, check_J);
  const double err = std::abs(weyl_sum(chk) - weyl_sum_direct(chk));
  return {{"S_J", cplx_json(S)},
          {"rho", s.ssp.rho},
          {"sigma", s.ssp.sigma},
          {"y_sign", s.ssp.y_sign},
          {"direct_check", {{"J", chk.J}, {"abs_error", err}, {"pass", err <= 1e-9}}}};
}

json run_l2_identity(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const CharLabel label = read_label(r);
  const double z = r.get<double>("z");
  const auto Js = r.get<std::vector<std::int64_t>>("J");
  const SkewShiftParams ssp = return_params(a);
  auto os = ctx.csv("l2_identity.csv");
  CsvWriter w(os, {"J", "Q", "l2", "rel_err", "mean_re", "mean_im", "mean_dist"});
  double worst = 0.0, worst_mean = 0.0;
  json rows = json::array();
  for (std::int64_t J : Js) {
    const std::int64_t Q = r.has("Q") ? r.get<std::int64_t>("Q") : default_l2_grid(label, a.lattice.K(), J);
    const L2OverY res = weyl_sum_l2_over_y(label, a.lattice.K(), ssp, z, J, Q);
    const double rel = std::fabs(res.l2 - static_cast<double>(J)) / static_cast<double>(J);
    const double md = std::min(std::abs(res.mean), std::fabs(std::abs(res.mean) - 1.0));
    w.row(static_cast<long long>(J), static_cast<long long>(Q), res.l2, rel, res.mean.real(), res.mean.imag(), md);
    worst = std::max(worst, rel);
    worst_mean = std::max(worst_mean, md);
    rows.push_back({{"J", J}, {"Q", Q}, {"l2", res.l2}, {"rel_err", rel}, {"mean", cplx_json(res.mean)}});
  }
  return {{"rows", rows},
          {"max_rel_err", worst},
          {"max_mean_dist", worst_mean},
          {"pass", worst <= 1e-9 && worst_mean <= 1e-9}};
}

json run_line_model(Reader& r, Context& ctx) {
  const LineGrid g = LineGrid::make(r.get<std::int64_t>("N"), r.get<double>("W"));
  const double sigma = r.get<double>("sigma");
  if (!(sigma > 0)) throw ValidationError("sigma must be positive");
  const LineFunction f =
      LineFunction::sample(g, [sigma](double u) { return cplx(std::exp(-u * u / (2 * sigma * sigma))); });
  const auto Ts = r.get<std::vector<double>>("T");
  std::vector<std::pair<double, double>> rows;
  for (double T : Ts) rows.emplace_back(T, l2_convergence_residual(f, T));
  {
    auto os = ctx.csv("convergence.csv");
    write_convergence_csv(os, rows);
  }
  bool monotone = true;
  for (size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].second < rows[i - 1].second;
  const double C = c_constant();
  const double norm = f.l2_norm();
  const double it = intertwine_check(f, r.get<double>("intertwine_t"));
  json res = json::array();
  for (const auto& [T, v] : rows) res.push_back({{"T", T}, {"residual", v}, {"relative", v / norm}});
  return {{"c_constant", C},
          {"c_constant_error", std::fabs(C - std::sqrt(kTwoPi))},
          {"norm", norm},
          {"roundtrip_error", fourier_roundtrip_error(f)},
          {"residuals", res},
          {"monotone", monotone},
          {"final_relative", rows.empty() ? 0.0 : rows.back().second / norm},
          {"intertwine_residual", it}};
}

json run_limit_dist(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const Observable f = read_observable(r, "observable", a);
  const auto Ts = r.get<std::vector<double>>("T");
  const auto N = r.get<std::int64_t>("N");
  std::vector<EmpiricalDistribution> d;
  json per_T = json::array();
  for (size_t i = 0; i < Ts.size(); ++i) {
    d.push_back(empirical_distribution(f, a, Ts[i], N, ctx.seed));
    auto os = ctx.csv("ecdf_modulus_" + std::to_string(i) + ".csv");
    write_ecdf_csv(os, d.back().modulus);
    per_T.push_back({{"T", Ts[i]},
                     {"second_moment", d.back().second_moment},
                     {"q999", d.back().modulus.quantile(0.999)}});
  }
  json ks = json::array();
  double worst = 0.0, qmin = HUGE_VAL, qmax = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    qmin = std::min(qmin, d[i].modulus.quantile(0.999));
    qmax = std::max(qmax, d[i].modulus.quantile(0.999));
    for (size_t j = i + 1; j < d.size(); ++j) {
      const double kr = ks_distance(d[i].real, d[j].real), km = ks_distance(d[i].modulus, d[j].modulus);
      worst = std::max({worst, kr, km});
      ks.push_back({{"i", i}, {"j", j}, {"real", kr}, {"modulus", km}});
    }
  }
  return {{"per_T", per_T}, {"ks", ks}, {"max_ks", worst}, {"q999_ratio", qmin > 0 ? qmax / qmin : HUGE_VAL}};
}

json run_sublevel(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const Observable f = read_observable(r, "observable", a);
  const std::vector<double> eps =
      log_grid(r.get<double>("eps_min"), r.get<double>("eps_max"), r.get<int>("eps_count"));
  SublevelOptions opt;
  const auto regime = r.get<std::string>("regime");
  if (regime == "compact")
    opt.regime = Regime::Compact;
  else if (regime == "generic")
    opt.regime = Regime::Generic;
  else
    throw ValidationError("regime must be 'compact' or 'generic'");
  opt.zeta = r.get<double>("zeta");
  const double T = r.get<double>("T");
  const SublevelReport rep = sublevel_measure(f, a, T, eps, r.get<std::int64_t>("N"), ctx.seed, opt);
  {
    auto os = ctx.csv("sublevel.csv");
    write_sublevel_csv(os, rep);
  }
  bool monotone = true;
  for (size_t k = 1; k < rep.measure.size(); ++k) monotone = monotone && rep.measure[k] >= rep.measure[k - 1];
  return {{"delta_hat", rep.delta_hat},
          {"delta_ci", {rep.delta_ci.lo, rep.delta_ci.hi}},
          {"r2", rep.r2},
          {"fit_method", rep.fit_method},
          {"fitted_points", rep.fitted.size()},
          {"monotone", monotone},
          {"regime", regime_name(rep.regime)},
          {"budget", rep.budget},
          {"budget_within_tenth_of_threshold", rep.budget <= eps.front() * rep.threshold_scale / 10.0}};
}

json run_valency(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const CharLabel label = read_label(r);
  const double T = r.get<double>("T"), rr = r.get<double>("r"), tt = r.get<double>("t");
  const int leaves = r.get<int>("leaves");
  const int samples = r.get<int>("samples");
  if (leaves < 1) throw ValidationError("leaves must be >= 1");
  struct Row {
    GroupElement x;
    double z;
    ValencyReport v;
    double cheb;
  };
  std::vector<Row> rows(leaves);
  for (int i = 0; i < leaves; ++i) {
    Row& row = rows[i];
    row.x = sample_point(Sampling::Volume, ctx.seed, i, leaves, a);
    CounterRng zr(ctx.seed ^ 0x5eedULL, static_cast<std::uint64_t>(i));
    row.z = zr.uniform() * a.lattice.central_period();
    const LeafFunction leaf(label, a, row.x, T, row.z);
    row.v = valency_bound(std::cref(leaf), rr, tt, samples);
    std::vector<double> mod(samples);
    for (int j = 0; j < samples; ++j) mod[j] = std::abs(leaf(cplx(-tt + 2 * tt * (j + 0.5) / samples, 0.0)));
    row.cheb = empirical_chebyshev_degree(mod);
  }
  auto os = ctx.csv("valency.csv");
  CsvWriter w(os, {"leaf", "x", "y", "z", "leaf_z", "M", "O", "bound", "observed", "sign_changes", "cheb_degree"});
  bool all_ok = true;
  std::vector<double> cheb;
  for (int i = 0; i < leaves; ++i) {
    const Row& row = rows[i];
    w.row(i, row.x.x, row.x.y, row.x.z, row.z, row.v.M, row.v.O, row.v.bound, row.v.observed, row.v.sign_changes,
          row.cheb);
    all_ok = all_ok && row.v.observed <= row.v.bound;
    cheb.push_back(row.cheb);
  }
  std::sort(cheb.begin(), cheb.end());
  const double med = quantile_sorted(cheb, 0.5);
  return {{"C_rt", valency_constant(rr, tt)},
          {"all_observed_within_bound", all_ok},
          {"cheb_max", cheb.back()},
          {"cheb_median", med},
          {"cheb_max_over_median", med > 0 ? cheb.back() / med : HUGE_VAL}};
}

json run_correlation(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const TimeChange alpha(read_observable(r, "alpha_observable", a), r.get<double>("eps"), a);
  const Observable h = read_observable(r, "h", a), g = read_observable(r, "g", a);
  const std::vector<double> tg = log_grid(r.get<double>("t_min"), r.get<double>("t_max"), r.get<int>("t_count"));
  const auto stretch_t = r.get<std::vector<double>>("stretch_t");
  const double band = r.get<double>("band");

  json out;
  out["alpha_min"] = alpha.alpha_min();
  out["alpha_max"] = alpha.alpha_max();
  json obs = json::array();
  for (const auto& [l, v] : coboundary_obstructions(alpha.base().z_derivative(), return_params(a)))
    obs.push_back({{"m", l.m}, {"n", l.n}, {"value", cplx_json(v)}});
  out["z_alpha_obstructions"] = obs;

  if (!stretch_t.empty()) {
    const auto sb = stretch_band(alpha, stretch_t, r.get<std::int64_t>("stretch_N"), ctx.seed);
    auto os = ctx.csv("stretch.csv");
    CsvWriter w(os, {"t", "max_ratio", "rms_ratio"});
    double lo = HUGE_VAL, hi = 0.0;
    for (const auto& p : sb) {
      w.row(p.t, p.max_ratio, p.rms_ratio);
      lo = std::min(lo, p.max_ratio);
      hi = std::max(hi, p.max_ratio);
    }
    out["stretch"] = {{"min_max_ratio", lo}, {"max_max_ratio", hi}, {"within_band", lo >= 1 / band && hi <= band}};
  }

  const CorrelationSeries cs = correlation_series(h, g, alpha, tg, r.get<std::int64_t>("N"), ctx.seed);
  {
    auto os = ctx.csv("correlation.csv");
    write_correlation_csv(os, cs);
  }
  ctx.partial = out;
  const DecayFit fit = decay_fit(cs, ctx.seed);
  out["fit"] = {{"slope", fit.slope},
                {"slope_ci", {fit.slope_ci.lo, fit.slope_ci.hi}},
                {"delta_hat", fit.delta_hat},
                {"points", fit.points},
                {"power_template", {{"delta", fit.power_delta}, {"rms", fit.power_residual}}},
                {"log_template", {{"delta", fit.log_delta}, {"rms", fit.log_residual}}}};
  return out;
}

json run_renorm_track(Reader& r, Context& ctx) {
  const Frame a = read_frame(r);
  const ExcursionRecord rec = dc_integral(a, r.get<double>("horizon"), r.get<double>("step"));
  {
    auto os = ctx.csv("excursion.csv");
    write_excursion_csv(os, rec);
  }
  double dmax = 0.0;
  for (const auto& s : rec.samples) dmax = std::max(dmax, s.delta);
  return {{"dc_value", rec.dc_value},
          {"e_value", rec.e_value},
          {"max_delta", dmax},
          {"partial_quotients", cf_partial_quotients(a, r.get<int>("cf_terms"))}};
}

json run_bench(Reader& r, Context&) {
  WeylSumSpec s;
  s.label = read_label(r);
  const Frame a = read_frame(r);
  s.K = a.lattice.K();
  s.ssp = return_params(a);
  s.y = r.get<double>("y");
  s.z = r.get<double>("z");
  s.J = r.get<std::int64_t>("J");
  const cplx par = weyl_sum(s), ser = weyl_sum_serial(s);
  return {{"S_J", cplx_json(par)}, {"serial_parallel_identical", par == ser}};
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> reg = {
      {"weyl-sum",
       "character Birkhoff sum of the skew shift with partial sums and a direct-evaluation check",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"skew_shift", nullptr, "optional {rho, sigma, y_sign}; replaces the frame's return map"},
        {"label", json{{"m", 0}, {"n", 1}}, "character (m, n), n != 0"},
        {"y", 0.0, "start y"},
        {"z", 0.37, "start z"},
        {"J", 1000000, "number of terms"},
        {"stride", 1000, "partial-sum output stride"},
        {"check_J", 1000000, "terms compared against 113-bit direct evaluation"}},
       {{"partial_sums.csv", {"j", "re", "im"}}},
       run_weyl_sum},
      {"l2-identity",
       "grid mean square and mean of S_J over y",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"label", json{{"m", 0}, {"n", 1}}, "character (m, n)"},
        {"z", 0.37, "fixed z"},
        {"J", json::array({10, 100, 1000}), "list of sum lengths"},
        {"Q", nullptr, "y-grid size; default 2^ceil(log2(4 K |n| J))"}},
       {{"l2_identity.csv", {"J", "Q", "l2", "rel_err", "mean_re", "mean_im", "mean_dist"}}},
       run_l2_identity},
      {"line-model",
       "L2 convergence in the line model with a Gaussian test function",
       {kSeedKey,
        {"N", 1 << 20, "grid size (power of two)"},
        {"W", 1024.0, "grid half-width"},
        {"sigma", 0.5, "Gaussian width, f = exp(-u^2 / (2 sigma^2))"},
        {"T", json::array({4.0, 16.0, 64.0, 256.0}), "translation lengths"},
        {"intertwine_t", std::log(2.0), "dilation parameter for the intertwining check"}},
       {{"convergence.csv", {"T", "residual"}}},
       run_line_model},
      {"limit-dist",
       "empirical distributions of T^{-1/2} I_T at several scales",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"observable", kDefaultObservable, "array of {m, n, re, im}"},
        {"T", json::array({1e4, 1e4 * 2.618033988749895, 1e4 * 6.854101966249685}), "scales"},
        {"N", 10000, "samples per scale"}},
       {{"ecdf_modulus_<i>.csv", {"value", "rank_over_n"}}},
       run_limit_dist},
      {"sublevel",
       "sublevel-set measure of |I_T| and the fitted power law",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"observable", kDefaultObservable, "array of {m, n, re, im}"},
        {"T", 1e4, "integration time"},
        {"eps_min", 1e-3, "smallest epsilon"},
        {"eps_max", 1e-1, "largest epsilon"},
        {"eps_count", 8, "log-spaced epsilon count"},
        {"N", 100000, "samples"},
        {"regime", "compact", "compact or generic"},
        {"zeta", 0.1, "log exponent offset in the generic regime"}},
       {{"sublevel.csv", {"epsilon", "measure", "ci_lo", "ci_hi"}}},
       run_sublevel},
      {"valency",
       "valency bound and Chebyshev degree of leaf functions",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"label", json{{"m", 0}, {"n", 1}}, "character (m, n)"},
        {"T", 1000.0, "integration time"},
        {"leaves", 100, "number of random leaves"},
        {"r", 9.0, "outer radius (leaf units)"},
        {"t", 1.5, "inner radius (leaf units)"},
        {"samples", 4096, "boundary samples"}},
       {{"valency.csv",
         {"leaf", "x", "y", "z", "leaf_z", "M", "O", "bound", "observed", "sign_changes", "cheb_degree"}}},
       run_valency},
      {"correlation",
       "time-changed flow: stretch band and correlation decay",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"eps", 0.25, "time-change amplitude"},
        {"alpha_observable", kDefaultObservable, "time-change profile"},
        {"h", kDefaultObservable, "first observable"},
        {"g", kDefaultObservable, "second observable"},
        {"t_min", 1.0, "smallest correlation time"},
        {"t_max", 1000.0, "largest correlation time"},
        {"t_count", 12, "log-spaced time count"},
        {"N", 100000, "samples"},
        {"stretch_t", json::array({100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0}),
         "times for the stretch band (empty to skip)"},
        {"stretch_N", 200, "samples for the stretch band"},
        {"band", 10.0, "band [1/c, c] for max |D_t| / t^{1/2}"}},
       {{"correlation.csv", {"t", "re", "im", "stderr"}}, {"stretch.csv", {"t", "max_ratio", "rms_ratio"}}},
       run_correlation},
      {"renorm-track",
       "geodesic excursion integrand along the renormalization orbit",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"horizon", 32.0, "renormalization time horizon (at most 36)"},
        {"step", kDefaultExcursionStep, "sampling step"},
        {"cf_terms", 20, "continued-fraction terms reported"}},
       {{"excursion.csv", {"t", "delta", "integrand"}}},
       run_renorm_track},
      {"bench",
       "kernel throughput and serial/parallel identity",
       {kFrameKey, kLatticeKey, kSeedKey,
        {"label", json{{"m", 0}, {"n", 1}}, "character (m, n)"},
        {"y", 0.1, "start y"},
        {"z", 0.37, "start z"},
        {"J", 100000000, "number of terms"}},
       {},
       run_bench},
  };
  return reg;
}

const Experiment* find(const std::string& kind) {
  for (const auto& e : registry())
    if (e.kind == kind) return &e;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& e : registry()) k.push_back(e.kind);
    return k;
  }();
  return kinds;
}

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json schema() {
  json s;
  s["version"] = kVersion;
  s["float_format"] = "%.17g";
  s["exit_codes"] = {{"0", "success"}, {"2", "validation failure"}, {"3", "numerical guard tripped"}};
  for (const auto& e : registry()) {
    json keys = json::object();
    for (const auto& k : e.keys) keys[k.name] = {{"default", k.fallback}, {"required", false}, {"doc", k.doc}};
    json csv = json::object();
    for (const auto& c : e.csv) csv[c.file] = c.columns;
    s["experiments"][e.kind] = {{"doc", e.doc}, {"keys", keys}, {"csv", csv}};
  }
  return s;
}

int run_experiment(const std::string& kind, const json& config, const RunOptions& opt, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Experiment* e = find(kind);
    if (!e) throw ValidationError("unknown experiment kind '" + kind + "'");
    json cfg = config.is_null() ? json::object() : config;
    Reader r(cfg, e->keys, "config");
    Context ctx;
    ctx.out = opt.out_dir;
    ctx.seed = opt.seed ? *opt.seed : r.get<std::uint64_t>("seed");
    if (opt.seed) cfg["seed"] = *opt.seed;
    set_threads(opt.threads);
    std::filesystem::create_directories(ctx.out);

    json summary;
    summary["kind"] = kind;
    summary["version"] = kVersion;
    summary["config"] = cfg;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    summary["config_hash"] = hash;
    summary["seed"] = ctx.seed;

    int code = kExitOk;
    try {
      summary["result"] = e->run(r, ctx);
    } catch (const NumericalGuard& g) {
      summary["guard"] = {{"name", g.guard()}, {"message", g.what()}};
      if (!ctx.partial.is_null()) summary["partial_result"] = ctx.partial;
      err << "numerical guard: " << g.what() << '\n';
      code = kExitGuard;
    }
    std::ofstream(ctx.out / "summary.json") << summary.dump(2) << '\n';
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(ctx.out / "timing.json") << json{{"wall_seconds", wall}, {"threads", threads()}}.dump(2) << '\n';
    if (!opt.quiet && code == kExitOk) err << kind << ": done in " << wall << " s, output in " << ctx.out << '\n';
    return code;
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericalGuard& g) {
    err << "numerical guard: " << g.what() << '\n';
    return kExitGuard;
  }
}

int run_experiment_file(const std::string& kind, const std::string& config_path, const RunOptions& opt,
                        std::ostream& err) {
  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      err << "invalid configuration: cannot open " << config_path << '\n';
      return kExitInvalid;
    }
    try {
      is >> cfg;
    } catch (const json::exception& e) {
      err << "invalid configuration: " << e.what() << '\n';
      return kExitInvalid;
    }
  }
  return run_experiment(kind, cfg, opt, err);
}

}  // namespace nilflow::lab
