#include "nct/suite.hpp"

#include "nct/curvature.hpp"
#include "nct/gns.hpp"
#include "nct/heisenberg.hpp"
#include "nct/kernels.hpp"
#include "nct/psymbol.hpp"
#include "nct/udgrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace nct {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::mt19937_64 criterion_rng(const json &cfg, int id) {
  return std::mt19937_64(cfg.at("seed").get<std::uint64_t>() + 1000003ULL * static_cast<std::uint64_t>(id));
}

double rel(double x, double y, double floor) { return std::abs(x - y) / std::max(std::abs(y), floor); }

Report start(int id, const json &cfg) {
  Report r;
  r.command = "criterion-" + std::to_string(id);
  r.config = cfg;
  r.seed = cfg.at("seed").get<std::uint64_t>();
  return r;
}

double least_squares_slope(const std::vector<double> &x, const std::vector<double> &y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- criterion 1

using mpf = boost::multiprecision::cpp_bin_float_50;

mpf htilde_closed_mp(const mpf &s, const mpf &t) {
  const mpf u = s + t;
  const mpf num = t * u * cosh(s) - s * u * cosh(t) + (s - t) * (u + sinh(s) + sinh(t) - sinh(u));
  return 4 * num / (s * t * u * u * sinh(s / 2) * sinh(t / 2) * sinh(u / 2));
}

// Htilde0 in 50 digits; on the singular lines by Richardson extrapolation of symmetric averages.
double htilde_oracle(double s, double t) {
  const mpf S(s), T(t);
  if (s != 0.0 && t != 0.0 && s + t != 0.0) return static_cast<double>(htilde_closed_mp(S, T));
  const mpf d1("0.3141592653589793"), d2("0.2718281828459045");
  std::vector<mpf> g;
  mpf delta("1e-3");
  for (int k = 0; k < 4; ++k, delta /= 2)
    g.push_back((htilde_closed_mp(S + delta * d1, T + delta * d2) + htilde_closed_mp(S - delta * d1, T - delta * d2)) / 2);
  for (int level = 1; level < 4; ++level) {
    const mpf f = pow(mpf(4), level);
    for (int k = 3; k >= level; --k) g[k] = (f * g[k] - g[k - 1]) / (f - 1);
  }
  return static_cast<double>(g[3]);
}

Report criterion_fi(const json &cfg) {
  Stopwatch sw;
  Report r = start(1, cfg);
  const json &c = cfg.at("identities");
  const double step = c.at("fi_step"), box = c.at("fi_box");
  const int n = static_cast<int>(std::lround(2.0 * box / step));
  Table tab{"fi_grid", {"s1", "s2", "fi_combination", "minus_half_htilde0", "residual"}, {}};
  double worst_fi = 0.0, worst_lib = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double s = -box + i * step, t = -box + j * step;
      const double oracle = htilde_oracle(s, t);
      const double fi = fi_combination(s, t);
      const double res = std::abs(fi + 0.5 * oracle);
      worst_fi = std::max(worst_fi, res);
      worst_lib = std::max(worst_lib, std::abs(eval_Htilde0(s, t) - oracle));
      tab.rows.push_back({s, t, fi, -0.5 * oracle, res});
    }
  r.check("c1.fi_residual", worst_fi, c.at("fi_tol"));
  r.check("c1.htilde0_vs_oracle", worst_lib, c.at("fi_tol"));
  r.check("c1.runtime_s", sw.seconds(), c.at("fi_runtime_s"));
  r.results["c1"] = {{"grid_points", tab.rows.size()}, {"max_residual", worst_fi}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 2

std::vector<long double> bernoulli_akiyama_tanigawa(int nmax) {
  std::vector<long double> a(nmax + 1), b(nmax + 1);
  for (int m = 0; m <= nmax; ++m) {
    a[m] = 1.0L / (m + 1);
    for (int j = m; j >= 1; --j) a[j - 1] = j * (a[j - 1] - a[j]);
    b[m] = a[0];
  }
  return b;
}

Report criterion_bernoulli(const json &cfg) {
  Stopwatch sw;
  Report r = start(2, cfg);
  const json &c = cfg.at("identities");
  const int count = c.at("bern_terms");
  const auto bern = bernoulli_akiyama_tanigawa(2 * count);
  const auto &lib = ktilde0_taylor();
  Table tab{"bernoulli", {"n", "library", "oracle", "difference"}, {}};
  double worst = 0.0;
  long double fact = 1.0L;
  for (int n = 1; n <= count; ++n) {
    fact *= (2 * n - 1) * (2 * n);
    const double oracle = static_cast<double>(8.0L * bern[2 * n] / fact);
    const double diff = std::abs(lib[n - 1] - oracle);
    worst = std::max(worst, diff);
    tab.rows.push_back({double(n), lib[n - 1], oracle, diff});
  }
  r.check("c2.taylor_vs_bernoulli", worst, c.at("bern_tol"));

  const double series0 = eval_Ktilde0_series(0.0);
  std::vector<double> g;
  for (int k = 0; k < 4; ++k) g.push_back(eval_Ktilde0_closed(0.4 / std::pow(2.0, k)));
  for (int level = 1; level < 4; ++level) {
    const double f = std::pow(4.0, level);
    for (int k = 3; k >= level; --k) g[k] = (f * g[k] - g[k - 1]) / (f - 1);
  }
  r.check("c2.ktilde0_at_0_series", std::abs(series0 - 2.0 / 3.0), c.at("bern_tol"));
  r.check("c2.ktilde0_at_0_closed_limit", std::abs(g[3] - 2.0 / 3.0), c.at("bern_tol"));
  r.check("c2.runtime_s", sw.seconds(), c.at("bern_runtime_s"));
  r.results["c2"] = {{"ktilde0_series_at_0", series0}, {"ktilde0_closed_limit", g[3]}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 3

Report criterion_gauss_bonnet(const json &cfg) {
  Stopwatch sw;
  Report r = start(3, cfg);
  const json &c = cfg.at("curvature");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 3);
  const int N = c.at("N"), Nf = c.at("N_fine");
  Table tab{"gauss_bonnet", {"dilaton", "l1", "residual_N", "residual_N_fine"}, {}};
  double worst = 0.0, ratio = 0.0;
  for (int k = 0; k < c.at("dilatons").get<int>(); ++k) {
    const TorusElement h = random_self_adjoint(p, c.at("radius"), c.at("l1"), rng);
    const double r0 = modular_curvature(h, N).gauss_bonnet_residual;
    const double r1 = modular_curvature(h, Nf).gauss_bonnet_residual;
    worst = std::max(worst, r0);
    ratio = std::max(ratio, r1 / std::max(r0, 1e-13));
    tab.rows.push_back({double(k), h.l1_norm(), r0, r1});
  }
  r.check("c3.gauss_bonnet_residual", worst, c.at("gb_tol"));
  r.check("c3.refinement_ratio", ratio, 1.0);
  r.check("c3.runtime_s", sw.seconds(), c.at("runtime_s"));
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 4

std::vector<TorusElement> a2_probes(const AlgebraParams &p) {
  return {TorusElement::unit(p), TorusElement::monomial(p, 1, 0) + TorusElement::monomial(p, -1, 0)};
}

Report criterion_three_way(const json &cfg) {
  Stopwatch sw;
  Report r = start(4, cfg);
  const json &c = cfg.at("parametrix");
  const AlgebraParams p = config_params(cfg);
  const FrozenConventions conv = config_conventions(cfg);
  auto rng = criterion_rng(cfg, 4);
  const double scale = kPi / p.tau.imag();
  const double fit_tol = c.at("fit_tol"), sym_tol = c.at("symbol_tol");
  // An absolute a2 error equal to the flat-case tolerance counts as fit_tol relative.
  const double fit_floor = cfg.at("heat").at("flat_a2_factor").get<double>() * scale / fit_tol;
  const double sym_floor = 1e-6 * scale;
  HeatFitConfig window;
  window.tmin_factor = c.at("fit_tmin_factor");
  window.span = c.at("fit_span");
  const auto probes = a2_probes(p);
  const std::vector<std::string> names = {"1", "U1+U1*"};
  Table tab{"a2", {"dilaton", "probe", "heat_fit", "symbol", "closed"}, {}};
  double fc = 0.0, fs = 0.0, sc = 0.0;
  json rows = json::array();
  for (int k = 0; k < c.at("dilatons").get<int>(); ++k) {
    const TorusElement h = random_self_adjoint(p, c.at("radius"), c.at("l1"), rng);
    HeatSpectrum spec(laplacian(LaplacianKind::Conformal, h, 1.0, GnsTruncation{c.at("N_heat")}));
    const Dilaton d = dilaton_factors(h);
    auto ctx = make_context(p);
    const Parametrix par = resolvent_parametrix(laplace_kdk(d.k), ctx);
    SymbolEvaluator ev(ctx, GnsTruncation{c.at("N_symbol")});
    const A2Integration sym = a2_by_integration(par, probes, ev, QuadratureConfig{}, conv);
    const TorusElement K = modular_curvature(h, c.at("N_curvature")).density;
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double fit = fit_heat_coefficients(spec, probes[j], window).a2;
      const double closed = trace0(multiply(probes[j], K)).real();
      fc = std::max(fc, rel(fit, closed, fit_floor));
      fs = std::max(fs, rel(fit, sym.values[j], fit_floor));
      sc = std::max(sc, rel(sym.values[j], closed, sym_floor));
      tab.rows.push_back({double(k), double(j), fit, sym.values[j], closed});
      rows.push_back({{"dilaton", k}, {"probe", names[j]}, {"heat_fit", fit}, {"symbol", sym.values[j]},
                      {"closed", closed}, {"quadrature_error", sym.quadrature_error}});
    }
  }
  r.check("c4.fit_vs_closed", fc, fit_tol);
  r.check("c4.fit_vs_symbol", fs, fit_tol);
  r.check("c4.symbol_vs_closed", sc, sym_tol);
  r.check("c4.runtime_s", sw.seconds(), c.at("a2_runtime_s"));
  r.results["c4"] = {{"a2", rows}, {"fit_floor", fit_floor}, {"symbol_floor", sym_floor},
                     {"conventions", {{"contour_sign", conv.contour_sign}, {"plancherel", conv.plancherel},
                                      {"source", conv.source}}}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 5

Report criterion_flat(const json &cfg) {
  Stopwatch sw;
  Report r = start(5, cfg);
  const json &c = cfg.at("heat");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 5);
  const GnsTruncation tr{c.at("N")};
  const double scale = kPi / p.tau.imag();
  const double a2_tol = c.at("flat_a2_factor").get<double>() * scale;
  const TorusElement one = TorusElement::unit(p);
  const HeatFit flat = fit_heat_coefficients(HeatSpectrum(laplacian(LaplacianKind::Flat, TorusElement(p), 1.0, tr)), one);
  r.check("c5.flat_a0_relative", std::abs(flat.a0 - scale) / scale, c.at("flat_a0_tol"));
  r.check("c5.flat_a2", std::abs(flat.a2), a2_tol);

  const TorusElement h = random_self_adjoint(p, 1, c.at("family_l1"), rng);
  Table tab{"family_s", {"s", "a0", "a2", "stability"}, {}};
  double lo = INFINITY, hi = -INFINITY;
  for (double s : c.at("family_s").get<std::vector<double>>()) {
    const HeatFit f = fit_heat_coefficients(HeatSpectrum(laplacian(LaplacianKind::FamilyS, h, s, tr)), one);
    lo = std::min(lo, f.a2);
    hi = std::max(hi, f.a2);
    tab.rows.push_back({s, f.a0, f.a2, f.stability});
  }
  r.check("c5.family_s_a2_spread", hi - lo, a2_tol);
  r.check("c5.runtime_s", sw.seconds(), c.at("flat_runtime_s"));
  r.results["c5"] = {{"flat_a0", flat.a0}, {"flat_a2", flat.a2}, {"pi_over_im_tau", scale},
                     {"flat_fit_residual", flat.residual}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 6

Report criterion_zeta(const json &cfg) {
  Stopwatch sw;
  Report r = start(6, cfg);
  const json &c = cfg.at("heat");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 6);
  const GnsTruncation tr{c.at("N")};
  const TorusElement one = TorusElement::unit(p);
  Table tab{"zeta", {"dilaton", "zeta0", "projection", "projection_eigen", "a2"}, {}};
  double zworst = 0.0, pworst = 0.0;
  for (int k = 0; k < c.at("zeta_dilatons").get<int>(); ++k) {
    const TorusElement h = random_self_adjoint(p, 1, c.at("zeta_l1"), rng);
    const HeatSpectrum spec(laplacian(LaplacianKind::Conformal, h, 1.0, tr));
    const HeatFit fit = fit_heat_coefficients(spec, one);
    const ZetaZero z = zeta_at_zero(h, one, fit, tr);
    const double pe = kernel_projection_eigen(spec, one);
    zworst = std::max(zworst, std::abs(z.value + 1.0));
    pworst = std::max(pworst, std::abs(z.projection - pe));
    tab.rows.push_back({double(k), z.value, z.projection, pe, fit.a2});
  }
  r.check("c6.zeta_plus_one", zworst, c.at("zeta_tol"));
  r.check("c6.projection_vs_eigen", pworst, c.at("projection_tol"));
  r.check("c6.runtime_s", sw.seconds(), c.at("zeta_runtime_s"));
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 7

Report criterion_gradient(const json &cfg) {
  Stopwatch sw;
  Report r = start(7, cfg);
  const json &c = cfg.at("gradient");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 7);
  const int N = c.at("N");
  const int radius = c.at("radius");
  const double l1 = c.at("l1"), eps = c.at("fd_step");

  const TorusElement h = random_self_adjoint(p, radius, l1, rng);
  const TorusElement g = grad_F(h, N);
  Table tab{"gradient", {"direction", "analytic", "finite_difference", "relative"}, {}};
  double gworst = 0.0;
  for (int k = 0; k < c.at("directions").get<int>(); ++k) {
    const TorusElement a = random_self_adjoint(p, radius, 1.0, rng);
    const double fd = (F_value(h + eps * a, N) - F_value(h - eps * a, N)) / (2.0 * eps);
    const double an = trace0(multiply(a, g)).real();
    const double e = rel(an, fd, 1e-8);
    gworst = std::max(gworst, e);
    tab.rows.push_back({double(k), an, fd, e});
  }
  r.check("c7.gradient_vs_fd", gworst, c.at("fd_tol"));

  const double f0 = F_value(TorusElement(p), N);
  std::uniform_real_distribution<double> ul(0.2, 1.0);
  double margin = INFINITY;
  for (int k = 0; k < c.at("positivity_samples").get<int>(); ++k) {
    const TorusElement hk = random_self_adjoint(p, radius, ul(rng), rng);
    margin = std::min(margin, F_value(hk, N) - f0);
  }
  r.check("c7.min_F_minus_F0", margin, 0.0, Relation::AtLeast);

  const double shift = c.at("scale_shift");
  r.check("c7.scale_invariance", std::abs(F_value(h + TorusElement::unit(p, shift), N) - F_value(h, N)),
          c.at("scale_tol"));

  double kmin = INFINITY;
  for (double s = -20.0; s <= 20.0 + 1e-12; s += 0.05) kmin = std::min(kmin, eval_Kplus(s));
  r.check("c7.min_Kplus", kmin, 0.0, Relation::AtLeast);
  r.check("c7.runtime_s", sw.seconds(), c.at("runtime_s"));
  r.results["c7"] = {{"F0", f0}, {"min_F_minus_F0", margin}, {"min_Kplus", kmin}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 8

Report criterion_twisted(const json &cfg) {
  Stopwatch sw;
  Report r = start(8, cfg);
  const json &c = cfg.at("parametrix");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 8);
  const TwistData B = TwistData::from_b12(c.at("twist_b12"));
  const Grid2D grid{c.at("twist_grid"), c.at("twist_box")};
  const Field u = gaussian_packet(grid, 0.3, -0.2, 1.0, 0.5, -0.7, {1.0, 0.5});
  const CurvatureRoutes routes = curvature_identity_routes(B, u, grid);
  r.check("c8.curvature_routes", std::max({routes.commutator, routes.symbol, routes.expansion}), c.at("routes_tol"));
  r.check("c8.symbol_product", symbol_product_residual(B), c.at("symbol_product_tol"));

  const TwistData Z;
  double degen = 0.0;
  const std::vector<std::pair<Multi, Multi>> pairs = {{{1, 0}, {1, 1}}, {{0, 1}, {1, 0}}, {{1, 0}, {0, 2}}, {{0, 1}, {2, 0}}};
  for (const auto &[g1, g2] : pairs) {
    const Field a = ud_apply({g1[0] + g2[0], g1[1] + g2[1]}, u, grid, Z);
    const Field b = ud_apply(g1, ud_apply(g2, u, grid, Z), grid, Z);
    degen = std::max(degen, (a - b).abs().maxCoeff() / a.abs().maxCoeff());
  }
  r.check("c8.untwisted_composition", degen, c.at("degeneration_tol"));

  const TorusElement h = random_self_adjoint(p, c.at("radius"), c.at("l1"), rng);
  auto ctx = make_context(p);
  const Parametrix par = resolvent_parametrix(laplace_kdk(dilaton_factors(h).k), ctx);
  SymbolEvaluator ev(ctx, GnsTruncation{c.at("N_symbol")});
  double hom = 0.0;
  json homj = json::array();
  for (const auto &hc : homogeneity_report(par, ev)) {
    hom = std::max(hom, hc.residual);
    homj.push_back(to_json(hc));
  }
  r.check("c8.homogeneity", hom, c.at("homogeneity_tol"));
  const SlopeFit sl = parametrix_residual_slope(par, ev, {4, 8, 16, 32});
  r.check("c8.residual_slope_plus_3", sl.slope + 3.0, c.at("slope_window_tol"));
  r.check("c8.runtime_s", sw.seconds(), c.at("twist_runtime_s"));
  Table tab{"parametrix_residual", {"r", "residual"}, {}};
  for (std::size_t i = 0; i < sl.r.size(); ++i) tab.rows.push_back({sl.r[i], sl.residual[i]});
  r.results["c8"] = {{"routes", {{"commutator", routes.commutator}, {"symbol", routes.symbol},
                                 {"expansion", routes.expansion}}},
                     {"residual_slope", sl.slope},
                     {"homogeneity", homj}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 9

Report criterion_trace_formula(const json &cfg) {
  Stopwatch sw;
  Report r = start(9, cfg);
  const json &c = cfg.at("heat");
  const AlgebraParams p = config_params(cfg);
  auto rng = criterion_rng(cfg, 9);

  const int R = c.at("lattice_radius");
  std::map<FourierIndex, TorusElement> table;
  for (int m = -R; m <= R; ++m)
    for (int n = -R; n <= R; ++n) table[{m, n}] = random_element(p, 1, rng);
  const LatticeSymbol f = [&](double x, double y) {
    const double mx = std::round(x), my = std::round(y);
    if (mx != x || my != y) return TorusElement(p);
    auto it = table.find({static_cast<int>(mx), static_cast<int>(my)});
    return it == table.end() ? TorusElement(p) : it->second;
  };
  const GnsMatrix op = op_matrix(f, p, GnsTruncation{R + 2});
  cplx sum = 0.0;
  for (const auto &[k, v] : table) sum += trace0(v);
  r.check("c9.lattice_trace", std::abs(op.data.trace() - sum) / std::abs(sum), c.at("lattice_tol"));

  Table tab{"gaussian_family", {"lambda", "sum_minus_integral", "poisson"}, {}};
  std::vector<double> lx, ly;
  double poisson = 0.0;
  const TorusElement decor = TorusElement::unit(p) + 0.25 * (TorusElement::monomial(p, 1, 0) + TorusElement::monomial(p, -1, 0));
  for (double lam : c.at("gaussian_scales").get<std::vector<double>>()) {
    const OpTrace t = op_trace([&](double x, double y) { return std::exp(-(x * x + y * y) / (lam * lam)) * decor; },
                               c.at("gaussian_box"), 1e-13);
    double s = 1.0;
    for (int k = 1; k < 20; ++k) s += 2.0 * std::exp(-kPi * kPi * lam * lam * k * k);
    const double pred = kPi * lam * lam * (s * s - 1.0);
    const double d = t.difference.real();
    poisson = std::max(poisson, std::abs(d - pred) / std::abs(pred));
    lx.push_back(std::log(lam));
    ly.push_back(std::log(std::abs(d)));
    tab.rows.push_back({lam, d, pred});
  }
  const double slope = least_squares_slope(lx, ly);
  r.check("c9.poisson_prediction", poisson, c.at("poisson_tol"));
  r.check("c9.decay_slope", slope, c.at("decay_slope"));
  r.check("c9.runtime_s", sw.seconds(), c.at("trace_runtime_s"));
  r.results["c9"] = {{"decay_slope", slope}};
  r.tables.push_back(std::move(tab));
  return r;
}

// ---------------------------------------------------------------- criterion 10

HeisenbergSection random_section(const SectionGrid &g, double width, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Packet {
    double t0, w, k;
    cplx amp;
  };
  std::vector<std::vector<Packet>> packets(g.comps);
  for (auto &ps : packets)
    for (int k = 0; k < 2; ++k) ps.push_back({0.5 * u(rng), 1.0 + 0.3 * u(rng), 0.5 * u(rng), {u(rng), u(rng)}});
  return HeisenbergSection::sample(g, [&](double t, int a) {
    cplx v = 0.0;
    for (const Packet &q : packets[a])
      v += q.amp * std::exp(-kPi * q.w * (t - q.t0) * (t - q.t0) / width) * std::exp(cplx(0.0, 2.0 * kPi * q.k * t));
    return v;
  });
}

double max_abs(const HeisenbergSection &f) { return f.values.cwiseAbs().maxCoeff(); }
double distance(const HeisenbergSection &a, const HeisenbergSection &b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

// Valued inner products with the cutoff raised until the outer ring is negligible.
template <class F>
TorusElement with_cutoff(F &&f, int start, int stop) {
  for (int M = start;; M += 6) {
    try {
      return f(M);
    } catch (const CutoffTooSmall &) {
      if (M + 6 > stop) throw;
    }
  }
}

double commutator_residual(const HeisenbergParams &p, const SectionGrid &g, const std::function<cplx(double, int)> &s) {
  const HeisenbergSection f = HeisenbergSection::sample(g, s);
  HeisenbergSection c = connection(connection(f, p, 2), p, 1);
  c.values -= connection(connection(f, p, 1), p, 2).values;
  c.values -= cplx(0.0, 2.0 * kPi * p.slope()) * f.values;
  return c.values.cwiseAbs().maxCoeff() / max_abs(f);
}

Report criterion_heisenberg(const json &cfg) {
  Stopwatch sw;
  Report r = start(10, cfg);
  const json &c = cfg.at("heisenberg");
  const AlgebraParams ap = config_params(cfg);
  const cplx tau = ap.tau;
  auto rng = criterion_rng(cfg, 10);
  const double L = c.at("L");
  const int G = c.at("G");
  const int pairs = c.at("pairs");
  const int ladder = c.at("ladder_levels");

  double relations = 0.0, inner_traces = 0.0, assoc = 0.0, comm = 0.0, conv = 0.0, lad = 0.0, spacing = 0.0;
  double flat_a2 = 0.0, flat_zero = 0.0, morita = 0.0, jerr = 0.0;
  json modules = json::array();
  Table ladder_tab{"ladder", {"degree", "level", "grid", "oracle"}, {}};
  for (const auto &m : c.at("modules")) {
    const HeisenbergParams p = HeisenbergParams::make(m[0], m[1], m[2], m[3], ap.theta);
    const SectionGrid g{L, G, p.components()};
    const double width = std::abs(p.rank()) / p.components();

    for (int k = 0; k < pairs; ++k) {
      const HeisenbergSection f1 = random_section(g, width, rng), f2 = random_section(g, width, rng);
      const double scale = max_abs(f1);
      HeisenbergSection A = act_right(act_right(f1, p, 2), p, 1), B = act_right(act_right(f1, p, 1), p, 2);
      B.values *= std::exp(cplx(0.0, 2.0 * kPi * p.theta));
      relations = std::max(relations, distance(A, B) / scale);
      A = act_left(act_left(f1, p, 1), p, 2);
      B = act_left(act_left(f1, p, 2), p, 1);
      B.values *= std::exp(cplx(0.0, 2.0 * kPi * p.theta_prime()));
      relations = std::max(relations, distance(A, B) / scale);
      for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
          relations = std::max(relations,
                               distance(act_left(act_right(f1, p, j), p, i), act_right(act_left(f1, p, i), p, j)) / scale);

      const TorusElement left = with_cutoff([&](int M) { return valued_inner_left(f2, f1, p, tau, M); }, 10, 40);
      const TorusElement right = with_cutoff([&](int M) { return valued_inner_right(f1, f2, p, tau, M); }, 10, 40);
      const cplx mid = l2_inner(f1, f2);
      const double norm = std::sqrt(std::abs(l2_inner(f1, f1) * l2_inner(f2, f2)));
      inner_traces = std::max({inner_traces, std::abs(std::abs(p.rank()) * trace0(left) - mid) / norm,
                          std::abs(trace0(right) - mid) / norm});
      if (k < 3) {
        const HeisenbergSection f3 = random_section(g, width, rng);
        const TorusElement x = with_cutoff([&](int M) { return valued_inner_left(f1, f2, p, tau, M); }, 10, 40);
        const TorusElement y = with_cutoff([&](int M) { return valued_inner_right(f2, f3, p, tau, M); }, 10, 40);
        assoc = std::max(assoc, distance(apply_left(x, f3, p), apply_right(f1, y, p)) /
                                    (max_abs(f1) * std::sqrt(std::abs(l2_inner(f2, f2) * l2_inner(f3, f3)))));
      }
    }

    const auto gauss = [&](double t, int a) {
      return std::exp(-kPi * (t - 0.2) * (t - 0.2) / width) * cplx(1.0 + 0.5 * a, 0.1 * t);
    };
    const double r0 = commutator_residual(p, g, gauss);
    const double r1 = commutator_residual(p, SectionGrid{L, 2 * G, p.components()}, gauss);
    comm = std::max(comm, r0);
    conv = std::max(conv, r1 / std::max(r0 / 4.0, 1e-12));

    const ModuleOperators ops = module_operators(p, tau, g);
    const HermitianEigen e = eigh(ops.dE.adjoint() * ops.dE);
    const RVec oracle = hermite_oracle(p.slope(), tau, ladder);
    std::vector<double> levels;
    for (int i = 0; i < e.values.size() && static_cast<int>(levels.size()) < ladder * p.components(); ++i)
      if (edge_mass(e.vectors.col(i), g) < 1e-6) levels.push_back(e.values(i));
    const double kappa = std::abs(oscillator_kappa(p, tau));
    if (static_cast<int>(levels.size()) < ladder * p.components()) lad = INFINITY;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double o = oracle(static_cast<int>(i) / p.components());
      lad = std::max(lad, std::abs(levels[i] - o) / std::max(std::abs(o), kappa));
      ladder_tab.rows.push_back({double(p.degree()), double(i), levels[i], o});
    }
    for (int i = 1; i + 1 < ladder && (i + 1) * p.components() < static_cast<int>(levels.size()); ++i) {
      const double d0 = levels[p.components()] - levels[0];
      const double di = levels[(i + 1) * p.components()] - levels[i * p.components()];
      spacing = std::max(spacing, std::abs(di - d0) / d0);
    }

    const AlgebraParams hp{ap.theta, tau};
    const MoritaReport flat = morita_curvature_check(TorusElement(hp), p, tau, L, G);
    const HeisenbergParams q = p.inverse();
    const double w = q.rank() * q.rank() * std::abs(oscillator_kappa(q, tau));
    // Constant term of the exact trace: remove the 1/t pole, then Richardson in t.
    const auto regular = [&](double t) { return flat_oscillator_heat_trace(q, tau, t) - q.components() / (t * w); };
    const double t = 1e-3 / w;
    const double g1 = regular(t), g2 = regular(t / 2), g4 = regular(t / 4);
    const double constant = (8.0 * g4 - 6.0 * g2 + g1) / 3.0;
    flat_a2 = std::max(flat_a2, std::abs(flat.probes.at(0).a2 - constant) / std::max(std::abs(constant), 1e-3));
    flat_zero = std::max(flat_zero, std::abs(flat.probes.at(1).a2));

    const TorusElement h = random_self_adjoint(hp, 1, c.at("morita_l1"), rng);
    const MoritaReport conf = morita_curvature_check(h, p, tau, L, G);
    morita = std::max(morita, conf.max_deviation);

    const SectionGrid gq{L, G, q.components()};
    for (int k = 0; k < 3; ++k) {
      const HeisenbergSection f = random_section(g, width, rng);
      const HeisenbergSection J = j_transpose(f, p, gq);
      jerr = std::max(jerr, distance(j_transpose(J, q, g), f) / max_abs(f));
      for (int j = 1; j <= 2; ++j)
        jerr = std::max(jerr, distance(j_transpose(act_right(f, p, j), p, gq), act_left(J, q, j, -1)) / max_abs(f));
    }

    modules.push_back({{"g", {p.a, p.b, p.c, p.d}},
                       {"commutator_G", r0},
                       {"commutator_2G", r1},
                       {"flat_constant_exact", constant},
                       {"flat_constant_fit", flat.probes.at(0).a2},
                       {"morita", to_json(conf)}});
  }
  r.check("c10.relations", relations, c.at("relation_tol"));
  r.check("c10.inner_traces", inner_traces, c.at("relation_tol"));
  r.check("c10.associativity", assoc, c.at("relation_tol"));
  r.check("c10.commutator", comm, c.at("commutator_tol"));
  r.check("c10.commutator_refinement_ratio", conv, 1.0);
  r.check("c10.ladder_vs_oracle", lad, c.at("ladder_tol"));
  r.check("c10.ladder_spacing", spacing, c.at("ladder_tol"));
  r.check("c10.flat_a2_constant", flat_a2, c.at("flat_a2_tol"));
  r.check("c10.flat_a2_traceless_probe", flat_zero, c.at("flat_a2_tol"));
  r.check("c10.morita_deviation", morita, c.at("morita_tol"));
  r.check("c10.transpose", jerr, c.at("j_tol"));
  r.check("c10.runtime_s", sw.seconds(), c.at("runtime_s"));
  r.results["c10"] = {{"modules", modules}};
  r.tables.push_back(std::move(ladder_tab));
  return r;
}

// ---------------------------------------------------------------- configuration

bool is_tolerance_key(const std::string &k) {
  return k.size() > 4 && (k.ends_with("_tol") || k.ends_with("runtime_s"));
}

void check_types(const json &def, const json &user, const std::string &path) {
  if (def.is_number_integer() && !user.is_number_integer())
    throw ConfigError("expected an integer for " + path);
  if (def.is_number_float() && !user.is_number()) throw ConfigError("expected a number for " + path);
  if (def.is_string() && !user.is_string()) throw ConfigError("expected a string for " + path);
  if (def.is_boolean() && !user.is_boolean()) throw ConfigError("expected a boolean for " + path);
  if (def.is_array()) {
    if (!user.is_array()) throw ConfigError("expected an array for " + path);
    if (!def.empty())
      for (const auto &e : user) check_types(def.front(), e, path + "[]");
  }
}

void merge_into(json &out, const json &user, const std::string &path) {
  if (!user.is_object()) throw ConfigError("expected an object for " + (path.empty() ? "config" : path));
  for (const auto &[k, v] : user.items()) {
    const std::string key = path.empty() ? k : path + "." + k;
    if (!out.contains(k)) throw ConfigError("unknown config key " + key);
    if (out[k].is_object()) {
      merge_into(out[k], v, key);
      continue;
    }
    check_types(out[k], v, key);
    out[k] = out[k].is_number_float() ? json(v.get<double>()) : v;
  }
}

void check_positive(const json &j, const std::string &path) {
  for (const auto &[k, v] : j.items()) {
    const std::string key = path.empty() ? k : path + "." + k;
    if (v.is_object()) check_positive(v, key);
    else if (is_tolerance_key(k) && !(v.is_number() && v.get<double>() > 0.0))
      throw ConfigError("tolerance " + key + " must be positive");
  }
}

}  // namespace

json default_config() {
  return {
      {"seed", 20241019},
      {"theta", 0.6180339887498949},
      {"tau", {0.3, 1.1}},
      {"conventions", ""},
      {"identities",
       {{"fi_box", 6.0}, {"fi_step", 0.25}, {"fi_tol", 1e-10}, {"fi_runtime_s", 5.0},
        {"bern_terms", 6}, {"bern_tol", 1e-9}, {"bern_runtime_s", 1.0}}},
      {"curvature",
       {{"dilatons", 10}, {"radius", 2}, {"l1", 1.0}, {"N", 16}, {"N_fine", 32}, {"gb_tol", 1e-7},
        {"runtime_s", 120.0}}},
      {"heat",
       {{"N", 16}, {"flat_a0_tol", 1e-3}, {"flat_a2_factor", 2e-3}, {"family_s", {0.0, 0.5, 1.0}},
        {"family_l1", 0.5}, {"flat_runtime_s", 180.0}, {"zeta_dilatons", 3}, {"zeta_l1", 0.5},
        {"zeta_tol", 5e-2}, {"projection_tol", 1e-8}, {"zeta_runtime_s", 300.0}, {"lattice_radius", 3},
        {"lattice_tol", 1e-12}, {"gaussian_scales", {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}}, {"gaussian_box", 10},
        {"poisson_tol", 1e-6}, {"decay_slope", -6.0}, {"trace_runtime_s", 60.0}}},
      {"parametrix",
       {{"dilatons", 3}, {"radius", 1}, {"l1", 0.5}, {"N_heat", 24}, {"N_symbol", 8}, {"N_curvature", 16},
        {"fit_tmin_factor", 80.0}, {"fit_span", 4.0},
        {"fit_tol", 5e-2}, {"symbol_tol", 1e-3}, {"a2_runtime_s", 900.0}, {"twist_b12", 0.37},
        {"twist_grid", 128}, {"twist_box", 8.0}, {"routes_tol", 1e-8}, {"symbol_product_tol", 1e-14},
        {"degeneration_tol", 1e-12}, {"homogeneity_tol", 1e-9}, {"slope_window_tol", 0.2},
        {"twist_runtime_s", 120.0}}},
      {"gradient",
       {{"N", 16}, {"radius", 2}, {"l1", 1.0}, {"directions", 10}, {"fd_step", 1e-4}, {"fd_tol", 1e-5},
        {"positivity_samples", 20}, {"scale_shift", 0.7}, {"scale_tol", 1e-9}, {"runtime_s", 300.0}}},
      {"heisenberg",
       {{"L", 12.0}, {"G", 512}, {"modules", {{0, -1, 1, 0}, {1, 0, 2, 1}}}, {"pairs", 10},
        {"relation_tol", 1e-7}, {"commutator_tol", 1e-8}, {"ladder_levels", 10}, {"ladder_tol", 1e-6},
        {"flat_a2_tol", 1e-3}, {"morita_l1", 0.4}, {"morita_tol", 0.1}, {"j_tol", 1e-7},
        {"runtime_s", 600.0}}},
  };
}

json merge_config(const json &defaults, const json &user) {
  json out = defaults;
  if (!user.is_null()) merge_into(out, user, "");
  check_positive(out, "");
  try {
    config_params(out);
  } catch (const std::exception &e) {
    throw ConfigError(std::string("invalid algebra parameters: ") + e.what());
  }
  for (const auto &m : out.at("heisenberg").at("modules")) {
    if (m.size() != 4) throw ConfigError("heisenberg.modules entries must be [a, b, c, d]");
    try {
      HeisenbergParams::make(m[0], m[1], m[2], m[3], out.at("theta"));
    } catch (const std::exception &e) {
      throw ConfigError(std::string("invalid heisenberg module: ") + e.what());
    }
  }
  return out;
}

json load_config(const std::filesystem::path &path) {
  if (path.empty()) return merge_config(default_config(), json());
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return merge_config(default_config(), user);
}

AlgebraParams config_params(const json &cfg) {
  AlgebraParams p;
  p.theta = cfg.at("theta").get<double>();
  const json &t = cfg.at("tau");
  if (!t.is_array() || t.size() != 2) throw ConfigError("tau must be [re, im]");
  p.tau = cplx(t[0].get<double>(), t[1].get<double>());
  p.validate();
  return p;
}

const std::vector<std::string> &suite_names() {
  static const std::vector<std::string> names = {"identities", "curvature", "heat", "parametrix", "heisenberg",
                                                 "gradient"};
  return names;
}

std::vector<int> suite_criteria(const std::string &name) {
  if (name == "identities") return {1, 2};
  if (name == "curvature") return {3};
  if (name == "heat") return {5, 6, 9};
  if (name == "parametrix") return {4, 8};
  if (name == "heisenberg") return {10};
  if (name == "gradient") return {7};
  if (name == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  throw ConfigError("unknown suite " + name);
}

Report run_criterion(int id, const json &cfg) {
  switch (id) {
    case 1: return criterion_fi(cfg);
    case 2: return criterion_bernoulli(cfg);
    case 3: return criterion_gauss_bonnet(cfg);
    case 4: return criterion_three_way(cfg);
    case 5: return criterion_flat(cfg);
    case 6: return criterion_zeta(cfg);
    case 7: return criterion_gradient(cfg);
    case 8: return criterion_twisted(cfg);
    case 9: return criterion_trace_formula(cfg);
    case 10: return criterion_heisenberg(cfg);
  }
  throw ConfigError("no criterion " + std::to_string(id));
}

Report run_suite(const std::string &name, const json &cfg) {
  const auto ids = suite_criteria(name);
  Report r;
  r.command = "suite " + name;
  r.config = cfg;
  r.seed = cfg.at("seed").get<std::uint64_t>();
  for (int id : ids) r.append(run_criterion(id, cfg));
  return r;
}

// ---------------------------------------------------------------- conventions

json calibrate_conventions(const json &cfg) {
  const AlgebraParams p = config_params(cfg);
  const json &c = cfg.at("parametrix");
  const double expected_a0 = kPi / p.tau.imag();
  const double lebesgue_a0 = flat_a0_by_integration(p.tau);

  const double t = 0.7, r0 = 2.0;
  const cplx contour = contour_identity(t, r0);

  // Sign and measure from one small dilaton, against the closed-form density.
  auto rng = criterion_rng(cfg, 100);
  const TorusElement h = random_self_adjoint(p, 1, c.at("l1"), rng);
  auto ctx = make_context(p);
  const Parametrix par = resolvent_parametrix(laplace_kdk(dilaton_factors(h).k), ctx);
  SymbolEvaluator ev(ctx, GnsTruncation{c.at("N_symbol")});
  const TorusElement probe = a2_probes(p)[1];
  const double integrated = a2_by_integration(par, {probe}, ev).values.at(0);
  const CurvatureReport cm = modular_curvature(h, c.at("N_curvature"));
  const double closed = trace0(multiply(probe, cm.density)).real();

  const double tol = 1e-3;
  json candidates = json::array();
  int consistent = 0;
  int sign = 0;
  double measure = 0.0;
  for (int s : {1, -1})
    for (double m : {1.0, 1.0 / (2.0 * kPi), 1.0 / (4.0 * kPi * kPi)}) {
      const double a0_err = std::abs(m * lebesgue_a0 - expected_a0) / expected_a0;
      const double contour_err = std::abs(double(s) * contour - std::exp(-t * r0)) / std::exp(-t * r0);
      const double a2_err = std::abs(s * m * integrated - closed) / std::abs(closed);
      const bool ok = a0_err < tol && contour_err < tol && a2_err < tol;
      candidates.push_back({{"contour_sign", s}, {"plancherel", m}, {"a0_error", a0_err},
                            {"contour_error", contour_err}, {"a2_error", a2_err}, {"consistent", ok}});
      if (ok) {
        ++consistent;
        sign = s;
        measure = m;
      }
    }
  if (consistent != 1)
    throw CalibrationAmbiguity(consistent == 0 ? "no consistent convention" : "several consistent conventions",
                               {{"candidates", candidates}, {"closed_a2", closed}, {"integrated_a2", integrated}});

  const CurvatureReport lm = modular_curvature(h, c.at("N_curvature"), PrefactorConvention::LM2015);
  const double factor = convention_factor(PrefactorConvention::LM2015, p);
  const double map_residual = distance_l1(lm.density, factor * cm.density) / std::max(lm.density.l1_norm(), 1e-300);

  return {{"schema", kConventionSchemaVersion},
          {"theta", p.theta},
          {"tau", {p.tau.real(), p.tau.imag()}},
          {"contour_sign", sign},
          {"plancherel", measure},
          {"flat_a0", measure * lebesgue_a0},
          {"flat_a0_expected", expected_a0},
          {"prefactor_lm_over_cm", factor},
          {"prefactor_map_residual", map_residual},
          {"probe_a2_closed", closed},
          {"probe_a2_integrated", sign * measure * integrated},
          {"candidates", candidates}};
}

FrozenConventions conventions_from_json(const json &j, const std::string &source) {
  try {
    if (j.at("schema") != kConventionSchemaVersion) throw ConfigError("unknown convention schema");
    FrozenConventions f;
    f.contour_sign = j.at("contour_sign").get<int>();
    f.plancherel = j.at("plancherel").get<double>();
    f.source = source;
    if (f.contour_sign != 1 && f.contour_sign != -1) throw ConfigError("contour_sign must be +1 or -1");
    if (!(f.plancherel > 0.0)) throw ConfigError("plancherel must be positive");
    return f;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("malformed convention file: ") + e.what());
  }
}

FrozenConventions load_conventions(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read conventions " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError("malformed convention file " + path.string() + ": " + e.what());
  }
  return conventions_from_json(j, path.string());
}

FrozenConventions config_conventions(const json &cfg) {
  const std::string path = cfg.at("conventions");
  return path.empty() ? FrozenConventions{} : load_conventions(path);
}

}  // namespace nct
