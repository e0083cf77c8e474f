// nctlab: command-line front end. Exit codes: 0 ok, 1 tolerance failure, 2 config/input error, 3 calibration ambiguity.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "nct/curvature.hpp"
#include "nct/gns.hpp"
#include "nct/heisenberg.hpp"
#include "nct/kernels.hpp"
#include "nct/psymbol.hpp"
#include "nct/report.hpp"
#include "nct/suite.hpp"

using namespace nct;
using nlohmann::json;

namespace {

json read_json(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

TorusElement read_element(const std::string &path) {
  try {
    return element_from_json(read_json(path));
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    throw ConfigError("invalid element in " + path + ": " + e.what());
  }
}

std::vector<double> split_numbers(const std::string &s, char sep, std::size_t count, const std::string &what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
  }
  if (out.size() != count) throw ConfigError(what + " expects " + std::to_string(count) + " values");
  return out;
}

Report new_report(const std::string &command, const json &args, std::uint64_t seed) {
  Report r;
  r.command = command;
  r.config = args;
  r.seed = seed;
  return r;
}

int finish(const Report &r, const std::string &out, const std::string &stem) {
  for (const auto &path : emit_report(r, out, stem)) std::cout << path.string() << "\n";
  for (const Check &c : r.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value
              << (c.relation == Relation::AtMost ? " <= " : " >= ") << c.tolerance << "\n";
  return r.passed() ? kExitOk : kExitTolerance;
}

struct Common {
  std::string out = ".";
  std::string config;
};

void add_common(CLI::App *app, Common &c) {
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--config", c.config, "JSON config overriding the defaults");
}

// ---------------------------------------------------------------- kernels

struct KernelsArgs {
  Common common;
  std::string which = "K0";
  std::string grid = "-6:6:0.25";
};

int cmd_kernels(const KernelsArgs &a) {
  const CurvatureKernel k{kernel_from_name(a.which)};
  const auto g = split_numbers(a.grid, ':', 3, "--grid");
  if (!(g[2] > 0.0) || g[1] < g[0]) throw ConfigError("--grid needs a <= b and step > 0");
  const int n = static_cast<int>(std::floor((g[1] - g[0]) / g[2] + 1e-9));
  Table t;
  t.name = a.which;
  if (kernel_is_bivariate(k.kind)) {
    t.columns = {"s", "t", "value"};
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) t.rows.push_back({g[0] + i * g[2], g[0] + j * g[2], k(g[0] + i * g[2], g[0] + j * g[2])});
  } else {
    t.columns = {"s", "value"};
    for (int i = 0; i <= n; ++i) t.rows.push_back({g[0] + i * g[2], k(g[0] + i * g[2])});
  }
  if (k.kind == KernelKind::Kplus)
    std::cerr << "note: Kplus uses 4/s^2 - 2 coth(s/2)/v with v = s (equal to -Ktilde0/2)\n";
  std::filesystem::create_directories(a.common.out);
  const auto path = std::filesystem::path(a.common.out) / ("kernels_" + a.which + ".csv");
  write_csv(t, path);
  std::cout << path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- curvature

struct CurvatureArgs {
  Common common;
  std::string input;
  int trunc = 16;
  std::string convention = "cm2014";
};

int cmd_curvature(const CurvatureArgs &a) {
  const TorusElement h = read_element(a.input);
  PrefactorConvention conv;
  try {
    conv = convention_from_name(a.convention);
  } catch (const std::exception &e) {
    throw ConfigError(e.what());
  }
  const json cfg = load_config(a.common.config);
  Report r = new_report("curvature", {{"input", a.input}, {"trunc", a.trunc}, {"convention", a.convention}},
                        cfg.at("seed"));
  const CurvatureReport k = modular_curvature(h, a.trunc, conv);
  const double F = F_value(h, a.trunc);
  r.results = {{"density", to_json(k.density)},
               {"gauss_bonnet_residual", k.gauss_bonnet_residual},
               {"F_value", F},
               {"convention", convention_name(conv)},
               {"selfadjoint_residual", k.selfadjoint_residual},
               {"truncation_residual", k.truncation_residual}};
  r.check("gauss_bonnet_residual", k.gauss_bonnet_residual, cfg.at("curvature").at("gb_tol"));
  return finish(r, a.common.out, "curvature");
}

// ---------------------------------------------------------------- heat-fit

struct HeatArgs {
  Common common;
  std::string input;
  std::string probe;
  std::string kind = "conformal";
  double s = 1.0;
  int trunc = 16;
  std::string tgrid;
};

int cmd_heat_fit(const HeatArgs &a) {
  const TorusElement h = read_element(a.input);
  const TorusElement probe = a.probe.empty() ? TorusElement::unit(h.params()) : read_element(a.probe);
  if (!(probe.params() == h.params())) throw ConfigError("probe and dilaton have different theta/tau");
  const std::map<std::string, LaplacianKind> kinds = {{"flat", LaplacianKind::Flat},
                                                      {"conformal", LaplacianKind::Conformal},
                                                      {"forms01", LaplacianKind::Forms01},
                                                      {"family_s", LaplacianKind::FamilyS}};
  if (!kinds.count(a.kind)) throw ConfigError("unknown --kind " + a.kind);
  HeatFitConfig fc;
  if (!a.tgrid.empty()) {
    const auto g = split_numbers(a.tgrid, ':', 3, "--tgrid");
    fc.t_min = g[0];
    fc.t_max = g[1];
    fc.points = static_cast<int>(g[2]);
  }
  const json cfg = load_config(a.common.config);
  Report r = new_report("heat-fit", {{"input", a.input}, {"probe", a.probe}, {"kind", a.kind}, {"s", a.s},
                                     {"trunc", a.trunc}, {"tgrid", a.tgrid}},
                        cfg.at("seed"));
  const HeatSpectrum spec(laplacian(kinds.at(a.kind), h, a.s, GnsTruncation{a.trunc}));
  HeatFit f;
  try {
    f = fit_heat_coefficients(spec, probe, fc);
  } catch (const WindowViolated &e) {
    throw ConfigError(e.what());
  }
  Table t{"trace", {"t", "trace"}, {}};
  for (std::size_t i = 0; i < f.ts.size(); ++i) t.rows.push_back({f.ts[i], f.traces[i]});
  r.tables.push_back(std::move(t));
  r.results = {{"a0", f.a0},        {"a2", f.a2},         {"a4", f.a4},       {"residual", f.residual},
               {"stability", f.stability}, {"condition", f.condition}, {"t_min", f.t_min}, {"t_max", f.t_max}};
  return finish(r, a.common.out, "heat_fit");
}

// ---------------------------------------------------------------- parametrix-a2

struct ParametrixArgs {
  Common common;
  std::string input;
  std::string eps;
  std::string a0;
  std::string probe;
  std::string conventions;
  int trunc = 8;
  int angles = 32;
};

int cmd_parametrix(const ParametrixArgs &a) {
  const TorusElement h = read_element(a.input);
  const AlgebraParams p = h.params();
  const TorusElement probe = a.probe.empty() ? TorusElement::unit(p) : read_element(a.probe);
  const FrozenConventions conv = a.conventions.empty() ? FrozenConventions{} : load_conventions(a.conventions);
  const json cfg = load_config(a.common.config);
  Report r = new_report("parametrix-a2", {{"input", a.input}, {"eps", a.eps}, {"a0", a.a0}, {"probe", a.probe},
                                          {"trunc", a.trunc}, {"angles", a.angles}, {"conventions", a.conventions}},
                        cfg.at("seed"));
  const Dilaton d = dilaton_factors(h);
  DiffMultiplier P;
  if (a.eps.empty() && a.a0.empty()) {
    P = laplace_kdk(d.k);
  } else {
    const auto e = a.eps.empty() ? std::vector<double>{0.0, 0.0} : split_numbers(a.eps, ',', 2, "--eps");
    const TorusElement a0 = a.a0.empty() ? TorusElement(p) : read_element(a.a0);
    P = conformal_P(d.k2, e[0], e[1], a0);
  }
  auto ctx = make_context(p);
  const Parametrix par = resolvent_parametrix(P, ctx);
  SymbolEvaluator ev(ctx, GnsTruncation{a.trunc});
  QuadratureConfig q;
  q.angles = a.angles;
  const A2Integration res = a2_by_integration(par, {probe}, ev, q, conv);
  json hom = json::array();
  for (const auto &c : homogeneity_report(par, ev)) {
    hom.push_back(to_json(c));
    r.check("homogeneity_" + c.name, c.residual, cfg.at("parametrix").at("homogeneity_tol"));
  }
  r.results = {{"a2_value", res.values.at(0)},
               {"quadrature_error", res.quadrature_error},
               {"tail", res.tail},
               {"evaluations", res.evaluations},
               {"homogeneity_report", hom},
               {"frozen_conventions",
                {{"contour_sign", conv.contour_sign}, {"plancherel", conv.plancherel}, {"source", conv.source}}}};
  return finish(r, a.common.out, "parametrix_a2");
}

// ---------------------------------------------------------------- heisenberg-spectrum

struct HeisenbergArgs {
  Common common;
  std::string g = "0,-1,1,0";
  double theta = 0.6180339887498949;
  std::string tau = "0.3,1.1";
  std::string grid = "12,512";
  std::string dilaton;
};

int cmd_heisenberg(const HeisenbergArgs &a) {
  const auto gv = split_numbers(a.g, ',', 4, "--g");
  const auto tv = split_numbers(a.tau, ',', 2, "--tau");
  const auto grid = split_numbers(a.grid, ',', 2, "--grid");
  for (double v : gv)
    if (v != std::round(v)) throw ConfigError("--g entries must be integers");
  HeisenbergParams p;
  try {
    p = HeisenbergParams::make(int(gv[0]), int(gv[1]), int(gv[2]), int(gv[3]), a.theta);
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  const cplx tau(tv[0], tv[1]);
  const AlgebraParams ap{a.theta, tau};
  try {
    ap.validate();
  } catch (const std::exception &e) {
    throw ConfigError(e.what());
  }
  const TorusElement h = a.dilaton.empty() ? TorusElement(ap) : read_element(a.dilaton);
  const json cfg = load_config(a.common.config);
  Report r = new_report("heisenberg-spectrum", {{"g", gv}, {"theta", a.theta}, {"tau", tv}, {"grid", grid},
                                                {"dilaton", a.dilaton}},
                        cfg.at("seed"));
  const MoritaReport m = morita_curvature_check(h, p, tau, grid[0], int(grid[1]));

  // Spectrum of the operator the check fits: E' = E(g^{-1}, theta') on the snapped grid.
  const HeisenbergParams q = p.inverse();
  const ModuleOperators ops = module_operators(q, tau, m.grid);
  const HermitianEigen e = eigh(oscillator_laplacian(q, tau, ops, h.empty() ? std::nullopt : std::optional(h)));
  Table t{"spectrum", {"index", "eigenvalue", "edge_mass"}, {}};
  for (int i = 0; i < e.values.size(); ++i) t.rows.push_back({double(i), e.values(i), edge_mass(e.vectors.col(i), m.grid)});
  r.tables.push_back(std::move(t));
  r.results = to_json(m);
  r.check("morita_max_deviation", m.max_deviation, cfg.at("heisenberg").at("morita_tol"));
  return finish(r, a.common.out, "heisenberg");
}

// ---------------------------------------------------------------- gradient-check

struct GradientArgs {
  Common common;
  std::string input;
  int trunc = 16;
  int directions = 10;
  double step = 1e-4;
  long long seed = -1;
};

int cmd_gradient(const GradientArgs &a) {
  json cfg = load_config(a.common.config);
  if (a.seed >= 0) cfg["seed"] = a.seed;
  std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
  const AlgebraParams dp = config_params(cfg);
  const TorusElement h = a.input.empty() ? random_self_adjoint(dp, 2, 1.0, rng) : read_element(a.input);
  const AlgebraParams p = h.params();
  Report r = new_report("gradient-check", {{"input", a.input}, {"trunc", a.trunc}, {"directions", a.directions},
                                           {"step", a.step}},
                        cfg.at("seed"));
  const Functional F = F_functional(h, a.trunc);
  Table t{"directions", {"direction", "analytic", "finite_difference", "relative"}, {}};
  double worst = 0.0;
  for (int k = 0; k < a.directions; ++k) {
    const TorusElement d = random_self_adjoint(p, std::max(1, h.support_radius()), 1.0, rng);
    const double fd = (F_value(h + a.step * d, a.trunc) - F_value(h - a.step * d, a.trunc)) / (2.0 * a.step);
    const double an = trace0(multiply(d, F.gradient)).real();
    const double e = std::abs(an - fd) / std::max(std::abs(fd), 1e-8);
    worst = std::max(worst, e);
    t.rows.push_back({double(k), an, fd, e});
  }
  r.tables.push_back(std::move(t));
  r.results = {{"F_value", F.value}, {"gradient", to_json(F.gradient)}};
  r.check("gradient_vs_fd", worst, cfg.at("gradient").at("fd_tol"));
  return finish(r, a.common.out, "gradient_check");
}

// ---------------------------------------------------------------- calibrate / suite

struct CalibrateArgs {
  std::string config;
  std::string out = "conventions.json";
};

int cmd_calibrate(const CalibrateArgs &a) {
  const json cfg = load_config(a.config);
  const json conv = calibrate_conventions(cfg);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << std::setprecision(17) << std::setw(2) << conv << "\n";
  std::cout << a.out << "\n";
  return kExitOk;
}

struct SuiteArgs {
  Common common;
  std::string name;
  long long seed = -1;
};

int cmd_suite(const SuiteArgs &a) {
  json cfg = load_config(a.common.config);
  if (a.seed >= 0) cfg["seed"] = a.seed;
  const Report r = run_suite(a.name, cfg);
  return finish(r, a.common.out, "suite_" + a.name);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"nctlab: curvature, heat-trace and Morita experiments on noncommutative two-tori"};
  app.require_subcommand(1);

  KernelsArgs ka;
  auto *kernels = app.add_subcommand("kernels", "Sample a curvature kernel to CSV");
  add_common(kernels, ka.common);
  kernels->add_option("--which", ka.which, "K0, H0, Ktilde0, Htilde0 or Kplus")->capture_default_str();
  kernels->add_option("--grid", ka.grid, "a:b:step (both axes for bivariate kernels)")->capture_default_str();

  CurvatureArgs ca;
  auto *curv = app.add_subcommand("curvature", "Modular curvature density of a dilaton");
  add_common(curv, ca.common);
  curv->add_option("--input", ca.input, "Dilaton JSON")->required();
  curv->add_option("--trunc", ca.trunc, "Truncation N")->capture_default_str();
  curv->add_option("--convention", ca.convention, "cm2014 or lm2015")->capture_default_str();

  HeatArgs ha;
  auto *heat = app.add_subcommand("heat-fit", "Heat-trace fit of a0, a2 on the truncated GNS space");
  add_common(heat, ha.common);
  heat->add_option("--input", ha.input, "Dilaton JSON")->required();
  heat->add_option("--probe", ha.probe, "Probe element JSON (default 1)");
  heat->add_option("--kind", ha.kind, "flat, conformal, forms01 or family_s")->capture_default_str();
  heat->add_option("--s", ha.s, "Exponent for family_s")->capture_default_str();
  heat->add_option("--trunc", ha.trunc, "Truncation N")->capture_default_str();
  heat->add_option("--tgrid", ha.tgrid, "tmin:tmax:points");

  ParametrixArgs pa;
  auto *par = app.add_subcommand("parametrix-a2", "a2 by xi-integration of the parametrix term b_-4");
  add_common(par, pa.common);
  par->add_option("--input", pa.input, "Dilaton JSON")->required();
  par->add_option("--eps", pa.eps, "e1,e2 for the conformal family (default: k Delta k)");
  par->add_option("--a0", pa.a0, "Zeroth-order coefficient JSON for the conformal family");
  par->add_option("--probe", pa.probe, "Probe element JSON (default 1)");
  par->add_option("--conventions", pa.conventions, "Convention file from `calibrate`");
  par->add_option("--trunc", pa.trunc, "Symbol evaluation truncation N")->capture_default_str();
  par->add_option("--angles", pa.angles, "Angular nodes")->capture_default_str();

  HeisenbergArgs hsa;
  auto *heis = app.add_subcommand("heisenberg-spectrum", "Oscillator spectrum and Morita curvature check");
  add_common(heis, hsa.common);
  heis->add_option("--g", hsa.g, "a,b,c,d with ad - bc = 1, c != 0")->capture_default_str();
  heis->add_option("--theta", hsa.theta, "theta")->capture_default_str();
  heis->add_option("--tau", hsa.tau, "re,im")->capture_default_str();
  heis->add_option("--grid", hsa.grid, "L,G")->capture_default_str();
  heis->add_option("--dilaton", hsa.dilaton, "Dilaton JSON on A_theta (default 0)");

  GradientArgs ga;
  auto *grad = app.add_subcommand("gradient-check", "Gradient of F against central differences");
  add_common(grad, ga.common);
  grad->add_option("--input", ga.input, "Dilaton JSON (default: random from the seed)");
  grad->add_option("--trunc", ga.trunc, "Truncation N")->capture_default_str();
  grad->add_option("--directions", ga.directions, "Random directions")->capture_default_str();
  grad->add_option("--step", ga.step, "Finite-difference step")->capture_default_str();
  grad->add_option("--seed", ga.seed, "Seed override");

  CalibrateArgs cal;
  auto *calib = app.add_subcommand("calibrate", "Write the frozen convention file");
  calib->add_option("--config", cal.config, "JSON config overriding the defaults");
  calib->add_option("--out", cal.out, "Convention file")->capture_default_str();

  SuiteArgs sa;
  auto *suite = app.add_subcommand("suite", "Run an acceptance bundle");
  add_common(suite, sa.common);
  suite->add_option("name", sa.name, "identities, curvature, heat, parametrix, heisenberg, gradient or all")->required();
  suite->add_option("--seed", sa.seed, "Seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*kernels) return cmd_kernels(ka);
    if (*curv) return cmd_curvature(ca);
    if (*heat) return cmd_heat_fit(ha);
    if (*par) return cmd_parametrix(pa);
    if (*heis) return cmd_heisenberg(hsa);
    if (*grad) return cmd_gradient(ga);
    if (*calib) return cmd_calibrate(cal);
    if (*suite) return cmd_suite(sa);
  } catch (const CalibrationAmbiguity &e) {
    std::cerr << "calibration ambiguity: " << e.what() << "\n" << e.diagnostics.dump(2) << "\n";
    return kExitCalibration;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument &e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTolerance;
  }
  return kExitConfig;
}
