#include "nct/curvature.hpp"

#include <cmath>
#include <stdexcept>

namespace nct {

PrefactorConvention convention_from_name(const std::string &name) {
  if (name == "cm2014" || name == "CM2014") return PrefactorConvention::CM2014;
  if (name == "lm2015" || name == "LM2015") return PrefactorConvention::LM2015;
  throw std::invalid_argument("unknown convention: " + name);
}

std::string convention_name(PrefactorConvention c) { return c == PrefactorConvention::CM2014 ? "cm2014" : "lm2015"; }

double convention_factor(PrefactorConvention c, const AlgebraParams &p) {
  return c == PrefactorConvention::CM2014 ? 1.0 : 4.0 * kPi * p.tau.imag();
}

std::vector<std::pair<TorusElement, TorusElement>> dirichlet_pairs(const TorusElement &h) {
  const TorusElement d1 = derive(h, 1), d2 = derive(h, 2);
  const double re = h.params().tau.real(), ab2 = std::norm(h.params().tau);
  return {{d1, d1}, {re * d1, d2}, {re * d2, d1}, {ab2 * d2, d2}};
}

ModCalcResult curvature_combination(const ModularCalcContext &ctx, const Univariate &f, const Bivariate &g) {
  const TorusElement &h = ctx.h();
  ModCalcResult a = mod_calc_1(f, ctx, conformal_laplacian_of(h));
  const ModCalcResult b = mod_calc_2(g, ctx, dirichlet_pairs(h));
  a.value += b.value;
  a.truncation_residual = std::max(a.truncation_residual, b.truncation_residual);
  a.degree = std::max(a.degree, b.degree);
  return a;
}

CurvatureReport modular_curvature(const TorusElement &h, int N, PrefactorConvention conv, const ModCalcOptions &opts) {
  const ModularCalcContext ctx(h, N, opts);
  const ModCalcResult r = curvature_combination(
      ctx, [](double s) { return eval_K0(s); }, [](double s, double t) { return 0.5 * eval_H0(s, t); });
  const AlgebraParams &p = h.params();
  CurvatureReport out;
  out.convention = conv;
  out.density = r.value * cplx(-kPi / (2.0 * p.tau.imag()) * convention_factor(conv, p));
  out.trace = trace0(out.density);
  out.gauss_bonnet_residual = std::abs(out.trace);
  out.selfadjoint_residual = distance_l1(out.density, star(out.density));
  out.truncation_residual = r.truncation_residual;
  return out;
}

TorusElement heisenberg_curvature_density(const TorusElement &h, double mu, int N, const ModCalcOptions &opts) {
  return modular_curvature(h, N, PrefactorConvention::LM2015, opts).density + TorusElement::unit(h.params(), mu);
}

cplx dedekind_eta(cplx tau) {
  if (!(tau.imag() > 0.0)) throw std::invalid_argument("dedekind_eta needs Im tau > 0");
  const cplx i(0.0, 1.0);
  const cplx q = std::exp(2.0 * kPi * i * tau);
  cplx prod = 1.0, qn = q;
  for (int n = 1; n < 100000 && std::abs(qn) >= 1e-17; ++n) {
    prod *= 1.0 - qn;
    qn *= q;
  }
  return std::exp(kPi * i * tau / 12.0) * prod;
}

double flat_log_det(cplx tau) { return std::log(4.0 * kPi * kPi * std::pow(std::abs(dedekind_eta(tau)), 4)); }

double kplus_quadratic(const TorusElement &h, int N, const ModCalcOptions &opts) {
  const ModularCalcContext ctx(h, N, opts);
  const ModCalcResult r = mod_calc_2([](double s, double) { return eval_Kplus(s); }, ctx, dirichlet_pairs(h));
  return trace0(r.value).real();
}

double F_value(const TorusElement &h, int N, const ModCalcOptions &opts) {
  return -flat_log_det(h.params().tau) + kPi / (4.0 * h.params().tau.imag()) * kplus_quadratic(h, N, opts);
}

TorusElement grad_F(const TorusElement &h, int N, const ModCalcOptions &opts) {
  const ModularCalcContext ctx(h, N, opts);
  const ModCalcResult r = curvature_combination(
      ctx, [](double s) { return eval_Ktilde0(s); }, [](double s, double t) { return 0.5 * eval_Htilde0(s, t); });
  return r.value * cplx(kPi / (4.0 * h.params().tau.imag()));
}

Functional F_functional(const TorusElement &h, int N, const ModCalcOptions &opts) {
  return {F_value(h, N, opts), grad_F(h, N, opts)};
}

double phi_one(const TorusElement &h, int N, const ModCalcOptions &opts) {
  const ModularCalcContext ctx(h, N, opts);
  return trace0(ctx.function_of_h([](double x) { return std::exp(-x); })).real();
}

double polyakov_log_det(const TorusElement &h, int N, const ModCalcOptions &opts) {
  return flat_log_det(h.params().tau) + std::log(phi_one(h, N, opts)) -
         kPi / (4.0 * h.params().tau.imag()) * kplus_quadratic(h, N, opts);
}

double heisenberg_log_det(const TorusElement &h, const HeisenbergDetInput &in, int N, const ModCalcOptions &opts) {
  const AlgebraParams &p = h.params();
  const double im = std::abs(p.tau.imag());
  const double deg = std::abs(in.degree);
  double v = 0.5 * deg * std::log(2.0 * std::abs(in.mu) * im) - 0.5 * deg * trace0(h).real();
  double inner = trace0(multiply(h, conformal_laplacian_of(h))).real() / 3.0;
  if (in.k2) {
    const ModularCalcContext ctx(h, N, opts);
    const Univariate k2 = *in.k2;
    inner += trace0(mod_calc_2([k2](double s, double) { return k2(s); }, ctx, dirichlet_pairs(h)).value).real();
  }
  return v - std::abs(in.rank) / (16.0 * kPi * p.tau.imag()) * inner;
}

}  // namespace nct
