#include "nct/kernels.hpp"

#include "nct/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace nct {
namespace {

constexpr int kTaylorTerms = 30;
constexpr double kDerivSeriesRadius = 2.0;
constexpr double kDiffQuadGap = 0.5;
constexpr double kClosedMax = 40.0;

std::vector<double> build_taylor() {
  // a_k = B_{2k}/(2k)! from g(x) sinh(x/2)/(x/2) = cosh(x/2), g(x) = (x/2) coth(x/2) = sum a_k x^{2k}.
  std::vector<long double> a(kTaylorTerms + 1, 0.0L);
  for (int k = 0; k <= kTaylorTerms; ++k) {
    long double fk = 1.0L;
    for (int i = 1; i <= 2 * k; ++i) fk *= i;
    long double rhs = 1.0L / (std::pow(4.0L, k) * fk);
    for (int j = 0; j < k; ++j) {
      long double f = 1.0L;
      for (int i = 1; i <= 2 * (k - j) + 1; ++i) f *= i;
      rhs -= a[j] / (std::pow(4.0L, k - j) * f);
    }
    a[k] = rhs;
  }
  std::vector<double> c(kTaylorTerms);
  for (int n = 1; n <= kTaylorTerms; ++n) c[n - 1] = static_cast<double>(8.0L * a[n]);
  return c;
}

double min_seam_distance(double s, double t) { return std::min({std::abs(s), std::abs(t), std::abs(s + t)}); }

}  // namespace

KernelKind kernel_from_name(const std::string &name) {
  if (name == "K0") return KernelKind::K0;
  if (name == "H0") return KernelKind::H0;
  if (name == "Ktilde0") return KernelKind::Ktilde0;
  if (name == "Htilde0") return KernelKind::Htilde0;
  if (name == "Kplus") return KernelKind::Kplus;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::K0: return "K0";
    case KernelKind::H0: return "H0";
    case KernelKind::Ktilde0: return "Ktilde0";
    case KernelKind::Htilde0: return "Htilde0";
    case KernelKind::Kplus: return "Kplus";
  }
  return "?";
}

bool kernel_is_bivariate(KernelKind k) { return k == KernelKind::H0 || k == KernelKind::Htilde0; }

double CurvatureKernel::radius() const {
  if (series_radius >= 0.0) return series_radius;
  return kernel_is_bivariate(kind) ? kDefaultBivariateBox : kDefaultSeriesRadius;
}

double CurvatureKernel::operator()(double s) const {
  switch (kind) {
    case KernelKind::K0: return eval_K0(s, radius());
    case KernelKind::Ktilde0: return eval_Ktilde0(s, radius());
    case KernelKind::Kplus: return eval_Kplus(s, radius());
    default: throw std::invalid_argument("kernel " + kernel_name(kind) + " is bivariate");
  }
}

double CurvatureKernel::operator()(double s, double t) const {
  switch (kind) {
    case KernelKind::H0: return eval_H0(s, t, radius());
    case KernelKind::Htilde0: return eval_Htilde0(s, t, radius());
    default: return (*this)(s);
  }
}

const std::vector<double> &ktilde0_taylor() {
  static const std::vector<double> c = build_taylor();
  return c;
}

double half_csch_factor(double x) {
  const double a = std::abs(x);
  if (a < 1e-4) return 0.5 * (1.0 - a * a / 24.0 + 7.0 * a * a * a * a / 5760.0);
  return a * std::exp(-0.5 * a) / (-2.0 * std::expm1(-a));
}

double eval_Ktilde0_series(double s) {
  const auto &c = ktilde0_taylor();
  const double x2 = s * s;
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x2 + *it;
  return acc;
}

double eval_Ktilde0_closed(double s) { return (4.0 * s / std::tanh(0.5 * s) - 8.0) / (s * s); }

double eval_Ktilde0(double s, double r) {
  return std::abs(s) < r ? eval_Ktilde0_series(s) : eval_Ktilde0_closed(s);
}

double eval_Ktilde0_prime(double s) {
  if (std::abs(s) < kDerivSeriesRadius) {
    const auto &c = ktilde0_taylor();
    const double x2 = s * s;
    double acc = 0.0;
    for (int n = static_cast<int>(c.size()); n >= 2; --n) acc = acc * x2 + (2.0 * n - 2.0) * c[n - 1];
    return acc * s;
  }
  const double sh = std::sinh(0.5 * s);
  return -4.0 / (std::tanh(0.5 * s) * s * s) - 2.0 / (sh * sh * s) + 16.0 / (s * s * s);
}

double eval_K0_closed(double s) { return (-2.0 + s / std::tanh(0.5 * s)) / (s * std::sinh(0.5 * s)); }

double eval_K0(double s, double r) { return eval_Ktilde0(s, r) * half_csch_factor(s); }

double eval_Kplus_closed(double s) { return 4.0 / (s * s) - 2.0 / (std::tanh(0.5 * s) * s); }

double eval_Kplus(double s, double r) {
  return std::abs(s) < r ? -0.5 * eval_Ktilde0_series(s) : eval_Kplus_closed(s);
}

double ktilde0_divided_difference(double x, double y) {
  if (std::abs(x - y) >= kDiffQuadGap) return (eval_Ktilde0(x, kDerivSeriesRadius) - eval_Ktilde0(y, kDerivSeriesRadius)) / (x - y);
  const QuadRule &g = gauss_legendre(16);
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double u = 0.5 * (g.x[i] + 1.0);
    acc += 0.5 * g.w[i] * eval_Ktilde0_prime(y + u * (x - y));
  }
  return acc;
}

double fi_combination(double s1, double s2) {
  return ktilde0_divided_difference(s2, -s1) + ktilde0_divided_difference(s1 + s2, s2) -
         ktilde0_divided_difference(s1 + s2, s1);
}

double eval_Htilde0_fi(double s, double t) { return -2.0 * fi_combination(s, t); }

double eval_H0_closed(double s, double t) {
  const double u = s + t;
  const double num = t * u * std::cosh(s) - s * u * std::cosh(t) +
                     (s - t) * (u + std::sinh(s) + std::sinh(t) - std::sinh(u));
  const double shu = std::sinh(0.5 * u);
  const double den = s * t * u * std::sinh(0.5 * s) * std::sinh(0.5 * t) * shu * shu;
  return num / den;
}

double eval_Htilde0_closed(double s, double t) {
  const double u = s + t;
  return 4.0 * std::sinh(0.5 * u) / u * eval_H0_closed(s, t);
}

double eval_Htilde0(double s, double t, double box) {
  if (min_seam_distance(s, t) >= box && std::max({std::abs(s), std::abs(t), std::abs(s + t)}) <= kClosedMax)
    return eval_Htilde0_closed(s, t);
  return eval_Htilde0_fi(s, t);
}

double eval_H0(double s, double t, double box) {
  if (min_seam_distance(s, t) >= box && std::max({std::abs(s), std::abs(t), std::abs(s + t)}) <= kClosedMax)
    return eval_H0_closed(s, t);
  return eval_Htilde0_fi(s, t) * half_csch_factor(s + t);
}

}  // namespace nct
