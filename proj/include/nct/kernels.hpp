#pragma once
// Curvature kernels K0, H0, their tilde versions and K+, with series branches near removable singularities.

#include <string>
#include <vector>

namespace nct {

enum class KernelKind { K0, H0, Ktilde0, Htilde0, Kplus };

KernelKind kernel_from_name(const std::string &name);
std::string kernel_name(KernelKind k);
bool kernel_is_bivariate(KernelKind k);

struct CurvatureKernel {
  KernelKind kind = KernelKind::K0;
  /// Univariate kernels: |s| below this uses the Bernoulli series.
  /// Bivariate kernels: distance to {s=0},{t=0},{s+t=0} below this uses the divided-difference route.
  double series_radius = -1.0;  // negative selects the default for the kind

  double radius() const;
  double operator()(double s) const;
  double operator()(double s, double t) const;
};

inline constexpr double kDefaultSeriesRadius = 0.1;
inline constexpr double kDefaultBivariateBox = 0.5;

/// c_n = 8 B_{2n}/(2n)!, n = 1..count: Taylor coefficient of s^{2n-2} in Ktilde0.
const std::vector<double> &ktilde0_taylor();

double eval_Ktilde0(double s, double series_radius = kDefaultSeriesRadius);
double eval_Ktilde0_closed(double s);
double eval_Ktilde0_series(double s);
double eval_Ktilde0_prime(double s);

double eval_K0(double s, double series_radius = kDefaultSeriesRadius);
double eval_K0_closed(double s);
double eval_Kplus(double s, double series_radius = kDefaultSeriesRadius);
double eval_Kplus_closed(double s);

/// Divided difference Ktilde0[x,y]; the derivative on the diagonal.
double ktilde0_divided_difference(double x, double y);
/// Right-hand side of the functional identity: equals -Htilde0(s1,s2)/2.
double fi_combination(double s1, double s2);

double eval_Htilde0(double s, double t, double box = kDefaultBivariateBox);
double eval_H0(double s, double t, double box = kDefaultBivariateBox);
double eval_H0_closed(double s, double t);
double eval_Htilde0_closed(double s, double t);
double eval_Htilde0_fi(double s, double t);

/// x / (4 sinh(x/2)), with value 1/2 at 0; stable for all real x.
double half_csch_factor(double x);

}  // namespace nct
