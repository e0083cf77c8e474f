#pragma once
// Modular curvature density, Gauss-Bonnet residual, the scale-invariant determinant functional F,
// its gradient, the Polyakov-type log-determinant and the Heisenberg curvature density.

#include <functional>
#include <optional>
#include <string>

#include "nct/kernels.hpp"
#include "nct/modcalc.hpp"
#include "nct/nctorus.hpp"

namespace nct {

/// CM2014: density K_k with a2(a) = phi0(a K_k) for Tr(a e^{-t Lap_k}).
/// LM2015: density normalised by a2(a) = phi0(a K) / (4 pi Im tau), i.e. 4 pi Im tau times the CM2014 density.
enum class PrefactorConvention { CM2014, LM2015 };

PrefactorConvention convention_from_name(const std::string &name);
std::string convention_name(PrefactorConvention c);
/// Scalar s with density(conv) = s * density(CM2014).
double convention_factor(PrefactorConvention c, const AlgebraParams &p);

struct CurvatureReport {
  TorusElement density;
  double gauss_bonnet_residual = 0.0;  // |trace0(density)|
  cplx trace{0.0, 0.0};
  double selfadjoint_residual = 0.0;
  double truncation_residual = 0.0;
  PrefactorConvention convention = PrefactorConvention::CM2014;
};

/// Pairs (x, y) with sum x y = box_Re(h).
std::vector<std::pair<TorusElement, TorusElement>> dirichlet_pairs(const TorusElement &h);

/// f(nabla)(Lap h) + g(nabla1, nabla2)(box_Re h) on the truncation.
ModCalcResult curvature_combination(const ModularCalcContext &ctx, const Univariate &f, const Bivariate &g);

CurvatureReport modular_curvature(const TorusElement &h, int N,
                                  PrefactorConvention conv = PrefactorConvention::CM2014,
                                  const ModCalcOptions &opts = {});

/// LM2015 density plus mu 1.
TorusElement heisenberg_curvature_density(const TorusElement &h, double mu, int N, const ModCalcOptions &opts = {});

struct Functional {
  double value = 0.0;
  TorusElement gradient;
};

cplx dedekind_eta(cplx tau);
/// log(4 pi^2 |eta(tau)|^4).
double flat_log_det(cplx tau);

/// phi0(K+(nabla1)(box_Re h)).
double kplus_quadratic(const TorusElement &h, int N, const ModCalcOptions &opts = {});
double F_value(const TorusElement &h, int N, const ModCalcOptions &opts = {});
TorusElement grad_F(const TorusElement &h, int N, const ModCalcOptions &opts = {});
Functional F_functional(const TorusElement &h, int N, const ModCalcOptions &opts = {});
/// phi(1) = trace0(e^{-h}) on the truncation.
double phi_one(const TorusElement &h, int N, const ModCalcOptions &opts = {});
double polyakov_log_det(const TorusElement &h, int N, const ModCalcOptions &opts = {});

/// Exact Heisenberg determinant formula up to the K2 term; K2 is supplied by the caller and omitted when empty.
struct HeisenbergDetInput {
  int degree = 1;
  double rank = 1.0;
  double mu = 1.0;
  std::optional<Univariate> k2;
};
double heisenberg_log_det(const TorusElement &h, const HeisenbergDetInput &in, int N, const ModCalcOptions &opts = {});

}  // namespace nct
