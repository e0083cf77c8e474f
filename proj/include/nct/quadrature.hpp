#pragma once
// Gauss-Legendre rules and adaptive Gauss-Kronrod (7/15) integration.

#include <functional>
#include <vector>

namespace nct {

struct QuadRule {
  std::vector<double> x;  // nodes on [-1,1]
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule, cached per n.
const QuadRule &gauss_legendre(int n);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive G7/K15 on [a,b] with absolute/relative tolerance and a cap on subdivisions.
AdaptiveResult integrate_gk15(const std::function<double(double)> &f, double a, double b, double abs_tol,
                              double rel_tol, int max_intervals = 400);

/// Vector-valued variant: all components share the subdivision; the error is the max over components.
struct AdaptiveVecResult {
  std::vector<double> value;
  double error = 0.0;
  int evaluations = 0;
};
AdaptiveVecResult integrate_gk15_vec(const std::function<std::vector<double>(double)> &f, std::size_t dim, double a,
                                     double b, double abs_tol, double rel_tol, int max_intervals = 400);

}  // namespace nct
