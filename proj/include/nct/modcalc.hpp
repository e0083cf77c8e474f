#pragma once
// Modular functional calculus f(nabla), H(nabla1, nabla2) with nabla = -ad(h) on the GNS truncation.
//
// Default method: tensor Chebyshev expansion of f(d_j - d_i) and H(d_j - d_i, d_l - d_j) in the
// eigenvalue variables, applied through Clenshaw recurrences on the sparse matrix of h. The spectral
// method diagonalises rep(h) densely and is kept as the reference.

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nct/gns.hpp"
#include "nct/kernels.hpp"
#include "nct/linalg.hpp"
#include "nct/nctorus.hpp"

namespace nct {

enum class CalcMethod { Chebyshev, Spectral };

struct ModCalcOptions {
  CalcMethod method = CalcMethod::Chebyshev;
  double cheb_tol = 1e-15;     // relative size of discarded Chebyshev coefficients
  int max_degree = 192;
  double truncation_tol = 1e-6;  // outer-ring mass above this raises TruncationInsufficient
};

struct TruncationInsufficient : std::runtime_error {
  double residual;
  TruncationInsufficient(const std::string &what, double r) : std::runtime_error(what), residual(r) {}
};

using Univariate = std::function<double(double)>;
using Bivariate = std::function<double(double, double)>;

class ModularCalcContext {
 public:
  ModularCalcContext(const TorusElement &h, int N, ModCalcOptions opts = {});

  const TorusElement &h() const { return h_; }
  const GnsTruncation &trunc() const { return trunc_; }
  const ModCalcOptions &options() const { return opts_; }
  /// Bound M on the spectrum of rep(h): the l1 norm of h.
  double spectral_bound() const { return bound_; }
  /// rep(h) / M.
  const SpMat &scaled() const { return scaled_; }
  /// Dense eigendecomposition of rep(h), computed on first use.
  const HermitianEigen &eigen() const;

  /// f(rep(h)) v through a Chebyshev expansion on [-M, M].
  CVec apply_function(const Univariate &f, const CVec &v) const;
  /// Element f(h), read off from f(rep(h)) e_1.
  TorusElement function_of_h(const Univariate &f) const;

 private:
  TorusElement h_;
  GnsTruncation trunc_;
  ModCalcOptions opts_;
  double bound_;
  SpMat scaled_;
  mutable std::shared_ptr<HermitianEigen> eig_;
};

struct ModCalcResult {
  TorusElement value;
  double truncation_residual = 0.0;  // l1 mass in the outer ring of width supp(h), relative
  int degree = 0;                    // Chebyshev degree per variable (0 for the spectral method)
};

ModCalcResult mod_calc_1(const Univariate &f, const ModularCalcContext &ctx, const TorusElement &x);
ModCalcResult mod_calc_2(const Bivariate &H, const ModularCalcContext &ctx,
                         const std::vector<std::pair<TorusElement, TorusElement>> &pairs);
ModCalcResult mod_calc_1(const CurvatureKernel &f, const ModularCalcContext &ctx, const TorusElement &x);
ModCalcResult mod_calc_2(const CurvatureKernel &H, const ModularCalcContext &ctx,
                         const std::vector<std::pair<TorusElement, TorusElement>> &pairs);

/// Tensor Chebyshev coefficients of g on [-1,1]^2, row index for the first variable, trimmed to the
/// smallest degree whose tail is below tol relative to the largest coefficient.
RMat chebyshev_coefficients_2d(const std::function<double(double, double)> &g, double tol, int max_degree);
RVec chebyshev_coefficients_1d(const std::function<double(double)> &g, double tol, int max_degree);
/// Same on [-1,1]^3, returned as a vector of n x n slices indexed by the first variable.
std::vector<RMat> chebyshev_coefficients_3d(const std::function<double(double, double, double)> &g, double tol,
                                            int max_degree);

}  // namespace nct
