#pragma once
// Twisted derivatives ud^gamma on sampled Schwartz functions over R^2 (spectral differentiation on a
// periodic box), and the three routes to the curvature identity [ud_1, ud_2] = 2 i b_12.

#include <map>
#include <stdexcept>

#include <Eigen/Dense>

#include "nct/nctorus.hpp"
#include "nct/psymbol.hpp"

namespace nct {

using Field = Eigen::ArrayXXcd;  // (i, j) <-> (x1_i, x2_j)

struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n x n samples of [-L, L)^2.
struct Grid2D {
  int n = 128;
  double L = 8.0;

  double step() const { return 2.0 * L / n; }
  double x(int i) const { return -L + i * step(); }
  Field coordinate(int j) const;
  Field sample(const std::function<cplx(double, double)> &f) const;
};

/// d^beta u by FFT; throws AliasingError when the spectral tail of u exceeds tol relative to its peak.
Field spectral_derivative(const Field &u, const Grid2D &g, Multi beta, double tol = 1e-9);
/// Largest |u hat| in the outer eighth of the frequency box relative to the largest |u hat|.
double spectral_tail(const Field &u);

/// ud_j = -i d_j + b_jl x_l.
Field ud_single(int j, const Field &u, const Grid2D &g, const TwistData &B);
/// ud^gamma u = sum_beta binom(gamma, beta) (Bx)^{gamma - beta} (-i d)^beta u.
Field ud_apply(Multi gamma, const Field &u, const Grid2D &g, const TwistData &B);
/// Element-valued samples, one field per Fourier coefficient.
std::map<FourierIndex, Field> ud_apply(Multi gamma, const std::map<FourierIndex, Field> &u, const Grid2D &g,
                                       const TwistData &B);
/// ud_j ud_k through the expanded second-order formula.
Field ud_pair_expanded(int j, int k, const Field &u, const Grid2D &g, const TwistData &B);

/// P_f u for a symbol with scalar polynomial terms only.
Field op_apply(const Symbol &f, const Field &u, const Grid2D &g);

struct CurvatureRoutes {
  double commutator = 0.0;  // max |[ud_1, ud_2] u - 2 i b_12 u| / max |u|
  double symbol = 0.0;      // |sigma(ud_1) o sigma(ud_2) - sigma(ud_2) o sigma(ud_1) - 2 i b_12|
  double expansion = 0.0;   // same as commutator through the expanded formula
};
CurvatureRoutes curvature_identity_routes(const TwistData &B, const Field &u, const Grid2D &g);

/// max over j, k of the coefficient distance between sigma(ud_j) o sigma(ud_k) and xi_j xi_k + i b_jk.
double symbol_product_residual(const TwistData &B);

/// Gaussian e^{-|x - c|^2 / (2 w^2)} times e^{i <k, x>} times amp.
Field gaussian_packet(const Grid2D &g, double c1, double c2, double w, double k1, double k2, cplx amp);

}  // namespace nct
