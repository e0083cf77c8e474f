#pragma once
// Truncated GNS representation L^2(A_theta, phi0): left multiplication, Laplacians, heat traces and fits,
// zeta value at zero, KMS check and the lattice trace formula.

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nct/linalg.hpp"
#include "nct/nctorus.hpp"

namespace nct {

struct GnsTruncation {
  int N = 8;  // monomials with |m|,|n| <= N

  int side() const { return 2 * N + 1; }
  int dim() const { return side() * side(); }
  bool contains(int m, int n) const { return std::abs(m) <= N && std::abs(n) <= N; }
  /// Row-major: index = (m + N) * side + (n + N).
  int index(int m, int n) const { return (m + N) * side() + (n + N); }
  FourierIndex at(int k) const { return {k / side() - N, k % side() - N}; }
  int one() const { return index(0, 0); }
  /// Indices with max(|m|,|n|) <= r.
  std::vector<int> block(int r) const;
};

struct GnsMatrix {
  GnsTruncation trunc;
  CMat data;
  int buffer = 0;   // support radius of the generating elements
  long leakage = 0; // dropped entries whose product left the box
};

struct WindowViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditionedFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CVec to_vector(const TorusElement &a, const GnsTruncation &tr);
/// Coefficients with magnitude below drop are omitted.
TorusElement from_vector(const CVec &v, const GnsTruncation &tr, const AlgebraParams &p, double drop = kPruneTol);

SpMat represent_sparse(const TorusElement &a, const GnsTruncation &tr, long *leakage = nullptr);
GnsMatrix represent(const TorusElement &a, const GnsTruncation &tr);

struct Reconstruction {
  TorusElement element;
  double residual = 0.0;  // max |M - represent(element)| over columns of radius <= N/2, relative to max |M|
};
/// Cyclic-vector readout: the element whose coefficients are M e_1.
Reconstruction reconstruct(const GnsMatrix &m, const AlgebraParams &p);

/// exp(s rep(h)) and friends from one eigendecomposition of rep(h).
struct DilatonSpectrum {
  GnsTruncation trunc;
  int buffer = 0;
  HermitianEigen eig;

  DilatonSpectrum(const TorusElement &h, const GnsTruncation &tr);
  CMat exp(double s) const;
};

enum class LaplacianKind { Flat, Conformal, Forms01, FamilyS };

/// Diagonal of the flat Laplacian: |m + tau n|^2.
RVec flat_symbol(const GnsTruncation &tr, cplx tau);
GnsMatrix laplacian(LaplacianKind kind, const TorusElement &h, double s, const GnsTruncation &tr);

/// Eigendecomposition of a Laplacian, reused across t and probes.
struct HeatSpectrum {
  GnsTruncation trunc;
  int buffer = 0;
  RVec values;
  CMat vectors;

  explicit HeatSpectrum(const GnsMatrix &l);
  double lambda_max() const { return values(values.size() - 1); }
  /// w_j = Re sum_{k in interior} conj(V_kj) (A V)_kj, interior radius N - supp(a) - buffer.
  RVec probe_weights(const TorusElement &a) const;
};

double heat_trace(const HeatSpectrum &spec, const TorusElement &a, double t);
double heat_trace(const RVec &values, const RVec &weights, double t);

struct HeatFitConfig {
  double tmin_factor = 40.0;  // t_min = tmin_factor / lambda_max
  double span = 8.0;          // t_max = span * t_min
  int points = 40;
  std::optional<double> t_min;  // overrides; must respect the window rule
  std::optional<double> t_max;
  double max_condition = 1e8;
};

struct HeatFit {
  double a0 = 0.0;
  double a2 = 0.0;
  double a4 = 0.0;
  double c2 = 0.0;
  double residual = 0.0;   // rms of the least-squares residual relative to the data scale
  double condition = 0.0;  // of the column-scaled design matrix
  double stability = 0.0;  // |a2 change| when the window shifts by one grid step
  double t_min = 0.0;
  double t_max = 0.0;
  std::vector<double> ts;
  std::vector<double> traces;
};

HeatFit fit_heat_coefficients(const HeatSpectrum &spec, const TorusElement &a, const HeatFitConfig &cfg = {});
/// Fit over the given samples with the model c_{-1}/t + c0 + c1 t + c2 t^2.
HeatFit fit_heat_samples(const std::vector<double> &ts, const std::vector<double> &ys, double max_condition = 1e8);

struct ZetaZero {
  double value = 0.0;
  double projection = 0.0;  // trace0(a k^-2) / trace0(k^-2)
};
/// a2(a) minus the kernel projection term for the conformal Laplacian with dilaton h.
ZetaZero zeta_at_zero(const TorusElement &h, const TorusElement &a, const HeatFit &fit, const GnsTruncation &tr);
/// Tr(P a P) with P the projection on the lowest eigenvector of the Laplacian.
double kernel_projection_eigen(const HeatSpectrum &spec, const TorusElement &a);

struct KmsReport {
  double kms_residual = 0.0;
  std::vector<double> sigma_residuals;  // |phi(sigma_t(a)) - phi(a)| per requested t
};
/// phi(x) = trace0(x e^{-h}); compares phi(ab) with phi(b e^{-h} a e^{h}) and checks sigma_t invariance.
KmsReport kms_check(const TorusElement &h, const TorusElement &a, const TorusElement &b, const GnsTruncation &tr,
                    const std::vector<double> &ts = {0.3, 1.0});

using LatticeSymbol = std::function<TorusElement(double, double)>;

/// Op(f) on the truncation: column n is rep(f(-n)) e_n.
GnsMatrix op_matrix(const LatticeSymbol &f, const AlgebraParams &p, const GnsTruncation &tr);

struct OpTrace {
  cplx sum{0.0, 0.0};
  cplx integral{0.0, 0.0};
  cplx difference{0.0, 0.0};
  double tail = 0.0;  // max |trace0 f| on the boundary ring of the lattice box
  double integral_error = 0.0;
};
OpTrace op_trace(const LatticeSymbol &f, int M, double quad_tol = 1e-12);

}  // namespace nct
