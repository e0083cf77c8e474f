#include "nct/linalg.hpp"

#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace nct {
namespace {

RVec solve(CMat &a, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVec w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n,
                                         reinterpret_cast<lapack_complex_double *>(a.data()), n, w.data());
  if (info != 0) throw std::runtime_error("zheevd failed with info=" + std::to_string(info));
  return w;
}

}  // namespace

HermitianEigen eigh(const CMat &a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigh: matrix not square");
  CMat work = 0.5 * (a + a.adjoint());
  HermitianEigen e;
  e.values = solve(work, true);
  e.vectors = std::move(work);
  return e;
}

RVec eigvalsh(const CMat &a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigvalsh: matrix not square");
  CMat work = 0.5 * (a + a.adjoint());
  return solve(work, false);
}

CMat hermitian_function(const HermitianEigen &e, const std::function<double(double)> &f) {
  RVec fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(e.values[i]);
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

double hermitian_residual(const CMat &a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_residual(const CMat &v) {
  if (v.size() == 0) return 0.0;
  return (v.adjoint() * v - CMat::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

}  // namespace nct
