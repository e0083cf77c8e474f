#pragma once
// Dense Hermitian eigensolver (LAPACK zheevd) and small helpers over Eigen types.

#include <complex>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nct {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<std::complex<double>>;

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns
};

/// Eigendecomposition of the Hermitian part (A + A^*)/2.
HermitianEigen eigh(const CMat &a);
RVec eigvalsh(const CMat &a);

/// V f(D) V^*.
CMat hermitian_function(const HermitianEigen &e, const std::function<double(double)> &f);

double hermitian_residual(const CMat &a);
double unitarity_residual(const CMat &v);

}  // namespace nct
