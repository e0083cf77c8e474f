#include "nct/simd.hpp"

namespace nct::simd {
namespace {

void zaxpy(std::size_t n, cplx a, const cplx *x, cplx *y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void dscale(std::size_t n, const double *w, const cplx *x, cplx *y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = w[i] * x[i];
}

cplx zdotc(std::size_t n, const cplx *x, const cplx *y) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

void hadamard_matvec(std::size_t rows, std::size_t cols, const double *W, const cplx *A, const cplx *x, cplx *y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    const cplx xj = x[j];
    const double *w = W + j * rows;
    const cplx *a = A + j * rows;
    for (std::size_t i = 0; i < rows; ++i) y[i] += (w[i] * a[i]) * xj;
  }
}

void cheb_combine(std::size_t n, double alpha, const cplx *hb, double beta, const cplx *b1, const cplx *b2, cplx c,
                  const cplx *v, cplx *out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * hb[i] + beta * b1[i] - b2[i] + c * v[i];
}

}  // namespace

const Kernels &scalar_kernels() {
  static const Kernels k{Isa::Scalar, zaxpy, dscale, zdotc, hadamard_matvec, cheb_combine};
  return k;
}

}  // namespace nct::simd
