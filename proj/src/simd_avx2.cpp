#include "nct/simd.hpp"

#include <immintrin.h>

namespace nct::simd {
namespace {

inline __m256d cmul_bcast(__m256d ar, __m256d ai, __m256d v) {
  const __m256d vs = _mm256_permute_pd(v, 0x5);
  return _mm256_fmaddsub_pd(ar, v, _mm256_mul_pd(ai, vs));
}

inline __m256d widen_pair(const double *w) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w)), 0x50);
}

void zaxpy(std::size_t n, cplx a, const cplx *x, cplx *y) {
  const __m256d ar = _mm256_set1_pd(a.real()), ai = _mm256_set1_pd(a.imag());
  const double *xp = reinterpret_cast<const double *>(x);
  double *yp = reinterpret_cast<double *>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(yv, cmul_bcast(ar, ai, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void dscale(std::size_t n, const double *w, const cplx *x, cplx *y) {
  const double *xp = reinterpret_cast<const double *>(x);
  double *yp = reinterpret_cast<double *>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) _mm256_storeu_pd(yp + 2 * i, _mm256_mul_pd(widen_pair(w + i), _mm256_loadu_pd(xp + 2 * i)));
  for (; i < n; ++i) y[i] = w[i] * x[i];
}

cplx zdotc(std::size_t n, const cplx *x, const cplx *y) {
  const double *xp = reinterpret_cast<const double *>(x);
  const double *yp = reinterpret_cast<const double *>(y);
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    re = _mm256_fmadd_pd(xv, yv, re);
    im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), im);
  }
  alignas(32) double r[4], s[4];
  _mm256_store_pd(r, re);
  _mm256_store_pd(s, im);
  cplx acc(r[0] + r[1] + r[2] + r[3], (s[0] - s[1]) + (s[2] - s[3]));
  for (; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

void hadamard_matvec(std::size_t rows, std::size_t cols, const double *W, const cplx *A, const cplx *x, cplx *y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = 0.0;
  double *yp = reinterpret_cast<double *>(y);
  for (std::size_t j = 0; j < cols; ++j) {
    const __m256d ar = _mm256_set1_pd(x[j].real()), ai = _mm256_set1_pd(x[j].imag());
    const double *w = W + j * rows;
    const double *a = reinterpret_cast<const double *>(A + j * rows);
    std::size_t i = 0;
    for (; i + 2 <= rows; i += 2) {
      const __m256d wa = _mm256_mul_pd(widen_pair(w + i), _mm256_loadu_pd(a + 2 * i));
      const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
      _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(yv, cmul_bcast(ar, ai, wa)));
    }
    for (; i < rows; ++i) y[i] += (w[i] * A[j * rows + i]) * x[j];
  }
}

void cheb_combine(std::size_t n, double alpha, const cplx *hb, double beta, const cplx *b1, const cplx *b2, cplx c,
                  const cplx *v, cplx *out) {
  const __m256d va = _mm256_set1_pd(alpha), vb = _mm256_set1_pd(beta);
  const __m256d cr = _mm256_set1_pd(c.real()), ci = _mm256_set1_pd(c.imag());
  const double *hp = reinterpret_cast<const double *>(hb);
  const double *p1 = reinterpret_cast<const double *>(b1);
  const double *p2 = reinterpret_cast<const double *>(b2);
  const double *pv = reinterpret_cast<const double *>(v);
  double *po = reinterpret_cast<double *>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d r = _mm256_fmsub_pd(vb, _mm256_loadu_pd(p1 + 2 * i), _mm256_loadu_pd(p2 + 2 * i));
    r = _mm256_fmadd_pd(va, _mm256_loadu_pd(hp + 2 * i), r);
    r = _mm256_add_pd(r, cmul_bcast(cr, ci, _mm256_loadu_pd(pv + 2 * i)));
    _mm256_storeu_pd(po + 2 * i, r);
  }
  for (; i < n; ++i) out[i] = alpha * hb[i] + beta * b1[i] - b2[i] + c * v[i];
}

}  // namespace

const Kernels &avx2_kernels() {
  static const Kernels k{Isa::Avx2, zaxpy, dscale, zdotc, hadamard_matvec, cheb_combine};
  return k;
}

}  // namespace nct::simd
