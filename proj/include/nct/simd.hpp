#pragma once
// Complex vector kernels with a scalar reference and an AVX2/FMA variant chosen at runtime.

#include <complex>
#include <cstddef>
#include <string>

namespace nct::simd {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct Kernels {
  Isa isa;
  /// y += a x
  void (*zaxpy)(std::size_t n, cplx a, const cplx *x, cplx *y);
  /// y = w .* x with real w
  void (*dscale)(std::size_t n, const double *w, const cplx *x, cplx *y);
  /// sum conj(x_i) y_i
  cplx (*zdotc)(std::size_t n, const cplx *x, const cplx *y);
  /// y = (W o A) x, W real and A complex, both column-major rows x cols
  void (*hadamard_matvec)(std::size_t rows, std::size_t cols, const double *W, const cplx *A, const cplx *x,
                          cplx *y);
  /// out = alpha hb + beta b1 - b2 + c v (Clenshaw step)
  void (*cheb_combine)(std::size_t n, double alpha, const cplx *hb, double beta, const cplx *b1, const cplx *b2,
                       cplx c, const cplx *v, cplx *out);
};

const Kernels &scalar_kernels();
/// Valid only when avx2_available() is true.
const Kernels &avx2_kernels();
bool avx2_available();

/// Kernels selected at first use: AVX2 when the CPU supports AVX2 and FMA, unless NCT_SIMD=scalar.
const Kernels &kernels();
void force_isa(Isa isa);
std::string isa_name(Isa isa);

}  // namespace nct::simd
