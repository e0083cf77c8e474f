#include <doctest.h>

#include <random>
#include <vector>

#include "nct/simd.hpp"

using namespace nct::simd;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> v(n);
  for (auto &x : v) x = {nd(rng), nd(rng)};
  return v;
}

double max_diff(const std::vector<cplx> &a, const std::vector<cplx> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("avx2 kernels match the scalar reference") {
    if (!avx2_available()) return;
    const Kernels &s = scalar_kernels(), &v = avx2_kernels();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 1001u}) {
      const auto x = random_vec(n, rng), b1 = random_vec(n, rng), b2 = random_vec(n, rng), hb = random_vec(n, rng);
      auto y1 = random_vec(n, rng), y2 = y1;
      s.zaxpy(n, {0.3, -1.2}, x.data(), y1.data());
      v.zaxpy(n, {0.3, -1.2}, x.data(), y2.data());
      CHECK(max_diff(y1, y2) < 1e-14);

      std::vector<double> w(n);
      for (auto &e : w) e = ud(rng);
      s.dscale(n, w.data(), x.data(), y1.data());
      v.dscale(n, w.data(), x.data(), y2.data());
      CHECK(max_diff(y1, y2) == 0.0);

      CHECK(std::abs(s.zdotc(n, x.data(), b1.data()) - v.zdotc(n, x.data(), b1.data())) < 1e-12 * (1.0 + n));

      s.cheb_combine(n, 2.0, hb.data(), -0.5, b1.data(), b2.data(), {0.1, 0.2}, x.data(), y1.data());
      v.cheb_combine(n, 2.0, hb.data(), -0.5, b1.data(), b2.data(), {0.1, 0.2}, x.data(), y2.data());
      CHECK(max_diff(y1, y2) < 1e-14);
    }
    for (std::size_t rows : {1u, 5u, 33u})
      for (std::size_t cols : {1u, 4u, 17u}) {
        std::vector<double> W(rows * cols);
        for (auto &e : W) e = ud(rng);
        const auto A = random_vec(rows * cols, rng), x = random_vec(cols, rng);
        std::vector<cplx> y1(rows), y2(rows);
        s.hadamard_matvec(rows, cols, W.data(), A.data(), x.data(), y1.data());
        v.hadamard_matvec(rows, cols, W.data(), A.data(), x.data(), y2.data());
        CHECK(max_diff(y1, y2) < 1e-13);
      }
  }

  TEST_CASE("dispatch honours a forced isa") {
    force_isa(Isa::Scalar);
    CHECK(kernels().isa == Isa::Scalar);
    if (avx2_available()) {
      force_isa(Isa::Avx2);
      CHECK(kernels().isa == Isa::Avx2);
    }
    CHECK(isa_name(Isa::Scalar) != isa_name(Isa::Avx2));
  }
}
