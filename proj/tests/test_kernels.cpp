#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "nct/kernels.hpp"

using namespace nct;
using boost::multiprecision::cpp_rational;

namespace {

// B_0..B_n from sum_{k<=m} binom(m+1, k) B_k = 0.
std::vector<cpp_rational> bernoulli_exact(int n) {
  std::vector<cpp_rational> b(n + 1);
  b[0] = 1;
  for (int m = 1; m <= n; ++m) {
    cpp_rational acc = 0, binom = 1;
    for (int k = 0; k < m; ++k) {
      acc += binom * b[k];
      binom = binom * (m + 1 - k) / (k + 1);
    }
    b[m] = -acc / (m + 1);
  }
  return b;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("Taylor coefficients are 8 B_2n / (2n)!") {
    const auto b = bernoulli_exact(24);
    const auto &c = ktilde0_taylor();
    cpp_rational fact = 1;
    for (int n = 1; n <= 12; ++n) {
      fact *= (2 * n - 1) * (2 * n);
      const double exact = static_cast<double>(cpp_rational(8 * b[2 * n] / fact));
      CHECK(std::abs(c[n - 1] - exact) <= 1e-15 * std::max(1.0, std::abs(exact)));
    }
    CHECK(c[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("series and closed branches agree near the switch") {
    for (double s : {0.05, 0.1, 0.3, 0.8, 1.5}) {
      CHECK(std::abs(eval_Ktilde0_series(s) - eval_Ktilde0_closed(s)) < 1e-11);
      CHECK(std::abs(eval_K0(s, 10.0) - eval_K0_closed(s)) < 1e-11);
    }
  }

  TEST_CASE("Kplus is -Ktilde0/2") {
    for (double s = -15.0; s <= 15.0; s += 0.37) CHECK(std::abs(eval_Kplus(s) + 0.5 * eval_Ktilde0(s)) < 1e-13);
    CHECK(eval_Kplus(0.0) == doctest::Approx(-1.0 / 3.0));
  }

  TEST_CASE("K0 factorisation and parity") {
    for (double s = -10.0; s <= 10.0; s += 0.41) {
      CHECK(std::abs(eval_K0(s) - eval_Ktilde0(s) * half_csch_factor(s)) < 1e-15);
      CHECK(std::abs(eval_Ktilde0(s) - eval_Ktilde0(-s)) < 1e-14);
    }
    CHECK(half_csch_factor(0.0) == 0.5);
    CHECK(std::isfinite(half_csch_factor(800.0)));
  }

  TEST_CASE("functional identity off the singular lines") {
    for (double s = -5.3; s <= 5.3; s += 0.7)
      for (double t = -5.1; t <= 5.1; t += 0.9) {
        if (std::min({std::abs(s), std::abs(t), std::abs(s + t)}) < 0.6) continue;
        CHECK(std::abs(fi_combination(s, t) + 0.5 * eval_Htilde0_closed(s, t)) < 1e-11);
      }
  }

  TEST_CASE("bivariate seam continuity") {
    for (double s : {-2.0, 0.7, 3.1}) {
      const double d = kDefaultBivariateBox;
      CHECK(std::abs(eval_Htilde0_fi(s, d) - eval_Htilde0_closed(s, d)) < 1e-11);
      CHECK(std::abs(eval_H0(s, d * (1 - 1e-15)) - eval_H0(s, d)) < 1e-11);
    }
  }

  TEST_CASE("derivative matches central differences") {
    for (double s : {0.3, 1.7, 2.5, -4.0}) {
      const double h = 1e-5;
      const double fd = (eval_Ktilde0(s + h, 10.0) - eval_Ktilde0(s - h, 10.0)) / (2 * h);
      CHECK(std::abs(eval_Ktilde0_prime(s) - fd) < 1e-8);
    }
  }

  TEST_CASE("kernel names") {
    for (auto k : {KernelKind::K0, KernelKind::H0, KernelKind::Ktilde0, KernelKind::Htilde0, KernelKind::Kplus})
      CHECK(kernel_from_name(kernel_name(k)) == k);
    CHECK_THROWS(kernel_from_name("K9"));
    CHECK_THROWS(CurvatureKernel{KernelKind::H0}(1.0));
  }
}
