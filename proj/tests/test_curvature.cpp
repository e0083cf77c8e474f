#include <doctest.h>

#include "nct/curvature.hpp"

using namespace nct;

namespace {
const AlgebraParams P{0.6180339887498949, {0.3, 1.1}};
}

TEST_SUITE("curvature") {
  TEST_CASE("Gauss-Bonnet on random dilatons") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 4; ++k) {
      const auto h = random_self_adjoint(P, 2, 1.0, rng);
      const auto r = modular_curvature(h, 16);
      CHECK(r.gauss_bonnet_residual < 1e-12);
      CHECK(r.selfadjoint_residual < 1e-12);
    }
  }

  TEST_CASE("flat dilaton has zero curvature") {
    const auto r = modular_curvature(TorusElement(P), 8);
    CHECK(r.density.l1_norm() == 0.0);
    CHECK(modular_curvature(TorusElement::unit(P, 0.4), 8).density.l1_norm() < 1e-14);
  }

  TEST_CASE("prefactor conventions differ by 4 pi Im tau") {
    std::mt19937_64 rng(12);
    const auto h = random_self_adjoint(P, 1, 0.5, rng);
    const auto cm = modular_curvature(h, 12), lm = modular_curvature(h, 12, PrefactorConvention::LM2015);
    const double f = convention_factor(PrefactorConvention::LM2015, P);
    CHECK(f == doctest::Approx(4.0 * kPi * P.tau.imag()));
    CHECK(distance_l1(lm.density, f * cm.density) < 1e-12 * lm.density.l1_norm());
    CHECK(convention_from_name(convention_name(PrefactorConvention::LM2015)) == PrefactorConvention::LM2015);
  }

  TEST_CASE("F is scale invariant and minimal at the flat metric") {
    std::mt19937_64 rng(13);
    const double f0 = F_value(TorusElement(P), 12);
    for (int k = 0; k < 3; ++k) {
      const auto h = random_self_adjoint(P, 2, 0.8, rng);
      const double f = F_value(h, 12);
      CHECK(f > f0);
      CHECK(std::abs(F_value(h + TorusElement::unit(P, -1.3), 12) - f) < 1e-10);
    }
  }

  TEST_CASE("gradient of F matches central differences") {
    std::mt19937_64 rng(14);
    const auto h = random_self_adjoint(P, 1, 0.6, rng);
    const auto g = grad_F(h, 12);
    for (int k = 0; k < 3; ++k) {
      const auto a = random_self_adjoint(P, 1, 1.0, rng);
      const double e = 1e-4;
      const double fd = (F_value(h + e * a, 12) - F_value(h - e * a, 12)) / (2 * e);
      CHECK(std::abs(trace0(multiply(a, g)).real() - fd) < 1e-6 * std::abs(fd) + 1e-12);
    }
    CHECK(std::abs(trace0(g)) < 1e-12);
  }

  TEST_CASE("quadratic part of F is positive off the flat metric") {
    std::mt19937_64 rng(15);
    const auto h = random_self_adjoint(P, 2, 0.5, rng);
    CHECK(kplus_quadratic(h, 12) > 0.0);
  }

  TEST_CASE("eta at i") {
    // |eta(i)| = Gamma(1/4) / (2 pi^{3/4})
    const double expect = std::tgamma(0.25) / (2.0 * std::pow(kPi, 0.75));
    CHECK(std::abs(dedekind_eta({0.0, 1.0})) == doctest::Approx(expect).epsilon(1e-13));
  }
}
