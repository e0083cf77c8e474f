#include <doctest.h>

#include "nct/gns.hpp"

using namespace nct;

namespace {
const AlgebraParams P{0.6180339887498949, {0.3, 1.1}};
}

TEST_SUITE("gns") {
  TEST_CASE("representation is multiplicative on the interior") {
    std::mt19937_64 rng(21);
    const GnsTruncation tr{8};
    const auto a = random_element(P, 1, rng), b = random_element(P, 1, rng);
    const CMat ab = represent(a, tr).data * represent(b, tr).data;
    const CMat rab = represent(multiply(a, b), tr).data;
    double worst = 0.0;
    for (int k : tr.block(6)) worst = std::max(worst, (ab.col(k) - rab.col(k)).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-13);
    const auto rec = reconstruct(represent(a, tr), P);
    CHECK(distance_l1(rec.element, a) < 1e-14);
  }

  TEST_CASE("flat heat coefficients") {
    const HeatSpectrum spec(laplacian(LaplacianKind::Flat, TorusElement(P), 1.0, GnsTruncation{12}));
    const auto f = fit_heat_coefficients(spec, TorusElement::unit(P));
    const double a0 = kPi / P.tau.imag();
    CHECK(std::abs(f.a0 - a0) < 1e-3 * a0);
    CHECK(std::abs(f.a2) < 2e-3 * a0);
  }

  TEST_CASE("conformal Laplacian is positive with a one-dimensional kernel") {
    std::mt19937_64 rng(22);
    const auto h = random_self_adjoint(P, 1, 0.5, rng);
    const HeatSpectrum spec(laplacian(LaplacianKind::Conformal, h, 1.0, GnsTruncation{6}));
    CHECK(spec.values(0) > -1e-10);
    CHECK(spec.values(0) < 1e-10);
    CHECK(spec.values(1) > 0.1);
    CHECK(kernel_projection_eigen(spec, TorusElement::unit(P)) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("KMS condition") {
    std::mt19937_64 rng(23);
    const auto h = random_self_adjoint(P, 1, 0.4, rng);
    const auto a = random_element(P, 1, rng), b = random_element(P, 1, rng);
    const auto r = kms_check(h, a, b, GnsTruncation{10});
    CHECK(r.kms_residual < 1e-10);
    for (double s : r.sigma_residuals) CHECK(s < 1e-10);
  }

  TEST_CASE("trace formula is exact for lattice-supported symbols") {
    std::mt19937_64 rng(24);
    std::map<FourierIndex, TorusElement> tab;
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n) tab[{m, n}] = random_element(P, 1, rng);
    const LatticeSymbol f = [&](double x, double y) {
      auto it = tab.find({int(std::lround(x)), int(std::lround(y))});
      return (it == tab.end() || x != std::round(x) || y != std::round(y)) ? TorusElement(P) : it->second;
    };
    cplx s = 0.0;
    for (const auto &[k, v] : tab) s += trace0(v);
    CHECK(std::abs(op_matrix(f, P, GnsTruncation{4}).data.trace() - s) < 1e-12 * std::abs(s));
  }

  TEST_CASE("fit rejects windows outside the resolved band") {
    const HeatSpectrum spec(laplacian(LaplacianKind::Flat, TorusElement(P), 1.0, GnsTruncation{6}));
    HeatFitConfig cfg;
    cfg.t_min = 1e-6;
    cfg.t_max = 1e-5;
    CHECK_THROWS_AS(fit_heat_coefficients(spec, TorusElement::unit(P), cfg), WindowViolated);
  }
}
