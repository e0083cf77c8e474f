#include <doctest.h>

#include "nct/curvature.hpp"
#include "nct/psymbol.hpp"
#include "nct/udgrid.hpp"

using namespace nct;

namespace {
const AlgebraParams P{0.6180339887498949, {0.3, 1.1}};
}

TEST_SUITE("psymbol") {
  TEST_CASE("twist must be antisymmetric") {
    TwistData b;
    b.b[0][1] = 0.3;
    CHECK_THROWS(b.validate());
    CHECK_NOTHROW(TwistData::from_b12(0.3).validate());
  }

  TEST_CASE("polynomial algebra") {
    const Poly p = Poly::xi(1) * Poly::xi(2) + Poly::constant(2.0);
    CHECK(p.degree() == 2);
    CHECK(!p.homogeneous());
    CHECK(p.eval(0.5, -2.0) == cplx(1.0));
    CHECK(p.derive(1).eval(0.3, 0.7) == cplx(0.7));
  }

  TEST_CASE("composition of scalar symbols is exact under a twist") {
    const TwistData B = TwistData::from_b12(0.37);
    const Grid2D g{128, 8.0};
    const Field u = gaussian_packet(g, 0.3, -0.2, 1.0, 0.5, -0.7, {1.0, 0.5});
    auto ctx = make_context(P, B);
    const Symbol f = Symbol::scalar(ctx, Poly::xi(1) * Poly::xi(2) + Poly::xi(2) * cplx(0.3, 0.1) + Poly::constant(2.0));
    const Symbol h = Symbol::scalar(ctx, Poly::xi(1) * Poly::xi(1) + Poly::xi(1) * cplx(-0.5));
    const Field l = op_apply(f, op_apply(h, u, g), g), r = op_apply(compose_symbols(f, h, 2), u, g);
    CHECK((l - r).abs().maxCoeff() / l.abs().maxCoeff() < 1e-10);
  }

  TEST_CASE("symbol products of twisted derivatives") {
    CHECK(symbol_product_residual(TwistData::from_b12(0.37)) < 1e-14);
    CHECK(symbol_product_residual(TwistData{}) < 1e-14);
  }

  TEST_CASE("k Delta k lies outside the conformal family once theta != 0") {
    std::mt19937_64 rng(31);
    const auto h = random_self_adjoint(P, 1, 0.5, rng);
    const auto m = match_conformal(dilaton_factors(h).k);
    CHECK(m.residual1 + m.residual2 > 1e-6);
    const AlgebraParams c{0.0, P.tau};
    std::mt19937_64 rng2(31);
    const auto hc = random_self_adjoint(c, 1, 0.5, rng2);
    const auto mc = match_conformal(dilaton_factors(hc).k);
    CHECK(mc.residual1 + mc.residual2 < 1e-10);
  }

  TEST_CASE("dilaton factors") {
    std::mt19937_64 rng(32);
    const auto h = random_self_adjoint(P, 1, 0.5, rng);
    const Dilaton d = dilaton_factors(h);
    CHECK(distance_l1(multiply(d.k, d.k), d.k2) < 1e-13);
    CHECK(d.k.is_self_adjoint(1e-13));
  }

  TEST_CASE("parametrix homogeneity and residual decay") {
    std::mt19937_64 rng(33);
    const auto h = random_self_adjoint(P, 1, 0.3, rng);
    auto ctx = make_context(P);
    const Parametrix par = resolvent_parametrix(laplace_kdk(dilaton_factors(h).k), ctx);
    SymbolEvaluator ev(ctx, GnsTruncation{5});
    for (const auto &c : homogeneity_report(par, ev)) CHECK_MESSAGE(c.pass, c.name);
    CHECK(parametrix_residual_slope(par, ev, {4, 8, 16, 32}).slope < -2.8);
  }

  TEST_CASE("flat calibrations") {
    CHECK(flat_a0_by_integration(P.tau) == doctest::Approx(kPi / P.tau.imag()).epsilon(1e-9));
    for (double t : {0.2, 1.3})
      for (double r : {0.5, 3.0}) CHECK(std::abs(contour_identity(t, r) - std::exp(-t * r)) < 1e-12);
  }
}
