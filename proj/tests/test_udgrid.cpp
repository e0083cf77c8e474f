#include <doctest.h>

#include "nct/udgrid.hpp"

using namespace nct;

TEST_SUITE("udgrid") {
  TEST_CASE("curvature identity through three routes") {
    const Grid2D g{128, 8.0};
    const Field u = gaussian_packet(g, 0.3, -0.2, 1.0, 0.5, -0.7, {1.0, 0.5});
    for (double b : {0.37, -1.1}) {
      const auto r = curvature_identity_routes(TwistData::from_b12(b), u, g);
      CHECK(r.commutator < 1e-8);
      CHECK(r.symbol < 1e-12);
      CHECK(r.expansion < 1e-8);
    }
  }

  TEST_CASE("untwisted derivatives compose additively") {
    const Grid2D g{128, 8.0};
    const Field u = gaussian_packet(g, -0.4, 0.1, 0.9, -0.3, 0.6, {0.5, -1.0});
    const TwistData Z;
    const Field a = ud_apply({2, 1}, u, g, Z), b = ud_apply({1, 0}, ud_apply({1, 1}, u, g, Z), g, Z);
    CHECK((a - b).abs().maxCoeff() / a.abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("spectral derivative of a Gaussian") {
    const Grid2D g{128, 8.0};
    const Field u = g.sample([](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 2.0)); });
    const Field du = spectral_derivative(u, g, {1, 0});
    const Field exact = g.sample([](double x, double y) { return cplx(-x * std::exp(-(x * x + y * y) / 2.0)); });
    CHECK((du - exact).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("under-resolved fields are rejected") {
    const Grid2D g{32, 8.0};
    const Field u = gaussian_packet(g, 0.0, 0.0, 0.15, 0.0, 0.0, {1.0, 0.0});
    CHECK(spectral_tail(u) > 1e-9);
    CHECK_THROWS_AS(spectral_derivative(u, g, {1, 0}), AliasingError);
  }
}
