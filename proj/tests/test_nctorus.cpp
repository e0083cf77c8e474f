#include <doctest.h>

#include "nct/nctorus.hpp"

using namespace nct;

namespace {
const AlgebraParams P{0.6180339887498949, {0.3, 1.1}};
}

TEST_SUITE("nctorus") {
  TEST_CASE("generator relation") {
    const auto u1 = TorusElement::monomial(P, 1, 0), u2 = TorusElement::monomial(P, 0, 1);
    const auto lhs = multiply(u2, u1), rhs = std::exp(cplx(0.0, 2.0 * kPi * P.theta)) * multiply(u1, u2);
    CHECK(distance_l1(lhs, rhs) < 1e-14);
    CHECK(distance_l1(multiply(u1, star(u1)), TorusElement::unit(P)) < 1e-15);
  }

  TEST_CASE("twist phase reduces large exponents") {
    const std::int64_t k = 123456789012LL;
    const cplx z = twist_phase(P.theta, k);
    CHECK(std::abs(std::abs(z) - 1.0) < 1e-14);
    CHECK(std::abs(twist_phase(P.theta, k) * twist_phase(P.theta, -k) - 1.0) < 1e-12);
  }

  TEST_CASE("ring axioms on random elements") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 5; ++k) {
      const auto a = random_element(P, 2, rng), b = random_element(P, 2, rng), c = random_element(P, 1, rng);
      const double s = a.l1_norm() * b.l1_norm() * c.l1_norm();
      CHECK(distance_l1(multiply(multiply(a, b), c), multiply(a, multiply(b, c))) / s < 1e-14);
      CHECK(distance_l1(star(multiply(a, b)), multiply(star(b), star(a))) / (a.l1_norm() * b.l1_norm()) < 1e-14);
      CHECK(std::abs(trace0(multiply(a, b)) - trace0(multiply(b, a))) / (a.l1_norm() * b.l1_norm()) < 1e-14);
      CHECK(trace0(multiply(star(a), a)).real() > 0.0);
    }
  }

  TEST_CASE("derivations obey Leibniz") {
    std::mt19937_64 rng(2);
    const auto a = random_element(P, 2, rng), b = random_element(P, 2, rng);
    for (int j = 1; j <= 2; ++j) {
      const auto lhs = derive(multiply(a, b), j);
      const auto rhs = multiply(derive(a, j), b) + multiply(a, derive(b, j));
      CHECK(distance_l1(lhs, rhs) / (a.l1_norm() * b.l1_norm()) < 1e-13);
      CHECK(std::abs(trace0(derive(a, j))) < 1e-15);
    }
  }

  TEST_CASE("random self-adjoint elements") {
    std::mt19937_64 rng(3);
    const auto h = random_self_adjoint(P, 2, 0.7, rng);
    CHECK(h.is_self_adjoint());
    CHECK(h.l1_norm() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(h.support_radius() <= 2);
  }

  TEST_CASE("json round trip and self-adjoint validation") {
    std::mt19937_64 rng(4);
    const auto h = random_self_adjoint(P, 1, 0.5, rng);
    const auto back = element_from_json(to_json(h, true));
    CHECK(back.params() == h.params());
    CHECK(distance_l1(back, h) == 0.0);
    auto j = to_json(TorusElement::monomial(P, 1, 0), true);
    CHECK_THROWS_AS(element_from_json(j), NotSelfAdjoint);
    nlohmann::json bad = {{"theta", 0.3}, {"tau", {0.0, -1.0}}, {"coeffs", nlohmann::json::array()}};
    CHECK_THROWS(element_from_json(bad));
  }

  TEST_CASE("mixing parameters is rejected") {
    const AlgebraParams q{0.25, {0.0, 1.0}};
    CHECK_THROWS_AS(TorusElement::unit(P) + TorusElement::unit(q), ParamsMismatch);
  }
}
