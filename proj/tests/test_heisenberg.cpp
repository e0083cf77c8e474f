#include <doctest.h>

#include "nct/heisenberg.hpp"

using namespace nct;

namespace {

const double Theta = 0.6180339887498949;
const cplx Tau{0.3, 1.1};

struct Case {
  HeisenbergParams p;
  SectionGrid g;
  double width;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  for (auto p : {HeisenbergParams::make(0, -1, 1, 0, Theta), HeisenbergParams::make(1, 0, 2, 1, Theta)})
    out.push_back({p, SectionGrid{12.0, 512, p.components()}, std::abs(p.rank()) / p.components()});
  return out;
}

HeisenbergSection packet(const Case &c, double t0, double k, double w) {
  return HeisenbergSection::sample(c.g, [&](double t, int a) {
    return std::exp(-kPi * w * (t - t0) * (t - t0) / c.width) * std::exp(cplx(0.0, 2.0 * kPi * k * t)) *
           cplx(1.0 + 0.3 * a, 0.2 - 0.1 * a);
  });
}

double dist(const HeisenbergSection &a, const HeisenbergSection &b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("heisenberg") {
  TEST_CASE("module parameters") {
    CHECK_THROWS_AS(HeisenbergParams::make(1, 0, 0, 1, Theta), TrivialBimodule);
    CHECK_THROWS_AS(HeisenbergParams::make(1, 1, 1, 1, Theta), std::invalid_argument);
    const auto p = HeisenbergParams::make(1, 0, 2, 1, Theta);
    CHECK(p.rank() == doctest::Approx(2 * Theta + 1));
    CHECK(p.slope() == doctest::Approx(2 / (2 * Theta + 1)));
    CHECK((p.d * p.d_inverse()) % 2 == 1);
    const auto q = p.inverse();
    CHECK(q.theta == doctest::Approx(p.theta_prime()));
    CHECK(q.inverse().theta == doctest::Approx(Theta));
  }

  TEST_CASE("Gaussian norm matches the closed form") {
    const Case c = cases()[0];
    const auto f = HeisenbergSection::sample(c.g, [](double t, int) { return cplx(std::exp(-kPi * t * t)); });
    CHECK(std::abs(l2_inner(f, f) - std::sqrt(0.5)) < 1e-12);
  }

  TEST_CASE("bimodule relations") {
    for (const Case &c : cases()) {
      const auto f = packet(c, 0.2, 0.3, 1.0);
      auto a = act_right(act_right(f, c.p, 2), c.p, 1), b = act_right(act_right(f, c.p, 1), c.p, 2);
      b.values *= std::exp(cplx(0.0, 2.0 * kPi * c.p.theta));
      CHECK(dist(a, b) < 1e-12);
      a = act_left(act_left(f, c.p, 1), c.p, 2);
      b = act_left(act_left(f, c.p, 2), c.p, 1);
      b.values *= std::exp(cplx(0.0, 2.0 * kPi * c.p.theta_prime()));
      CHECK(dist(a, b) < 1e-12);
      for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
          CHECK(dist(act_left(act_right(f, c.p, j), c.p, i), act_right(act_left(f, c.p, i), c.p, j)) < 1e-12);
      CHECK(dist(act_right(act_right(f, c.p, 2, 3), c.p, 2, -3), f) < 1e-12);
    }
  }

  TEST_CASE("inner product double equality and associativity") {
    for (const Case &c : cases()) {
      const auto f1 = packet(c, 0.1, 0.2, 1.0), f2 = packet(c, -0.3, -0.1, 0.8), f3 = packet(c, 0.25, 0.0, 1.2);
      const int M = 16;
      const cplx mid = l2_inner(f1, f2);
      CHECK(std::abs(std::abs(c.p.rank()) * trace0(valued_inner_left(f2, f1, c.p, Tau, M)) - mid) < 1e-10);
      CHECK(std::abs(trace0(valued_inner_right(f1, f2, c.p, Tau, M)) - mid) < 1e-10);
      const auto x = valued_inner_left(f1, f2, c.p, Tau, M), y = valued_inner_right(f2, f3, c.p, Tau, M);
      CHECK(dist(apply_left(x, f3, c.p), apply_right(f1, y, c.p)) < 1e-9);
      const auto r = valued_inner_right(f1, f1, c.p, Tau, M);
      CHECK(r.is_self_adjoint(1e-12));
    }
  }

  TEST_CASE("too small a cutoff is reported") {
    const Case c = cases()[1];
    const auto f = packet(c, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(valued_inner_left(f, f, c.p, Tau, 1), CutoffTooSmall);
  }

  TEST_CASE("connection has constant curvature and is Hermitian") {
    for (const Case &c : cases()) {
      const auto f = packet(c, 0.2, 0.1, 1.0), g = packet(c, -0.1, 0.3, 0.9);
      auto k = connection(connection(f, c.p, 2), c.p, 1);
      k.values -= connection(connection(f, c.p, 1), c.p, 2).values;
      k.values -= cplx(0.0, 2.0 * kPi * c.p.slope()) * f.values;
      CHECK(k.values.cwiseAbs().maxCoeff() < 1e-10);
      for (int j = 1; j <= 2; ++j)
        CHECK(std::abs(l2_inner(connection(f, c.p, j), g) + l2_inner(f, connection(g, c.p, j))) < 1e-10);
    }
  }

  TEST_CASE("oscillator oracle and grid ladder") {
    for (const Case &c : cases()) {
      const double kappa = oscillator_kappa(c.p, Tau);
      const RVec o = hermite_oracle(c.p.slope(), Tau, 10);
      for (int n = 0; n < 10; ++n) CHECK(std::abs(o(n) - (std::abs(kappa) * (n + 0.5) - kappa / 2)) < 1e-9);
      const auto ops = module_operators(c.p, Tau, c.g);
      const HermitianEigen e = eigh(ops.dE.adjoint() * ops.dE);
      std::vector<double> levels;
      for (int i = 0; i < e.values.size() && levels.size() < std::size_t(10 * c.p.components()); ++i)
        if (edge_mass(e.vectors.col(i), c.g) < 1e-6) levels.push_back(e.values(i));
      REQUIRE(levels.size() == std::size_t(10 * c.p.components()));
      for (std::size_t i = 0; i < levels.size(); ++i)
        CHECK(std::abs(levels[i] - o(int(i) / c.p.components())) < 1e-6 * std::abs(kappa) * 10);
    }
  }

  TEST_CASE("transpose map") {
    for (const Case &c : cases()) {
      const HeisenbergParams q = c.p.inverse();
      const SectionGrid gq{c.g.L, c.g.G, q.components()};
      const auto f = packet(c, 0.15, 0.2, 1.0);
      const auto J = j_transpose(f, c.p, gq);
      CHECK(dist(j_transpose(J, q, c.g), f) < 1e-9);
      for (int j = 1; j <= 2; ++j)
        CHECK(dist(j_transpose(act_right(f, c.p, j), c.p, gq), act_left(J, q, j, -1)) < 1e-9);
    }
    // A real Gaussian on one component maps to the dilated Gaussian.
    const Case c = cases()[0];
    const HeisenbergParams q = c.p.inverse();
    const auto f = HeisenbergSection::sample(c.g, [](double t, int) { return cplx(std::exp(-kPi * t * t)); });
    const auto J = j_transpose(f, c.p, c.g);
    const auto expect = HeisenbergSection::sample(
        c.g, [&](double t, int) { return cplx(std::exp(-kPi * c.p.rank() * c.p.rank() * t * t)); });
    CHECK(dist(J, expect) < 1e-9);
    (void)q;
  }

  TEST_CASE("resampling vanishes outside the box") {
    const Case c = cases()[0];
    const auto f = HeisenbergSection::sample(c.g, [](double t, int) { return cplx(std::exp(-t * t)); });
    const CVec v = resample(f.values.col(0), c.g, {0.3, 20.0, -13.0});
    CHECK(std::abs(v(0) - std::exp(-0.09)) < 1e-10);
    CHECK(v(1) == cplx(0.0));
    CHECK(v(2) == cplx(0.0));
  }

  TEST_CASE("flat heat trace is the ladder sum") {
    for (const Case &c : cases()) {
      const double kappa = oscillator_kappa(c.p, Tau);
      const double w = c.p.rank() * c.p.rank() * std::abs(kappa);
      const int s = oscillator_shift(c.p, Tau);
      const double t = 0.3 / w;
      double sum = 0.0;
      for (int n = 0; n < 400; ++n) sum += c.p.components() * std::exp(-t * w * (n + s));
      CHECK(flat_oscillator_heat_trace(c.p, Tau, t) == doctest::Approx(sum).epsilon(1e-12));
    }
  }

  TEST_CASE("flat Morita check: constant term and traceless probe") {
    const auto p = HeisenbergParams::make(0, -1, 1, 0, Theta);
    const AlgebraParams ap{Theta, Tau};
    const MoritaReport r = morita_curvature_check(TorusElement(ap), p, Tau);
    const HeisenbergParams q = p.inverse();
    const double expect = q.components() * (0.5 - oscillator_shift(q, Tau));
    CHECK(std::abs(r.probes.at(0).a2 - expect) < 1e-3 * std::abs(expect));
    CHECK(std::abs(r.probes.at(1).a2) < 1e-3);
    CHECK(r.good_levels >= 4);
  }
}
