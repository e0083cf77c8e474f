#include "nct/udgrid.hpp"

#include <cmath>

#include <fftw3.h>

namespace nct {

Field Grid2D::coordinate(int j) const {
  Field f(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) f(a, b) = j == 1 ? x(a) : x(b);
  return f;
}

Field Grid2D::sample(const std::function<cplx(double, double)> &f) const {
  Field u(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) u(a, b) = f(x(a), x(b));
  return u;
}

namespace {

Field fft(const Field &u, int sign) {
  const int n = int(u.rows());
  Field out(n, n);
  Field in = u;
  auto *pi = reinterpret_cast<fftw_complex *>(in.data());
  auto *po = reinterpret_cast<fftw_complex *>(out.data());
  fftw_plan plan = fftw_plan_dft_2d(n, n, pi, po, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (sign == FFTW_BACKWARD) out /= double(n) * n;
  return out;
}

int freq(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace

double spectral_tail(const Field &u) {
  const Field U = fft(u, FFTW_FORWARD);
  const int n = int(u.rows());
  const int cut = 3 * n / 8;
  double peak = 0.0, tail = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double v = std::abs(U(a, b));
      peak = std::max(peak, v);
      if (std::abs(freq(a, n)) > cut || std::abs(freq(b, n)) > cut) tail = std::max(tail, v);
    }
  return peak > 0.0 ? tail / peak : 0.0;
}

Field spectral_derivative(const Field &u, const Grid2D &g, Multi beta, double tol) {
  if (beta[0] == 0 && beta[1] == 0) return u;
  const int n = g.n;
  if (u.rows() != n || u.cols() != n) throw std::invalid_argument("field does not match the grid");
  Field U = fft(u, FFTW_FORWARD);
  double peak = 0.0, tail = 0.0;
  const int cut = 3 * n / 8;
  const double dk = kPi / g.L;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int m1 = freq(a, n), m2 = freq(b, n);
      const double v = std::abs(U(a, b));
      peak = std::max(peak, v);
      if (std::abs(m1) > cut || std::abs(m2) > cut) tail = std::max(tail, v);
      const bool nyq = (m1 == -n / 2 && beta[0] % 2) || (m2 == -n / 2 && beta[1] % 2);
      U(a, b) = nyq ? cplx(0.0) : U(a, b) * std::pow(cplx(0.0, dk * m1), beta[0]) * std::pow(cplx(0.0, dk * m2), beta[1]);
    }
  if (peak > 0.0 && tail > tol * peak) throw AliasingError("spectral tail above tolerance: grid too coarse");
  return fft(U, FFTW_BACKWARD);
}

Field ud_single(int j, const Field &u, const Grid2D &g, const TwistData &B) {
  const Multi e = j == 1 ? Multi{1, 0} : Multi{0, 1};
  const Field Bx = B(j - 1, 0) * g.coordinate(1) + B(j - 1, 1) * g.coordinate(2);
  return cplx(0.0, -1.0) * spectral_derivative(u, g, e) + Bx * u;
}

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Field ipow(const Field &x, int p) {
  Field r = Field::Ones(x.rows(), x.cols());
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

Field ud_apply(Multi gamma, const Field &u, const Grid2D &g, const TwistData &B) {
  const Field x1 = g.coordinate(1), x2 = g.coordinate(2);
  const Field Bx1 = B(0, 0) * x1 + B(0, 1) * x2, Bx2 = B(1, 0) * x1 + B(1, 1) * x2;
  Field out = Field::Zero(g.n, g.n);
  for (int b1 = 0; b1 <= gamma[0]; ++b1)
    for (int b2 = 0; b2 <= gamma[1]; ++b2) {
      const double c = binom(gamma[0], b1) * binom(gamma[1], b2);
      const Field d = spectral_derivative(u, g, {b1, b2}) * (std::pow(cplx(0.0, -1.0), b1 + b2) * c);
      out += ipow(Bx1, gamma[0] - b1) * ipow(Bx2, gamma[1] - b2) * d;
    }
  return out;
}

std::map<FourierIndex, Field> ud_apply(Multi gamma, const std::map<FourierIndex, Field> &u, const Grid2D &g,
                                       const TwistData &B) {
  std::map<FourierIndex, Field> out;
  for (const auto &[k, f] : u) out[k] = ud_apply(gamma, f, g, B);
  return out;
}

Field ud_pair_expanded(int j, int k, const Field &u, const Grid2D &g, const TwistData &B) {
  const int J = j - 1, K = k - 1;
  const Field x[2] = {g.coordinate(1), g.coordinate(2)};
  Multi ejk{0, 0};
  ++ejk[J];
  ++ejk[K];
  const Multi ej = j == 1 ? Multi{1, 0} : Multi{0, 1};
  const Multi ek = k == 1 ? Multi{1, 0} : Multi{0, 1};
  const cplx I(0.0, 1.0);
  const Field dj = spectral_derivative(u, g, ej), dk = spectral_derivative(u, g, ek);
  Field out = -spectral_derivative(u, g, ejk) - I * B(K, J) * u;
  for (int s = 0; s < 2; ++s) {
    out -= I * B(J, s) * x[s] * dk;
    out -= I * B(K, s) * x[s] * dj;
    for (int r = 0; r < 2; ++r) out += B(J, s) * B(K, r) * x[s] * x[r] * u;
  }
  return out;
}

Field op_apply(const Symbol &f, const Field &u, const Grid2D &g) {
  Field out = Field::Zero(g.n, g.n);
  for (const Term &t : f.terms()) {
    if (!t.atoms.empty() || t.lam != 0) throw std::invalid_argument("op_apply needs a scalar polynomial symbol");
    for (const auto &[gamma, c] : t.poly.c) out += c * ud_apply(gamma, u, g, f.ctx()->twist());
  }
  return out;
}

CurvatureRoutes curvature_identity_routes(const TwistData &B, const Field &u, const Grid2D &g) {
  CurvatureRoutes r;
  const double scale = u.abs().maxCoeff();
  const cplx c = cplx(0.0, 2.0 * B(0, 1));
  const Field op = ud_single(1, ud_single(2, u, g, B), g, B) - ud_single(2, ud_single(1, u, g, B), g, B);
  r.commutator = (op - c * u).abs().maxCoeff() / scale;
  const Field ex = ud_pair_expanded(1, 2, u, g, B) - ud_pair_expanded(2, 1, u, g, B);
  r.expansion = (ex - c * u).abs().maxCoeff() / scale;

  const ContextPtr ctx = make_context(AlgebraParams{}, B);
  const Symbol x1 = Symbol::scalar(ctx, Poly::xi(1)), x2 = Symbol::scalar(ctx, Poly::xi(2));
  const Symbol d = compose_symbols(x1, x2, 2) - compose_symbols(x2, x1, 2) - Symbol::scalar(ctx, Poly::constant(c));
  for (const Term &t : d.terms())
    for (const auto &[gm, v] : t.poly.c) r.symbol = std::max(r.symbol, std::abs(v));
  return r;
}

double symbol_product_residual(const TwistData &B) {
  const ContextPtr ctx = make_context(AlgebraParams{}, B);
  double res = 0.0;
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k) {
      const Symbol xj = Symbol::scalar(ctx, Poly::xi(j)), xk = Symbol::scalar(ctx, Poly::xi(k));
      const Symbol expect = Symbol::scalar(ctx, Poly::xi(j) * Poly::xi(k) + Poly::constant(cplx(0.0, B(j - 1, k - 1))));
      const Symbol d = compose_symbols(xj, xk, 2) - expect;
      for (const Term &t : d.terms())
        for (const auto &[gm, v] : t.poly.c) res = std::max(res, std::abs(v));
    }
  return res;
}

Field gaussian_packet(const Grid2D &g, double c1, double c2, double w, double k1, double k2, cplx amp) {
  return g.sample([&](double x1, double x2) {
    const double r2 = (x1 - c1) * (x1 - c1) + (x2 - c2) * (x2 - c2);
    return amp * std::exp(-r2 / (2.0 * w * w)) * std::exp(cplx(0.0, k1 * x1 + k2 * x2));
  });
}

}  // namespace nct
