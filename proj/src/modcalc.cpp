#include "nct/modcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nct/simd.hpp"

namespace nct {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

RVec cheb_nodes(int n) {
  RVec x(n);
  for (int k = 0; k < n; ++k) x(k) = std::cos(kPi * (k + 0.5) / n);
  return x;
}

// T(a, k) = T_a(x_k), scaled by 2/n with the a = 0 row halved.
RMat cheb_transform(int n) {
  RMat T(n, n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) T(a, k) = std::cos(a * kPi * (k + 0.5) / n) * 2.0 / n;
  T.row(0) *= 0.5;
  return T;
}

// Rounding floor of the node transform grows with the number of summed values.
double effective_tol(double tol, int n, int dim) { return std::max(tol, (dim == 3 ? 32.0 : 4.0 * dim) * n * kEps); }

template <class Mag>
int trimmed_degree(int n, double cut, Mag tail_max) {
  int d = n;
  while (d > 1 && tail_max(d - 1) <= cut) --d;
  return d;
}

struct Expansion1 {
  RMat C;
  double fmax = 0.0;
};
struct Expansion2 {
  std::vector<RMat> Phi;
  double fmax = 0.0;
};

Expansion1 expand_difference(const Univariate &f, double M, const ModCalcOptions &o) {
  Expansion1 e;
  e.C = chebyshev_coefficients_2d([&](double x, double y) { return f(M * (y - x)); }, o.cheb_tol, o.max_degree);
  const RVec x = cheb_nodes(33);
  for (int i = 0; i < x.size(); ++i)
    for (int j = 0; j < x.size(); ++j) e.fmax = std::max(e.fmax, std::abs(f(M * (x(j) - x(i)))));
  return e;
}

Expansion2 expand_bidifference(const Bivariate &H, double M, const ModCalcOptions &o) {
  Expansion2 e;
  e.Phi = chebyshev_coefficients_3d([&](double x, double y, double z) { return H(M * (y - x), M * (z - y)); },
                                    o.cheb_tol, std::min(o.max_degree, 96));
  const RVec x = cheb_nodes(17);
  for (int i = 0; i < x.size(); ++i)
    for (int j = 0; j < x.size(); ++j)
      for (int l = 0; l < x.size(); ++l) e.fmax = std::max(e.fmax, std::abs(H(M * (x(j) - x(i)), M * (x(l) - x(j)))));
  return e;
}

// Columns T_b(S) v for b < n.
CMat cheb_vectors(const SpMat &S, const CVec &v, int n) {
  const auto &K = simd::kernels();
  CMat out(v.size(), n);
  out.col(0) = v;
  if (n > 1) out.col(1) = S * v;
  CVec hb(v.size());
  for (int b = 2; b < n; ++b) {
    hb.noalias() = S * out.col(b - 1);
    K.cheb_combine(v.size(), 2.0, hb.data(), 0.0, hb.data(), out.col(b - 2).data(), 0.0, hb.data(),
                   out.col(b).data());
  }
  return out;
}

// sum_k T_k(S) U.col(k) by Clenshaw.
CVec clenshaw(const SpMat &S, const CMat &U) {
  const auto &K = simd::kernels();
  const Eigen::Index D = U.rows();
  const int n = static_cast<int>(U.cols());
  CVec b1 = CVec::Zero(D), b2 = CVec::Zero(D), hb(D), nb(D);
  for (int k = n - 1; k >= 1; --k) {
    hb.noalias() = S * b1;
    K.cheb_combine(D, 2.0, hb.data(), 0.0, b1.data(), b2.data(), 1.0, U.col(k).data(), nb.data());
    std::swap(b2, b1);
    std::swap(b1, nb);
  }
  hb.noalias() = S * b1;
  CVec r(D);
  K.cheb_combine(D, 1.0, hb.data(), 0.0, b1.data(), b2.data(), 1.0, U.col(0).data(), r.data());
  return r;
}

double ring_mass(const CVec &r, const GnsTruncation &tr, int width) {
  double ring = 0.0;
  for (int k = 0; k < tr.dim(); ++k) {
    const FourierIndex mn = tr.at(k);
    if (std::max(std::abs(mn.m), std::abs(mn.n)) > tr.N - width) ring += std::abs(r(k));
  }
  return ring;
}

ModCalcResult finish(const CVec &r, const ModularCalcContext &ctx, double input_scale, int degree) {
  const GnsTruncation &tr = ctx.trunc();
  ModCalcResult out;
  out.degree = degree;
  const double total = r.cwiseAbs().sum();
  const double ring = ring_mass(r, tr, std::max(ctx.h().support_radius(), 1));
  out.truncation_residual = ring / std::max({total, 1e-6 * input_scale, 1e-300});
  if (out.truncation_residual > ctx.options().truncation_tol)
    throw TruncationInsufficient("modular calculus: outer-ring residual " + std::to_string(out.truncation_residual) +
                                     " at N = " + std::to_string(tr.N),
                                 out.truncation_residual);
  out.value = from_vector(r, tr, ctx.h().params());
  return out;
}

void check_input(const TorusElement &x, const ModularCalcContext &ctx) {
  if (!(x.params() == ctx.h().params())) throw ParamsMismatch("modular calculus: params mismatch");
  if (x.support_radius() + ctx.h().support_radius() > ctx.trunc().N)
    throw std::invalid_argument("modular calculus: input support exceeds the truncation buffer");
}

CVec spectral_1(const Univariate &f, const ModularCalcContext &ctx, const TorusElement &x, double &fmax) {
  const HermitianEigen &e = ctx.eigen();
  const GnsTruncation &tr = ctx.trunc();
  const Eigen::Index D = tr.dim();
  const CMat Xh = e.vectors.adjoint() * (represent_sparse(x, tr) * e.vectors);
  const CVec eh = e.vectors.row(tr.one()).adjoint();
  RMat F(D, D);
  for (Eigen::Index j = 0; j < D; ++j)
    for (Eigen::Index i = 0; i < D; ++i) F(i, j) = f(e.values(j) - e.values(i));
  fmax = F.cwiseAbs().maxCoeff();
  CVec rh(D);
  simd::kernels().hadamard_matvec(D, D, F.data(), Xh.data(), eh.data(), rh.data());
  return e.vectors * rh;
}

CVec spectral_2(const Bivariate &H, const ModularCalcContext &ctx,
                const std::vector<std::pair<TorusElement, TorusElement>> &pairs, double &fmax) {
  const HermitianEigen &e = ctx.eigen();
  const GnsTruncation &tr = ctx.trunc();
  const Eigen::Index D = tr.dim();
  const CVec eh = e.vectors.row(tr.one()).adjoint();
  std::vector<CMat> Xs, Ys;
  for (const auto &[x, y] : pairs) {
    Xs.push_back(e.vectors.adjoint() * (represent_sparse(x, tr) * e.vectors));
    Ys.push_back(e.vectors.adjoint() * (represent_sparse(y, tr) * e.vectors));
  }
  CVec rh = CVec::Zero(D);
  RMat W(D, D);
  CVec z(D);
  fmax = 0.0;
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index l = 0; l < D; ++l)
      for (Eigen::Index j = 0; j < D; ++j) W(j, l) = H(e.values(j) - e.values(i), e.values(l) - e.values(j));
    fmax = std::max(fmax, W.cwiseAbs().maxCoeff());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      simd::kernels().hadamard_matvec(D, D, W.data(), Ys[p].data(), eh.data(), z.data());
      rh(i) += Xs[p].row(i).transpose().cwiseProduct(z).sum();
    }
  }
  return e.vectors * rh;
}

}  // namespace

RVec chebyshev_coefficients_1d(const std::function<double(double)> &g, double tol, int max_degree) {
  for (int n = 16;; n *= 2) {
    n = std::min(n, max_degree);
    const RVec x = cheb_nodes(n);
    RVec fx(n);
    for (int k = 0; k < n; ++k) fx(k) = g(x(k));
    const RVec c = cheb_transform(n) * fx;
    const double big = c.cwiseAbs().maxCoeff();
    const double cut = effective_tol(tol, n, 1) * big;
    const int q = (3 * n) / 4;
    if (big == 0.0) return RVec::Zero(1);
    if (c.tail(n - q).cwiseAbs().maxCoeff() <= cut || n >= max_degree) {
      const int d = trimmed_degree(n, cut, [&](int k) { return std::abs(c(k)); });
      return c.head(d);
    }
  }
}

RMat chebyshev_coefficients_2d(const std::function<double(double, double)> &g, double tol, int max_degree) {
  for (int n = 16;; n *= 2) {
    n = std::min(n, max_degree);
    const RVec x = cheb_nodes(n);
    RMat F(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) F(i, j) = g(x(i), x(j));
    const RMat T = cheb_transform(n);
    const RMat C = T * F * T.transpose();
    const double big = C.cwiseAbs().maxCoeff();
    if (big == 0.0) return RMat::Zero(1, 1);
    const double cut = effective_tol(tol, n, 2) * big;
    auto shell = [&](int k) {
      return std::max(C.row(k).head(k + 1).cwiseAbs().maxCoeff(), C.col(k).head(k + 1).cwiseAbs().maxCoeff());
    };
    double tail = 0.0;
    for (int k = (3 * n) / 4; k < n; ++k) tail = std::max(tail, shell(k));
    if (tail <= cut || n >= max_degree) {
      const int d = trimmed_degree(n, cut, shell);
      return C.topLeftCorner(d, d);
    }
  }
}

std::vector<RMat> chebyshev_coefficients_3d(const std::function<double(double, double, double)> &g, double tol,
                                            int max_degree) {
  for (int n = 16;; n *= 2) {
    n = std::min(n, max_degree);
    const RVec x = cheb_nodes(n);
    const RMat T = cheb_transform(n);
    std::vector<RMat> G(n);
    RMat F(n, n);
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) F(l, m) = g(x(k), x(l), x(m));
      G[k] = T * F * T.transpose();
    }
    std::vector<RMat> Phi(n, RMat::Zero(n, n));
    double big = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int k = 0; k < n; ++k) Phi[a] += T(a, k) * G[k];
      big = std::max(big, Phi[a].cwiseAbs().maxCoeff());
    }
    if (big == 0.0) return {RMat::Zero(1, 1)};
    const double cut = effective_tol(tol, n, 3) * big;
    auto shell = [&](int d) {
      double s = Phi[d].topLeftCorner(d + 1, d + 1).cwiseAbs().maxCoeff();
      for (int a = 0; a < d; ++a)
        s = std::max({s, Phi[a].row(d).head(d + 1).cwiseAbs().maxCoeff(), Phi[a].col(d).head(d + 1).cwiseAbs().maxCoeff()});
      return s;
    };
    double tail = 0.0;
    for (int k = (3 * n) / 4; k < n; ++k) tail = std::max(tail, shell(k));
    if (tail <= cut || n >= max_degree) {
      const int d = trimmed_degree(n, cut, shell);
      std::vector<RMat> out(d);
      for (int a = 0; a < d; ++a) out[a] = Phi[a].topLeftCorner(d, d);
      return out;
    }
  }
}

ModularCalcContext::ModularCalcContext(const TorusElement &h, int N, ModCalcOptions opts)
    : h_(h), trunc_{N}, opts_(opts) {
  if (!h.is_self_adjoint()) throw NotSelfAdjoint("modular calculus needs a self-adjoint dilaton");
  if (N < 1) throw std::invalid_argument("truncation N must be positive");
  bound_ = std::max(h.l1_norm() * (1.0 + 1e-12), 1e-8);
  scaled_ = represent_sparse(h, trunc_) * cplx(1.0 / bound_);
}

const HermitianEigen &ModularCalcContext::eigen() const {
  if (!eig_) eig_ = std::make_shared<HermitianEigen>(eigh(CMat(represent_sparse(h_, trunc_))));
  return *eig_;
}

CVec ModularCalcContext::apply_function(const Univariate &f, const CVec &v) const {
  const RVec c = chebyshev_coefficients_1d([&](double x) { return f(bound_ * x); }, opts_.cheb_tol, opts_.max_degree);
  const auto &K = simd::kernels();
  const Eigen::Index D = v.size();
  CVec b1 = CVec::Zero(D), b2 = CVec::Zero(D), hb(D), nb(D);
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
    hb.noalias() = scaled_ * b1;
    K.cheb_combine(D, 2.0, hb.data(), 0.0, b1.data(), b2.data(), c(k), v.data(), nb.data());
    std::swap(b2, b1);
    std::swap(b1, nb);
  }
  hb.noalias() = scaled_ * b1;
  CVec r(D);
  K.cheb_combine(D, 1.0, hb.data(), 0.0, b1.data(), b2.data(), c(0), v.data(), r.data());
  return r;
}

TorusElement ModularCalcContext::function_of_h(const Univariate &f) const {
  return from_vector(apply_function(f, CVec::Unit(trunc_.dim(), trunc_.one())), trunc_, h_.params());
}

ModCalcResult mod_calc_1(const Univariate &f, const ModularCalcContext &ctx, const TorusElement &x) {
  check_input(x, ctx);
  const GnsTruncation &tr = ctx.trunc();
  if (ctx.options().method == CalcMethod::Spectral) {
    double fmax = 0.0;
    const CVec r = spectral_1(f, ctx, x, fmax);
    return finish(r, ctx, x.l1_norm() * fmax, 0);
  }
  const Expansion1 e = expand_difference(f, ctx.spectral_bound(), ctx.options());
  const int n = static_cast<int>(e.C.rows());
  const CMat Vb = cheb_vectors(ctx.scaled(), CVec::Unit(tr.dim(), tr.one()), n);
  const CMat S = Vb * e.C.transpose().cast<cplx>();
  const CMat U = represent_sparse(x, tr) * S;
  return finish(clenshaw(ctx.scaled(), U), ctx, x.l1_norm() * e.fmax, n);
}

ModCalcResult mod_calc_2(const Bivariate &H, const ModularCalcContext &ctx,
                         const std::vector<std::pair<TorusElement, TorusElement>> &pairs) {
  double scale = 0.0;
  for (const auto &[x, y] : pairs) {
    check_input(x, ctx);
    check_input(y, ctx);
    scale += x.l1_norm() * y.l1_norm();
  }
  const GnsTruncation &tr = ctx.trunc();
  if (ctx.options().method == CalcMethod::Spectral) {
    double fmax = 0.0;
    const CVec r = spectral_2(H, ctx, pairs, fmax);
    return finish(r, ctx, scale * fmax, 0);
  }
  const Expansion2 e = expand_bidifference(H, ctx.spectral_bound(), ctx.options());
  const int n = static_cast<int>(e.Phi.size());
  const CMat Vc = cheb_vectors(ctx.scaled(), CVec::Unit(tr.dim(), tr.one()), n);
  CVec r = CVec::Zero(tr.dim());
  CMat Z(tr.dim(), n);
  for (const auto &[x, y] : pairs) {
    if (x.empty() || y.empty()) continue;
    const SpMat X = represent_sparse(x, tr), Y = represent_sparse(y, tr);
    for (int a = 0; a < n; ++a) {
      const CMat W = Y * (Vc * e.Phi[a].transpose().cast<cplx>());
      Z.col(a) = clenshaw(ctx.scaled(), W);
    }
    r += clenshaw(ctx.scaled(), X * Z);
  }
  return finish(r, ctx, scale * e.fmax, n);
}

ModCalcResult mod_calc_1(const CurvatureKernel &f, const ModularCalcContext &ctx, const TorusElement &x) {
  return mod_calc_1(Univariate([&f](double s) { return f(s); }), ctx, x);
}

ModCalcResult mod_calc_2(const CurvatureKernel &H, const ModularCalcContext &ctx,
                         const std::vector<std::pair<TorusElement, TorusElement>> &pairs) {
  return mod_calc_2(Bivariate([&H](double s, double t) { return H(s, t); }), ctx, pairs);
}

}  // namespace nct
