#include "nct/gns.hpp"

#include <algorithm>
#include <cmath>

#include "nct/quadrature.hpp"

namespace nct {

std::vector<int> GnsTruncation::block(int r) const {
  std::vector<int> out;
  if (r < 0) return out;
  r = std::min(r, N);
  for (int m = -r; m <= r; ++m)
    for (int n = -r; n <= r; ++n) out.push_back(index(m, n));
  return out;
}

CVec to_vector(const TorusElement &a, const GnsTruncation &tr) {
  CVec v = CVec::Zero(tr.dim());
  for (const auto &[k, c] : a.coeffs())
    if (tr.contains(k.m, k.n)) v(tr.index(k.m, k.n)) = c;
  return v;
}

TorusElement from_vector(const CVec &v, const GnsTruncation &tr, const AlgebraParams &p, double drop) {
  TorusElement::Map m;
  for (int k = 0; k < tr.dim(); ++k)
    if (std::abs(v(k)) > drop) m.emplace(tr.at(k), v(k));
  return TorusElement(p, std::move(m));
}

SpMat represent_sparse(const TorusElement &a, const GnsTruncation &tr, long *leakage) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(tr.dim()) * a.size());
  long leak = 0;
  const double theta = a.params().theta;
  for (int col = 0; col < tr.dim(); ++col) {
    const FourierIndex pq = tr.at(col);
    for (const auto &[mn, c] : a.coeffs()) {
      const int m = mn.m + pq.m, n = mn.n + pq.n;
      if (!tr.contains(m, n)) {
        ++leak;
        continue;
      }
      trip.emplace_back(tr.index(m, n), col, c * twist_phase(theta, static_cast<std::int64_t>(mn.n) * pq.m));
    }
  }
  SpMat s(tr.dim(), tr.dim());
  s.setFromTriplets(trip.begin(), trip.end());
  if (leakage) *leakage = leak;
  return s;
}

GnsMatrix represent(const TorusElement &a, const GnsTruncation &tr) {
  GnsMatrix g;
  g.trunc = tr;
  g.buffer = a.support_radius();
  g.data = CMat(represent_sparse(a, tr, &g.leakage));
  return g;
}

Reconstruction reconstruct(const GnsMatrix &m, const AlgebraParams &p) {
  const GnsTruncation &tr = m.trunc;
  Reconstruction r;
  r.element = from_vector(m.data.col(tr.one()), tr, p);
  const SpMat back = represent_sparse(r.element, tr);
  const double scale = std::max(m.data.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (int col : tr.block(tr.N / 2)) {
    const CVec diff = m.data.col(col) - CVec(back.col(col));
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  r.residual = worst / scale;
  return r;
}

DilatonSpectrum::DilatonSpectrum(const TorusElement &h, const GnsTruncation &tr)
    : trunc(tr), buffer(h.support_radius()), eig(eigh(CMat(represent_sparse(h, tr)))) {
  if (!h.is_self_adjoint()) throw NotSelfAdjoint("dilaton must be self-adjoint");
}

CMat DilatonSpectrum::exp(double s) const {
  return hermitian_function(eig, [s](double x) { return std::exp(s * x); });
}

RVec flat_symbol(const GnsTruncation &tr, cplx tau) {
  RVec d(tr.dim());
  for (int k = 0; k < tr.dim(); ++k) {
    const FourierIndex mn = tr.at(k);
    d(k) = std::norm(static_cast<double>(mn.m) + tau * static_cast<double>(mn.n));
  }
  return d;
}

GnsMatrix laplacian(LaplacianKind kind, const TorusElement &h, double s, const GnsTruncation &tr) {
  if (!h.is_self_adjoint()) throw NotSelfAdjoint("dilaton must be self-adjoint");
  const AlgebraParams &p = h.params();
  GnsMatrix g;
  g.trunc = tr;
  g.buffer = h.support_radius();
  represent_sparse(h, tr, &g.leakage);
  const RVec lam = flat_symbol(tr, p.tau);
  if (kind == LaplacianKind::Flat) {
    g.data = lam.cast<cplx>().asDiagonal();
    return g;
  }
  const DilatonSpectrum ds(h, tr);
  if (kind == LaplacianKind::Forms01) {
    CVec a(tr.dim());
    for (int k = 0; k < tr.dim(); ++k) {
      const FourierIndex mn = tr.at(k);
      a(k) = static_cast<double>(mn.m) + std::conj(p.tau) * static_cast<double>(mn.n);
    }
    g.data = a.conjugate().asDiagonal() * ds.exp(1.0) * a.asDiagonal();
  } else {
    const double w = kind == LaplacianKind::Conformal ? 1.0 : s;
    const CMat k = ds.exp(0.5 * w);
    g.data = k * lam.cast<cplx>().asDiagonal() * k;
  }
  g.data = 0.5 * (g.data + g.data.adjoint()).eval();
  return g;
}

HeatSpectrum::HeatSpectrum(const GnsMatrix &l) : trunc(l.trunc), buffer(l.buffer) {
  HermitianEigen e = eigh(l.data);
  values = std::move(e.values);
  vectors = std::move(e.vectors);
}

RVec HeatSpectrum::probe_weights(const TorusElement &a) const {
  const int r = trunc.N - a.support_radius() - buffer;
  if (r < 0) throw std::invalid_argument("probe and dilaton supports exceed the truncation");
  const CMat av = represent_sparse(a, trunc) * vectors;
  RVec w = RVec::Zero(values.size());
  for (int k : trunc.block(r)) w += (vectors.row(k).conjugate().cwiseProduct(av.row(k))).real().transpose();
  return w;
}

double heat_trace(const RVec &values, const RVec &weights, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_trace needs t > 0");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) acc += weights(j) * std::exp(-t * values(j));
  return acc;
}

double heat_trace(const HeatSpectrum &spec, const TorusElement &a, double t) {
  return heat_trace(spec.values, spec.probe_weights(a), t);
}

HeatFit fit_heat_samples(const std::vector<double> &ts, const std::vector<double> &ys, double max_condition) {
  const int P = static_cast<int>(ts.size());
  RMat X(P, 4);
  RVec y(P);
  for (int i = 0; i < P; ++i) {
    const double t = ts[i];
    X(i, 0) = 1.0 / t;
    X(i, 1) = 1.0;
    X(i, 2) = t;
    X(i, 3) = t * t;
    y(i) = ys[i];
  }
  const RVec scale = X.colwise().norm();
  const RMat Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<RMat> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec sv = svd.singularValues();
  HeatFit f;
  f.condition = sv(0) / sv(sv.size() - 1);
  if (!(f.condition <= max_condition)) throw IllConditionedFit("heat fit condition number " + std::to_string(f.condition));
  const RVec c = svd.solve(y).cwiseQuotient(scale);
  f.a0 = c(0);
  f.a2 = c(1);
  f.a4 = c(2);
  f.c2 = c(3);
  f.residual = (X * c - y).norm() / std::max(y.norm(), 1e-300);
  f.ts = ts;
  f.traces = ys;
  f.t_min = ts.front();
  f.t_max = ts.back();
  return f;
}

HeatFit fit_heat_coefficients(const HeatSpectrum &spec, const TorusElement &a, const HeatFitConfig &cfg) {
  const double lmax = spec.lambda_max();
  const double rule = 40.0 / lmax;
  const double tmin = cfg.t_min.value_or(cfg.tmin_factor / lmax);
  const double tmax = cfg.t_max.value_or(cfg.span * tmin);
  if (tmin < rule * (1.0 - 1e-12))
    throw WindowViolated("t_min " + std::to_string(tmin) + " below 40/lambda_max = " + std::to_string(rule));
  if (!(tmax > tmin) || cfg.points < 5) throw std::invalid_argument("heat fit grid needs t_max > t_min and >= 5 points");
  const RVec w = spec.probe_weights(a);
  const double q = std::pow(tmax / tmin, 1.0 / (cfg.points - 1));
  auto sample = [&](double t0) {
    std::vector<double> ts(cfg.points), ys(cfg.points);
    for (int i = 0; i < cfg.points; ++i) {
      ts[i] = t0 * std::pow(q, i);
      ys[i] = heat_trace(spec.values, w, ts[i]);
    }
    return std::pair{ts, ys};
  };
  auto [ts, ys] = sample(tmin);
  HeatFit f = fit_heat_samples(ts, ys, cfg.max_condition);
  auto [ts2, ys2] = sample(tmin * q);
  f.stability = std::abs(fit_heat_samples(ts2, ys2, cfg.max_condition).a2 - f.a2);
  return f;
}

ZetaZero zeta_at_zero(const TorusElement &h, const TorusElement &a, const HeatFit &fit, const GnsTruncation &tr) {
  const DilatonSpectrum ds(h, tr);
  const CVec w = ds.exp(-1.0).col(tr.one());
  const cplx num = (represent_sparse(a, tr) * w)(tr.one());
  ZetaZero z;
  z.projection = num.real() / w(tr.one()).real();
  z.value = fit.a2 - z.projection;
  return z;
}

double kernel_projection_eigen(const HeatSpectrum &spec, const TorusElement &a) {
  const CVec psi = spec.vectors.col(0);
  return psi.dot(represent_sparse(a, spec.trunc) * psi).real() / psi.squaredNorm();
}

KmsReport kms_check(const TorusElement &h, const TorusElement &a, const TorusElement &b, const GnsTruncation &tr,
                    const std::vector<double> &ts) {
  const DilatonSpectrum ds(h, tr);
  const CMat E = ds.exp(-1.0);
  const int one = tr.one();
  const SpMat A = represent_sparse(a, tr), B = represent_sparse(b, tr);
  const CVec w = E.col(one);
  const cplx lhs = (represent_sparse(multiply(a, b), tr) * w)(one);
  const CVec ae = A * CVec::Unit(tr.dim(), one);
  const cplx rhs = (B * (E * ae))(one);
  KmsReport r;
  r.kms_residual = std::abs(lhs - rhs);
  const cplx phi_a = (A * w)(one);
  for (double t : ts) {
    const CVec ph = ds.eig.values.unaryExpr([t](double x) { return std::exp(cplx(0.0, t * x)); });
    const CMat U = ds.eig.vectors * ph.asDiagonal() * ds.eig.vectors.adjoint();
    const CVec v = U * (A * (U.adjoint() * w));
    r.sigma_residuals.push_back(std::abs(v(one) - phi_a));
  }
  return r;
}

GnsMatrix op_matrix(const LatticeSymbol &f, const AlgebraParams &p, const GnsTruncation &tr) {
  GnsMatrix g;
  g.trunc = tr;
  g.data = CMat::Zero(tr.dim(), tr.dim());
  for (int col = 0; col < tr.dim(); ++col) {
    const FourierIndex mn = tr.at(col);
    const TorusElement v = multiply(f(-mn.m, -mn.n), TorusElement::monomial(p, mn.m, mn.n));
    g.data.col(col) = to_vector(v, tr);
  }
  return g;
}

OpTrace op_trace(const LatticeSymbol &f, int M, double quad_tol) {
  OpTrace r;
  for (int m = -M; m <= M; ++m)
    for (int n = -M; n <= M; ++n) {
      const cplx v = trace0(f(m, n));
      r.sum += v;
      if (std::max(std::abs(m), std::abs(n)) == M) r.tail = std::max(r.tail, std::abs(v));
    }
  // xi = u / (1 - u^2) maps (-1,1) onto the line.
  auto map = [](double u) { return u / (1.0 - u * u); };
  auto jac = [](double u) {
    const double d = 1.0 - u * u;
    return (1.0 + u * u) / (d * d);
  };
  double err = 0.0;
  auto outer = integrate_gk15_vec(
      [&](double u) {
        auto inner = integrate_gk15_vec(
            [&](double v) {
              const cplx z = trace0(f(map(u), map(v))) * jac(v);
              return std::vector<double>{z.real(), z.imag()};
            },
            2, -1.0, 1.0, quad_tol, quad_tol, 200);
        err = std::max(err, inner.error);
        const double ju = jac(u);
        return std::vector<double>{inner.value[0] * ju, inner.value[1] * ju};
      },
      2, -1.0, 1.0, quad_tol, quad_tol, 200);
  r.integral = {outer.value[0], outer.value[1]};
  r.integral_error = outer.error + 2.0 * err;
  r.difference = r.sum - r.integral;
  return r;
}

}  // namespace nct
