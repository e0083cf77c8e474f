#include "nct/heisenberg.hpp"

#include <cmath>
#include <numeric>

#include <fftw3.h>

#include "nct/curvature.hpp"
#include "nct/modcalc.hpp"

namespace nct {

HeisenbergParams HeisenbergParams::make(int a, int b, int c, int d, double theta) {
  HeisenbergParams p{a, b, c, d, theta};
  p.validate();
  return p;
}

void HeisenbergParams::validate() const {
  if (a * d - b * c != 1) throw std::invalid_argument("g must have determinant 1");
  if (c == 0) throw TrivialBimodule("c = 0 gives the trivial bimodule");
  if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
  if (rank() == 0.0) throw std::invalid_argument("rank c theta + d vanishes");
}

HeisenbergParams HeisenbergParams::inverse() const { return make(d, -b, -c, a, theta_prime()); }

int HeisenbergParams::d_inverse() const {
  const int n = components();
  for (int x = 0; x < n; ++x)
    if (((long(d) * x - 1) % n + n) % n == 0) return x;
  throw std::invalid_argument("d is not invertible mod c");
}

SectionGrid SectionGrid::snapped(double L, int G, int comps, double period) {
  const double P = std::abs(period);
  const double M = std::max(1.0, std::round(2.0 * L / P));
  return {0.5 * M * P, G, comps};
}

HeisenbergSection HeisenbergSection::sample(const SectionGrid &g, const std::function<cplx(double, int)> &f) {
  HeisenbergSection s{g, CMat(g.G, g.comps)};
  for (int a = 0; a < g.comps; ++a)
    for (int i = 0; i < g.G; ++i) s.values(i, a) = f(g.t(i), a);
  return s;
}

double HeisenbergSection::tail_mass() const {
  double tot = 0.0, out = 0.0;
  for (int a = 0; a < grid.comps; ++a)
    for (int i = 0; i < grid.G; ++i) {
      const double v = std::norm(values(i, a));
      tot += v;
      if (std::abs(grid.t(i)) > 0.5 * grid.L) out += v;
    }
  return tot > 0.0 ? out / tot : 0.0;
}

namespace {

CVec fft1(const CVec &x, int sign) {
  const int n = int(x.size());
  CVec in = x, out(n);
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex *>(in.data()),
                                    reinterpret_cast<fftw_complex *>(out.data()), sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (sign == FFTW_BACKWARD) out /= double(n);
  return out;
}

int freq(int i, int n) { return i < n / 2 ? i : i - n; }

int mod(long a, int n) { return int(((a % n) + n) % n); }

CVec derivative(const CVec &f, double step) {
  const int n = int(f.size());
  CVec F = fft1(f, FFTW_FORWARD);
  const double dk = 2.0 * kPi / (n * step);
  for (int i = 0; i < n; ++i) F(i) *= (freq(i, n) == -n / 2) ? cplx(0.0) : cplx(0.0, dk * freq(i, n));
  return fft1(F, FFTW_BACKWARD);
}

}  // namespace

CVec fractional_shift(const CVec &f, double s, double step, double tol) {
  const int n = int(f.size());
  CVec F = fft1(f, FFTW_FORWARD);
  const double dk = 2.0 * kPi / (n * step);
  double peak = 0.0, tail = 0.0;
  for (int i = 0; i < n; ++i) {
    const int m = freq(i, n);
    const double v = std::abs(F(i));
    peak = std::max(peak, v);
    if (std::abs(m) > 3 * n / 8) tail = std::max(tail, v);
    F(i) *= m == -n / 2 ? cplx(std::cos(dk * m * s)) : std::exp(cplx(0.0, -dk * m * s));
  }
  if (peak > 0.0 && tail > tol * peak) throw SectionAliasing("spectral tail above tolerance in a shift");
  return fft1(F, FFTW_BACKWARD);
}

HeisenbergSection act_right(const HeisenbergSection &f, const HeisenbergParams &p, int j, int power) {
  const SectionGrid &g = f.grid;
  const int C = p.components();
  HeisenbergSection out{g, CMat(g.G, C)};
  if (j == 1) {
    for (int a = 0; a < C; ++a)
      for (int i = 0; i < g.G; ++i)
        out.values(i, a) = std::exp(cplx(0.0, 2.0 * kPi * power * (g.t(i) - double(a) * p.d / p.c))) * f.values(i, a);
    return out;
  }
  if (j != 2) throw std::invalid_argument("generator index must be 1 or 2");
  const double s = power * p.rank() / p.c;
  for (int a = 0; a < C; ++a) out.values.col(a) = fractional_shift(f.values.col(mod(a - power, C)), s, g.step());
  return out;
}

HeisenbergSection act_left(const HeisenbergSection &f, const HeisenbergParams &p, int j, int power) {
  const SectionGrid &g = f.grid;
  const int C = p.components();
  HeisenbergSection out{g, CMat(g.G, C)};
  if (j == 1) {
    for (int a = 0; a < C; ++a)
      for (int i = 0; i < g.G; ++i)
        out.values(i, a) =
            std::exp(cplx(0.0, 2.0 * kPi * power * (g.t(i) / p.rank() - double(a) / p.c))) * f.values(i, a);
    return out;
  }
  if (j != 2) throw std::invalid_argument("generator index must be 1 or 2");
  const double s = double(power) / p.c;
  for (int a = 0; a < C; ++a)
    out.values.col(a) = fractional_shift(f.values.col(mod(a - long(power) * p.a, C)), s, g.step());
  return out;
}

cplx l2_inner(const HeisenbergSection &f1, const HeisenbergSection &f2) {
  return f1.grid.step() * (f1.values.array().conjugate() * f2.values.array()).sum();
}

namespace {

double theta_mod1(double x) {
  const double r = x - std::floor(x);
  if (r <= 0.0 || r >= 1.0) throw std::invalid_argument("rational rotation number");
  return r;
}

void check_ring(const TorusElement::Map &c, int Mm, int Mn, double tol) {
  double peak = 0.0, ring = 0.0;
  for (const auto &[k, v] : c) {
    peak = std::max(peak, std::abs(v));
    if (std::abs(k.m) == Mm || std::abs(k.n) == Mn) ring = std::max(ring, std::abs(v));
  }
  if (peak > 0.0 && ring > tol * peak) throw CutoffTooSmall("valued inner product cutoff too small");
}

// Largest |m| whose phase e^{2 pi i m t / period} stays inside the grid band.
int resolvable(const SectionGrid &g, double period, int M) {
  return std::min(M, int(std::floor(std::abs(period) * g.G / (4.0 * g.L))));
}

}  // namespace

AlgebraParams left_algebra(const HeisenbergParams &p, cplx tau) { return {theta_mod1(p.theta_prime()), tau}; }

TorusElement valued_inner_right(const HeisenbergSection &f1, const HeisenbergSection &f2, const HeisenbergParams &p,
                                cplx tau, int M, double tail_tol) {
  TorusElement::Map c;
  const int Mm = resolvable(f1.grid, 1.0, M);
  for (int n = -M; n <= M; ++n) {
    const HeisenbergSection g = act_right(f2, p, 2, -n);
    for (int m = -Mm; m <= Mm; ++m) c[{m, n}] = l2_inner(f1, act_right(g, p, 1, -m));
  }
  check_ring(c, Mm, M, tail_tol);
  return TorusElement(AlgebraParams{theta_mod1(p.theta), tau}, c);
}

TorusElement valued_inner_left(const HeisenbergSection &f1, const HeisenbergSection &f2, const HeisenbergParams &p,
                               cplx tau, int M, double tail_tol) {
  TorusElement::Map c;
  const double r = std::abs(p.rank());
  std::vector<HeisenbergSection> shifted;
  for (int n = -M; n <= M; ++n) shifted.push_back(act_left(f2, p, 2, n));
  const int Mm = resolvable(f1.grid, p.rank(), M);
  for (int m = -Mm; m <= Mm; ++m) {
    const HeisenbergSection g = act_left(f1, p, 1, -m);
    for (int n = -M; n <= M; ++n) c[{m, n}] = l2_inner(shifted[n + M], g) / r;
  }
  check_ring(c, Mm, M, tail_tol);
  return TorusElement(left_algebra(p, tau), c);
}

HeisenbergSection apply_left(const TorusElement &x, const HeisenbergSection &f, const HeisenbergParams &p) {
  HeisenbergSection out{f.grid, CMat::Zero(f.grid.G, f.grid.comps)};
  for (const auto &[k, v] : x.coeffs())
    out.values += v * act_left(act_left(f, p, 2, k.n), p, 1, k.m).values;
  return out;
}

HeisenbergSection apply_right(const HeisenbergSection &f, const TorusElement &x, const HeisenbergParams &p) {
  HeisenbergSection out{f.grid, CMat::Zero(f.grid.G, f.grid.comps)};
  for (const auto &[k, v] : x.coeffs())
    out.values += v * std::exp(cplx(0.0, -2.0 * kPi * p.theta * k.m * k.n)) *
                  act_right(act_right(f, p, 2, k.n), p, 1, k.m).values;
  return out;
}

HeisenbergSection connection(const HeisenbergSection &f, const HeisenbergParams &p, int j) {
  HeisenbergSection out{f.grid, CMat(f.grid.G, f.grid.comps)};
  for (int a = 0; a < f.grid.comps; ++a) {
    if (j == 1) {
      out.values.col(a) = derivative(f.values.col(a), f.grid.step());
    } else if (j == 2) {
      for (int i = 0; i < f.grid.G; ++i)
        out.values(i, a) = cplx(0.0, 2.0 * kPi * p.slope() * f.grid.t(i)) * f.values(i, a);
    } else {
      throw std::invalid_argument("connection index must be 1 or 2");
    }
  }
  return out;
}

namespace {

CMat shift_matrix(int G, double s, double step) {
  CMat S(G, G);
  for (int i = 0; i < G; ++i) S.col(i) = fractional_shift(CVec::Unit(G, i), s, step, INFINITY);
  return S;
}

CMat matrix_power_unitary(const CMat &V, int p) {
  CMat R = CMat::Identity(V.rows(), V.cols());
  const CMat B = p >= 0 ? V : CMat(V.adjoint());
  for (int i = 0; i < std::abs(p); ++i) R = B * R;
  return R;
}

}  // namespace

ModuleOperators module_operators(const HeisenbergParams &p, cplx tau, const SectionGrid &g) {
  const int G = g.G, C = p.components(), D = G * C;
  ModuleOperators o{g, CMat::Zero(D, D), CMat::Zero(D, D), CMat::Zero(D, D), CMat::Zero(D, D), CMat()};
  CMat Dm(G, G);
  for (int i = 0; i < G; ++i) Dm.col(i) = derivative(CVec::Unit(G, i), g.step());
  const CMat S = shift_matrix(G, 1.0 / p.c, g.step());
  for (int a = 0; a < C; ++a) {
    o.D.block(a * G, a * G, G, G) = Dm;
    for (int i = 0; i < G; ++i) {
      o.T(a * G + i, a * G + i) = g.t(i);
      o.V1(a * G + i, a * G + i) = std::exp(cplx(0.0, 2.0 * kPi * (g.t(i) / p.rank() - double(a) / p.c)));
    }
    const int src = mod(a - long(p.a), C);
    o.V2.block(a * G, src * G, G, G) = S;
  }
  o.dE = o.D + std::conj(tau) * cplx(0.0, 2.0 * kPi * p.slope()) * o.T;
  return o;
}

CMat left_action_matrix(const TorusElement &x, const ModuleOperators &ops) {
  const long D = ops.V1.rows();
  CMat out = CMat::Zero(D, D);
  for (const auto &[k, v] : x.coeffs())
    out += v * (matrix_power_unitary(ops.V1, k.m) * matrix_power_unitary(ops.V2, k.n));
  return out;
}

CMat oscillator_laplacian(const HeisenbergParams &p, cplx, const ModuleOperators &ops,
                          const std::optional<TorusElement> &h) {
  const double r2 = p.rank() * p.rank();
  CMat L = r2 * (ops.dE * ops.dE.adjoint());
  if (h && !h->empty()) {
    const CMat Vh = left_action_matrix(*h, ops);
    const HermitianEigen e = eigh(Vh);
    const CMat K = hermitian_function(e, [](double x) { return std::exp(0.5 * x); });
    L = K * L * K;
  }
  return 0.5 * (L + L.adjoint());
}

double oscillator_kappa(const HeisenbergParams &p, cplx tau) { return 4.0 * kPi * p.slope() * tau.imag(); }

int oscillator_shift(const HeisenbergParams &p, cplx tau) { return oscillator_kappa(p, tau) > 0.0 ? 1 : 0; }

RVec hermite_oracle(double mu, cplx tau, int count, int basis) {
  if (mu == 0.0) throw std::invalid_argument("oscillator needs non-zero slope");
  const int P = basis + 4;
  const double w = 2.0 * kPi * std::abs(mu) * std::abs(tau);
  CMat a = CMat::Zero(P, P);
  for (int n = 1; n < P; ++n) a(n - 1, n) = std::sqrt(double(n));
  const CMat ad = a.adjoint();
  const CMat T = (a + ad) / std::sqrt(2.0 * w);
  const CMat Dd = (a - ad) * std::sqrt(0.5 * w);
  const cplx I(0.0, 1.0);
  const CMat H = -(Dd * Dd) + (4.0 * kPi * kPi * mu * mu * std::norm(tau)) * (T * T) -
                 (4.0 * kPi * mu * tau.real()) * I * (T * Dd) - 2.0 * kPi * mu * I * std::conj(tau) * CMat::Identity(P, P);
  const RVec ev = eigvalsh(CMat(H.topLeftCorner(basis, basis)));
  return ev.head(std::min<long>(count, ev.size()));
}

CVec resample(const CVec &f, const SectionGrid &g, const std::vector<double> &points) {
  const int n = int(f.size());
  const CVec F = fft1(f, FFTW_FORWARD);
  const double dk = 2.0 * kPi / (n * g.step());
  CVec out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double x = points[j] + g.L;
    cplx s = 0.0;
    if (x < 0.0 || x >= 2.0 * g.L) {
      out(long(j)) = 0.0;
      continue;
    }
    for (int i = 0; i < n; ++i) {
      const int m = freq(i, n);
      s += (m == -n / 2 ? cplx(std::cos(dk * m * x)) : std::exp(cplx(0.0, dk * m * x))) * F(i);
    }
    out(long(j)) = s / double(n);
  }
  return out;
}

HeisenbergSection j_transpose(const HeisenbergSection &f, const HeisenbergParams &p, const SectionGrid &target) {
  const int C = p.components();
  if (target.comps != C) throw std::invalid_argument("target grid must have |c| components");
  const int dinv = p.d_inverse();
  std::vector<double> pts(target.G);
  for (int i = 0; i < target.G; ++i) pts[i] = p.rank() * target.t(i);
  HeisenbergSection out{target, CMat(target.G, C)};
  for (int a = 0; a < C; ++a) out.values.col(a) = resample(f.values.col(mod(-long(dinv) * a, C)), f.grid, pts).conjugate();
  return out;
}

double edge_mass(const CVec &v, const SectionGrid &g) {
  double tot = 0.0, out = 0.0;
  for (int a = 0; a < g.comps; ++a)
    for (int i = 0; i < g.G; ++i) {
      const double x = std::norm(v(long(a) * g.G + i));
      tot += x;
      if (std::abs(g.t(i)) > 0.75 * g.L) out += x;
    }
  return tot > 0.0 ? out / tot : 0.0;
}

double flat_oscillator_heat_trace(const HeisenbergParams &p, cplx tau, double t) {
  const double w = p.rank() * p.rank() * std::abs(oscillator_kappa(p, tau));
  return p.components() * std::exp(-t * w * oscillator_shift(p, tau)) / (1.0 - std::exp(-t * w));
}

MoritaReport morita_curvature_check(const TorusElement &h, const HeisenbergParams &g, cplx tau, double L, int G,
                                    const std::vector<TorusElement> &probes_in, int curvature_N) {
  const AlgebraParams &ap = h.params();
  if (std::abs(ap.theta - theta_mod1(g.theta)) > 1e-14 || ap.tau != tau)
    throw ParamsMismatch("dilaton parameters differ from the bimodule");
  MoritaReport rep;
  rep.module = g.inverse();
  const HeisenbergParams &E = rep.module;
  rep.grid = SectionGrid::snapped(L, G, E.components(), E.rank());
  const ModuleOperators ops = module_operators(E, tau, rep.grid);

  const int C = E.components(), s = oscillator_shift(E, tau);
  const double w = E.rank() * E.rank() * std::abs(oscillator_kappa(E, tau));
  const HermitianEigen flat = eigh(oscillator_laplacian(E, tau, ops));
  int good = 0;
  for (long i = 0; i < flat.values.size(); ++i) {
    if (edge_mass(flat.vectors.col(i), rep.grid) > 1e-6) continue;
    if (std::abs(flat.values(i) - w * (good / C + s)) > 1e-6 * w * (good / C + s + 1)) break;
    ++good;
  }
  rep.good_levels = good;
  if (good < 4 * C) throw std::runtime_error("grid resolves too few oscillator levels");
  const double lam_good = w * ((good - 1) / C + s);

  const HermitianEigen full = eigh(oscillator_laplacian(E, tau, ops, h));
  std::vector<long> keep;
  for (long i = 0; i < full.values.size(); ++i)
    if (edge_mass(full.vectors.col(i), rep.grid) < 0.5) keep.push_back(i);
  rep.edge_modes = int(full.values.size() - long(keep.size()));
  HermitianEigen spec{RVec(keep.size()), CMat(full.vectors.rows(), long(keep.size()))};
  for (std::size_t j = 0; j < keep.size(); ++j) {
    spec.values(long(j)) = full.values(keep[j]);
    spec.vectors.col(long(j)) = full.vectors.col(keep[j]);
  }

  std::vector<TorusElement> probes = probes_in;
  if (probes.empty())
    probes = {TorusElement::unit(ap), TorusElement::monomial(ap, 1, 0) + TorusElement::monomial(ap, -1, 0)};

  const ModularCalcContext ctx(h, std::max(12, 6 * h.support_radius() + 8));
  const TorusElement emh = ctx.function_of_h([](double x) { return std::exp(-x); });
  const TorusElement K = modular_curvature(h, curvature_N).density;

  rep.t_min = 8.0 / lam_good;
  rep.t_max = 20.0 / lam_good;
  const int npts = 40;
  std::vector<double> ts(npts);
  for (int i = 0; i < npts; ++i) ts[i] = rep.t_min * std::pow(rep.t_max / rep.t_min, double(i) / (npts - 1));

  const double r = std::abs(E.rank());
  for (std::size_t q = 0; q < probes.size(); ++q) {
    const TorusElement &a = probes[q];
    const CMat A = left_action_matrix(a, ops);
    const RVec wts = (spec.vectors.adjoint() * A * spec.vectors).diagonal().real();
    MoritaProbe pr;
    pr.name = q < 2 && probes_in.empty() ? (q == 0 ? "1" : "U1+U1*") : "probe" + std::to_string(q);
    pr.a0 = trace0(multiply(a, emh)).real() / (4.0 * kPi * r * tau.imag());
    Eigen::MatrixXd X(npts, 3);
    Eigen::VectorXd y(npts);
    for (int i = 0; i < npts; ++i) {
      const double t = ts[i];
      y(i) = heat_trace(spec.values, wts, t) - pr.a0 / t;
      X(i, 0) = 1.0;
      X(i, 1) = t / rep.t_max;
      X(i, 2) = (t / rep.t_max) * (t / rep.t_max);
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
    pr.a2 = c(0);
    pr.fit_residual = (X * c - y).norm() / std::max(y.norm(), 1e-300);
    pr.predicted = C * (0.5 - s) * trace0(a).real() + trace0(multiply(a, K)).real() / r;
    pr.deviation = std::abs(pr.a2 - pr.predicted) / std::max(std::abs(pr.predicted), 1e-3);
    rep.max_deviation = std::max(rep.max_deviation, pr.deviation);
    rep.probes.push_back(pr);
  }
  return rep;
}

nlohmann::json to_json(const MoritaReport &r) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto &p : r.probes)
    probes.push_back({{"name", p.name},
                      {"a0_fixed", p.a0},
                      {"a2_fit", p.a2},
                      {"a2_predicted", p.predicted},
                      {"deviation", p.deviation},
                      {"fit_residual", p.fit_residual}});
  return {{"module", {{"g", {r.module.a, r.module.b, r.module.c, r.module.d}},
                      {"theta", r.module.theta},
                      {"rank", r.module.rank()},
                      {"degree", r.module.degree()},
                      {"slope", r.module.slope()}}},
          {"grid", {{"L", r.grid.L}, {"G", r.grid.G}, {"components", r.grid.comps}}},
          {"good_levels", r.good_levels},
          {"edge_modes", r.edge_modes},
          {"t_min", r.t_min},
          {"t_max", r.t_max},
          {"probes", probes},
          {"max_deviation", r.max_deviation}};
}

}  // namespace nct
