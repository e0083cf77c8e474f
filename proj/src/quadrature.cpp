#include "nct/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "nct/nctorus.hpp"

namespace nct {
namespace {

QuadRule build_gl(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V, class F, class Acc>
void gk15(const F &f, double a, double b, V &kron, V &gauss, Acc axpy) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const V fc = f(c);
  axpy(kron, kWgk[7] * h, fc);
  axpy(gauss, kWg[3] * h, fc);
  for (int j = 0; j < 7; ++j) {
    const V f1 = f(c - h * kXgk[j]);
    const V f2 = f(c + h * kXgk[j]);
    axpy(kron, kWgk[j] * h, f1);
    axpy(kron, kWgk[j] * h, f2);
    if (j % 2 == 1) {
      axpy(gauss, kWg[j / 2] * h, f1);
      axpy(gauss, kWg[j / 2] * h, f2);
    }
  }
}

}  // namespace

const QuadRule &gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gl(n)).first;
  return it->second;
}

AdaptiveVecResult integrate_gk15_vec(const std::function<std::vector<double>(double)> &f, std::size_t dim, double a,
                                     double b, double abs_tol, double rel_tol, int max_intervals) {
  struct Seg {
    double a, b, err;
    std::vector<double> val;
    bool operator<(const Seg &o) const { return err < o.err; }
  };
  auto axpy = [](std::vector<double> &y, double s, const std::vector<double> &x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
  };
  AdaptiveVecResult res;
  auto eval = [&](double lo, double hi) {
    std::vector<double> k(dim, 0.0), g(dim, 0.0);
    gk15<std::vector<double>>(f, lo, hi, k, g, axpy);
    res.evaluations += 15;
    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) e = std::max(e, std::abs(k[i] - g[i]));
    return Seg{lo, hi, e, k};
  };
  std::priority_queue<Seg> q;
  q.push(eval(a, b));
  auto totals = [&](std::vector<double> &v, double &e) {
    auto copy = q;
    v.assign(dim, 0.0);
    e = 0.0;
    while (!copy.empty()) {
      axpy(v, 1.0, copy.top().val);
      e += copy.top().err;
      copy.pop();
    }
  };
  std::vector<double> total;
  double err = 0.0;
  for (int it = 0;; ++it) {
    totals(total, err);
    double scale = 0.0;
    for (double v : total) scale = std::max(scale, std::abs(v));
    if (err <= std::max(abs_tol, rel_tol * scale) || static_cast<int>(q.size()) >= max_intervals) break;
    Seg s = q.top();
    q.pop();
    const double m = 0.5 * (s.a + s.b);
    q.push(eval(s.a, m));
    q.push(eval(m, s.b));
  }
  res.value = total;
  res.error = err;
  return res;
}

AdaptiveResult integrate_gk15(const std::function<double(double)> &f, double a, double b, double abs_tol,
                              double rel_tol, int max_intervals) {
  auto r = integrate_gk15_vec([&](double x) { return std::vector<double>{f(x)}; }, 1, a, b, abs_tol, rel_tol,
                              max_intervals);
  return {r.value[0], r.error, r.evaluations};
}

}  // namespace nct
