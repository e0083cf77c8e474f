#include "nct/nctorus.hpp"

#include <cmath>
#include <sstream>

namespace nct {

void AlgebraParams::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
  if (!(tau.imag() > 0.0)) throw std::invalid_argument("tau must have positive imaginary part");
}

cplx twist_phase(double theta, std::int64_t k) {
  if (k == 0) return 1.0;
  const double kd = static_cast<double>(k);
  const double x = theta * kd;
  const double err = std::fma(theta, kd, -x);
  double frac = (x - std::floor(x)) + err;
  frac -= std::floor(frac);
  return std::polar(1.0, 2.0 * kPi * frac);
}

TorusElement::TorusElement(const AlgebraParams &p, Map coeffs) : params_(p), coeffs_(std::move(coeffs)) {
  prune();
}

TorusElement TorusElement::unit(const AlgebraParams &p, cplx c) { return monomial(p, 0, 0, c); }

TorusElement TorusElement::monomial(const AlgebraParams &p, int m, int n, cplx c) {
  TorusElement e(p);
  if (std::abs(c) > kPruneTol) e.coeffs_[{m, n}] = c;
  return e;
}

cplx TorusElement::coeff(int m, int n) const {
  auto it = coeffs_.find({m, n});
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

int TorusElement::support_radius() const {
  int r = 0;
  for (const auto &[k, v] : coeffs_) r = std::max({r, std::abs(k.m), std::abs(k.n)});
  return r;
}

double TorusElement::l1_norm() const {
  double s = 0.0;
  for (const auto &kv : coeffs_) s += std::abs(kv.second);
  return s;
}

double TorusElement::sup_norm() const {
  double s = 0.0;
  for (const auto &kv : coeffs_) s = std::max(s, std::abs(kv.second));
  return s;
}

bool TorusElement::is_self_adjoint(double tol) const {
  return distance_l1(*this, star(*this)) <= tol * std::max(1.0, l1_norm());
}

void TorusElement::prune() {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (std::abs(it->second) <= kPruneTol)
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

void TorusElement::check_same(const TorusElement &o) const {
  if (!(params_ == o.params_)) throw ParamsMismatch("torus elements carry different (theta, tau)");
}

TorusElement &TorusElement::operator+=(const TorusElement &o) {
  check_same(o);
  for (const auto &[k, v] : o.coeffs_) coeffs_[k] += v;
  prune();
  return *this;
}

TorusElement &TorusElement::operator-=(const TorusElement &o) {
  check_same(o);
  for (const auto &[k, v] : o.coeffs_) coeffs_[k] -= v;
  prune();
  return *this;
}

TorusElement &TorusElement::operator*=(cplx s) {
  for (auto &kv : coeffs_) kv.second *= s;
  prune();
  return *this;
}

TorusElement operator*(const TorusElement &a, const TorusElement &b) { return multiply(a, b); }

TorusElement multiply(const TorusElement &a, const TorusElement &b) {
  if (!(a.params() == b.params())) throw ParamsMismatch("multiply: parameter mismatch");
  const double th = a.params().theta;
  TorusElement::Map out;
  for (const auto &[ka, va] : a.coeffs()) {
    for (const auto &[kb, vb] : b.coeffs()) {
      const cplx ph = twist_phase(th, static_cast<std::int64_t>(ka.n) * kb.m);
      out[{ka.m + kb.m, ka.n + kb.n}] += va * vb * ph;
    }
  }
  return TorusElement(a.params(), std::move(out));
}

TorusElement star(const TorusElement &a) {
  TorusElement::Map out;
  const double th = a.params().theta;
  for (const auto &[k, v] : a.coeffs())
    out[{-k.m, -k.n}] += std::conj(v) * twist_phase(th, static_cast<std::int64_t>(k.m) * k.n);
  return TorusElement(a.params(), std::move(out));
}

cplx trace0(const TorusElement &a) { return a.coeff(0, 0); }

TorusElement delta_gamma(const TorusElement &a, int g1, int g2) {
  TorusElement::Map out;
  for (const auto &[k, v] : a.coeffs()) {
    const double w = std::pow(static_cast<double>(k.m), g1) * std::pow(static_cast<double>(k.n), g2);
    if (w != 0.0) out[k] = v * w;
  }
  return TorusElement(a.params(), std::move(out));
}

TorusElement derive(const TorusElement &a, int j) {
  if (j != 1 && j != 2) throw std::invalid_argument("derive: j must be 1 or 2");
  return j == 1 ? delta_gamma(a, 1, 0) : delta_gamma(a, 0, 1);
}

namespace {
TorusElement multiplier(const TorusElement &a, cplx t) {
  TorusElement::Map out;
  for (const auto &[k, v] : a.coeffs()) out[k] = v * (static_cast<double>(k.m) + t * static_cast<double>(k.n));
  return TorusElement(a.params(), std::move(out));
}

void require_sa(const TorusElement &h, const char *who) {
  if (!h.is_self_adjoint(1e-10)) throw NotSelfAdjoint(std::string(who) + ": dilaton is not self-adjoint");
}
}  // namespace

TorusElement delta_tau(const TorusElement &a) { return multiplier(a, std::conj(a.params().tau)); }
TorusElement delta_tau_star(const TorusElement &a) { return multiplier(a, a.params().tau); }

TorusElement commutator(const TorusElement &a, const TorusElement &b) { return a * b - b * a; }

TorusElement conformal_laplacian_of(const TorusElement &h) {
  require_sa(h, "conformal_laplacian_of");
  return delta_tau(delta_tau_star(h));
}

TorusElement dirichlet_square(const TorusElement &h, SquareKind kind) {
  require_sa(h, "dirichlet_square");
  const cplx tau = h.params().tau;
  if (kind == SquareKind::Re) {
    const TorusElement d1 = derive(h, 1), d2 = derive(h, 2);
    return d1 * d1 + tau.real() * (d1 * d2 + d2 * d1) + std::norm(tau) * (d2 * d2);
  }
  const TorusElement a = delta_tau(h), b = delta_tau_star(h);
  return 0.5 * (a * b - b * a);
}

double distance_l1(const TorusElement &a, const TorusElement &b) { return (a - b).l1_norm(); }

TorusElement random_element(const AlgebraParams &p, int radius, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  TorusElement::Map c;
  for (int m = -radius; m <= radius; ++m)
    for (int n = -radius; n <= radius; ++n) c[{m, n}] = cplx(nd(rng), nd(rng));
  return TorusElement(p, std::move(c));
}

TorusElement random_self_adjoint(const AlgebraParams &p, int radius, double l1, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  TorusElement::Map c;
  for (int m = -radius; m <= radius; ++m)
    for (int n = -radius; n <= radius; ++n)
      if (FourierIndex{m, n} >= FourierIndex{0, 0}) c[{m, n}] = cplx(nd(rng), nd(rng));
  TorusElement b(p, std::move(c));
  TorusElement h = b + star(b);
  const double s = h.l1_norm();
  return s > 0.0 ? h * cplx(l1 / s) : h;
}

AlgebraParams params_from_json(const nlohmann::json &j) {
  AlgebraParams p;
  p.theta = j.at("theta").get<double>();
  const auto &t = j.at("tau");
  if (!t.is_array() || t.size() != 2) throw std::invalid_argument("tau must be [re, im]");
  p.tau = cplx(t[0].get<double>(), t[1].get<double>());
  p.validate();
  return p;
}

nlohmann::json to_json(const TorusElement &a, bool selfadjoint_flag) {
  nlohmann::json j;
  j["theta"] = a.params().theta;
  j["tau"] = {a.params().tau.real(), a.params().tau.imag()};
  j["coeffs"] = nlohmann::json::array();
  for (const auto &[k, v] : a.coeffs())
    j["coeffs"].push_back({{"m", k.m}, {"n", k.n}, {"re", v.real()}, {"im", v.imag()}});
  if (selfadjoint_flag) j["selfadjoint"] = true;
  return j;
}

TorusElement element_from_json(const nlohmann::json &j) {
  const AlgebraParams p = params_from_json(j);
  TorusElement::Map c;
  for (const auto &e : j.at("coeffs")) {
    const double im = e.contains("im") ? e.at("im").get<double>() : 0.0;
    c[{e.at("m").get<int>(), e.at("n").get<int>()}] += cplx(e.at("re").get<double>(), im);
  }
  TorusElement a(p, std::move(c));
  if (j.value("selfadjoint", false) && !a.is_self_adjoint(1e-10))
    throw NotSelfAdjoint("element declared selfadjoint but coefficients differ from star(a)");
  return a;
}

std::string to_string(const TorusElement &a) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto &[k, v] : a.coeffs()) {
    if (!first) os << " + ";
    first = false;
    os << "(" << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i)U1^" << k.m << "U2^" << k.n;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace nct
