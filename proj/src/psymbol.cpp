#include "nct/psymbol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nct/modcalc.hpp"
#include "nct/quadrature.hpp"

namespace nct {

TwistData TwistData::from_b12(double b12) {
  TwistData t;
  t.b[0][1] = b12;
  t.b[1][0] = -b12;
  return t;
}

void TwistData::validate() const {
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      if (b[k][l] + b[l][k] != 0.0) throw std::invalid_argument("twist matrix B must be skew-symmetric");
}

// ---------------------------------------------------------------- Poly

Poly Poly::constant(cplx v) { return monomial({0, 0}, v); }

Poly Poly::monomial(Multi g, cplx v) {
  Poly p;
  if (v != cplx(0.0)) p.c[g] = v;
  return p;
}

Poly Poly::xi(int j) { return monomial(j == 1 ? Multi{1, 0} : Multi{0, 1}); }

int Poly::degree() const {
  int d = -1;
  for (const auto &[g, v] : c) d = std::max(d, g[0] + g[1]);
  return d;
}

bool Poly::homogeneous() const {
  const int d = degree();
  return std::all_of(c.begin(), c.end(), [d](const auto &kv) { return kv.first[0] + kv.first[1] == d; });
}

Poly Poly::part(int deg) const {
  Poly p;
  for (const auto &[g, v] : c)
    if (g[0] + g[1] == deg) p.c[g] = v;
  return p;
}

Poly Poly::derive(int j) const {
  Poly p;
  const int k = j - 1;
  for (const auto &[g, v] : c) {
    if (g[k] == 0) continue;
    Multi h = g;
    --h[k];
    p.c[h] += v * double(g[k]);
  }
  return p;
}

Poly Poly::conj() const {
  Poly p;
  for (const auto &[g, v] : c) p.c[g] = std::conj(v);
  return p;
}

cplx Poly::eval(double x1, double x2) const {
  cplx s = 0.0;
  for (const auto &[g, v] : c) s += v * std::pow(x1, g[0]) * std::pow(x2, g[1]);
  return s;
}

void Poly::prune(double tol) {
  for (auto it = c.begin(); it != c.end();) {
    if (std::abs(it->second) <= tol)
      it = c.erase(it);
    else
      ++it;
  }
}

Poly &Poly::operator+=(const Poly &o) {
  for (const auto &[g, v] : o.c) c[g] += v;
  prune();
  return *this;
}

Poly &Poly::operator*=(cplx s) {
  for (auto &[g, v] : c) v *= s;
  prune();
  return *this;
}

Poly operator*(const Poly &a, const Poly &b) {
  Poly p;
  for (const auto &[g, v] : a.c)
    for (const auto &[h, w] : b.c) p.c[{g[0] + h[0], g[1] + h[1]}] += v * w;
  p.prune();
  return p;
}

// ---------------------------------------------------------------- terms and context

int Term::resolvents() const {
  return int(std::count_if(atoms.begin(), atoms.end(), [](const Atom &a) { return a.res(); }));
}

int Term::degree() const { return poly.degree() + 2 * lam - 2 * resolvents(); }

SymbolContext::SymbolContext(const AlgebraParams &p, TwistData B) : params_(p), B_(B) {
  p.validate();
  B.validate();
  unit_ = add(TorusElement::unit(p));
}

int SymbolContext::add(const TorusElement &e) {
  if (e.empty()) return -1;
  if (!(e.params() == params_)) throw ParamsMismatch("symbol constant with foreign parameters");
  elems_.push_back(e);
  return int(elems_.size()) - 1;
}

int SymbolContext::delta(int id, int j) {
  const auto key = std::make_pair(id, j);
  if (auto it = delta_.find(key); it != delta_.end()) return it->second;
  const int r = add(derive(elems_.at(id), j));
  delta_[key] = r;
  return r;
}

int SymbolContext::product(int a, int b) {
  if (a == unit_) return b;
  if (b == unit_) return a;
  const auto key = std::make_pair(a, b);
  if (auto it = product_.find(key); it != product_.end()) return it->second;
  const int r = add(multiply(elems_.at(a), elems_.at(b)));
  product_[key] = r;
  return r;
}

int SymbolContext::star(int id) {
  if (auto it = star_.find(id); it != star_.end()) return it->second;
  const TorusElement &e = elems_.at(id);
  const int r = e.is_self_adjoint(0.0) ? id : add(nct::star(e));
  star_[id] = r;
  return r;
}

void SymbolContext::set_k2(const TorusElement &k2) { k2_ = add(k2); }

int SymbolContext::k2_id() const {
  if (k2_ < 0) throw UnsupportedDerivative("resolvent atom used before k^2 was set");
  return k2_;
}

Poly SymbolContext::eta_sq() const {
  const cplx t = params_.tau;
  Poly p;
  p.c[{2, 0}] = 1.0;
  p.c[{1, 1}] = 2.0 * t.real();
  p.c[{0, 2}] = std::norm(t);
  return p;
}

ContextPtr make_context(const AlgebraParams &p, TwistData B) { return std::make_shared<SymbolContext>(p, B); }

// ---------------------------------------------------------------- Symbol

namespace {

bool scalar_element(const TorusElement &e, cplx &v) {
  if (e.size() != 1 || e.coeffs().begin()->first != FourierIndex{0, 0}) return false;
  v = e.coeffs().begin()->second;
  return true;
}

// Product of atom strings with adjacent constants fused; false when the product vanishes.
bool join(SymbolContext &ctx, std::vector<Atom> &out, const std::vector<Atom> &right) {
  for (const Atom &a : right) {
    if (!a.res() && !out.empty() && !out.back().res()) {
      const int id = ctx.product(out.back().id, a.id);
      if (id < 0) return false;
      out.back().id = id;
    } else {
      out.push_back(a);
    }
  }
  return true;
}

// Removes scalar constants from the atom string into the polynomial.
bool normalize(SymbolContext &ctx, Term &t) {
  std::vector<Atom> atoms;
  for (const Atom &a : t.atoms) {
    cplx v;
    if (!a.res() && scalar_element(ctx.element(a.id), v)) {
      t.poly *= v;
      continue;
    }
    if (!join(ctx, atoms, {a})) return false;
  }
  t.atoms = std::move(atoms);
  return !t.poly.zero();
}

}  // namespace

Symbol Symbol::scalar(ContextPtr ctx, const Poly &p) {
  Symbol s(std::move(ctx));
  if (!p.zero()) s.terms_.push_back({p, 0, {}});
  s.simplify();
  return s;
}

Symbol Symbol::element(ContextPtr ctx, const TorusElement &e, const Poly &p) {
  Symbol s(ctx);
  const int id = ctx->add(e);
  if (id < 0 || p.zero()) return s;
  Term t{p, 0, {Atom{id}}};
  if (normalize(*ctx, t)) s.terms_.push_back(std::move(t));
  s.simplify();
  return s;
}

Symbol Symbol::resolvent(ContextPtr ctx) {
  ctx->k2_id();
  Symbol s(std::move(ctx));
  s.terms_.push_back({Poly::constant(1.0), 0, {Atom{}}});
  return s;
}

Symbol Symbol::lambda(ContextPtr ctx) {
  Symbol s(std::move(ctx));
  s.terms_.push_back({Poly::constant(1.0), 1, {}});
  return s;
}

bool Symbol::differential() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term &t) { return t.resolvents() == 0; });
}

Symbol &Symbol::operator+=(const Symbol &o) {
  if (ctx_ != o.ctx_) throw ParamsMismatch("symbols from different contexts");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  simplify();
  return *this;
}

Symbol &Symbol::operator-=(const Symbol &o) { return *this += o * cplx(-1.0); }

Symbol &Symbol::operator*=(cplx s) {
  for (Term &t : terms_) t.poly *= s;
  std::erase_if(terms_, [](const Term &t) { return t.poly.zero(); });
  return *this;
}

Symbol operator*(const Symbol &a, const Symbol &b) {
  if (a.ctx_ != b.ctx_) throw ParamsMismatch("symbols from different contexts");
  Symbol s(a.ctx_);
  for (const Term &x : a.terms_)
    for (const Term &y : b.terms_) {
      Term t{x.poly * y.poly, x.lam + y.lam, x.atoms};
      if (t.poly.zero() || !join(*a.ctx_, t.atoms, y.atoms)) continue;
      s.terms_.push_back(std::move(t));
    }
  s.simplify();
  return s;
}

Symbol Symbol::d_xi(int j) const {
  if (j != 1 && j != 2) throw UnsupportedDerivative("xi derivative index must be 1 or 2");
  Symbol s(ctx_);
  const Poly deta = ctx_->eta_sq().derive(j) * cplx(-1.0);
  for (const Term &t : terms_) {
    Term d{t.poly.derive(j), t.lam, t.atoms};
    if (!d.poly.zero()) s.terms_.push_back(std::move(d));
    for (std::size_t i = 0; i < t.atoms.size(); ++i) {
      if (!t.atoms[i].res()) continue;
      Term r{t.poly * deta, t.lam, {}};
      std::vector<Atom> left(t.atoms.begin(), t.atoms.begin() + long(i));
      std::vector<Atom> right(t.atoms.begin() + long(i) + 1, t.atoms.end());
      r.atoms = left;
      if (!join(*ctx_, r.atoms, {Atom{}, Atom{ctx_->k2_id()}, Atom{}}) || !join(*ctx_, r.atoms, right)) continue;
      s.terms_.push_back(std::move(r));
    }
  }
  s.simplify();
  return s;
}

Symbol Symbol::delta(int j) const {
  if (j != 1 && j != 2) throw UnsupportedDerivative("algebra derivative index must be 1 or 2");
  Symbol s(ctx_);
  const Poly meta = ctx_->eta_sq() * cplx(-1.0);
  for (const Term &t : terms_) {
    for (std::size_t i = 0; i < t.atoms.size(); ++i) {
      std::vector<Atom> left(t.atoms.begin(), t.atoms.begin() + long(i));
      std::vector<Atom> right(t.atoms.begin() + long(i) + 1, t.atoms.end());
      Term r{t.poly, t.lam, left};
      std::vector<Atom> mid;
      if (t.atoms[i].res()) {
        const int dk = ctx_->delta(ctx_->k2_id(), j);
        if (dk < 0) continue;
        r.poly = r.poly * meta;
        mid = {Atom{}, Atom{dk}, Atom{}};
      } else {
        const int d = ctx_->delta(t.atoms[i].id, j);
        if (d < 0) continue;
        mid = {Atom{d}};
      }
      if (!join(*ctx_, r.atoms, mid) || !join(*ctx_, r.atoms, right)) continue;
      if (normalize(*ctx_, r)) s.terms_.push_back(std::move(r));
    }
  }
  s.simplify();
  return s;
}

Symbol Symbol::star() const {
  Symbol s(ctx_);
  for (const Term &t : terms_) {
    Term r{t.poly.conj(), t.lam, {}};
    for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it)
      r.atoms.push_back(it->res() ? *it : Atom{ctx_->star(it->id)});
    s.terms_.push_back(std::move(r));
  }
  s.simplify();
  return s;
}

std::vector<int> Symbol::degrees() const {
  std::vector<int> d;
  for (const Term &t : terms_) d.push_back(t.degree());
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

Symbol Symbol::part(int degree) const {
  Symbol s(ctx_);
  for (const Term &t : terms_)
    if (t.degree() == degree) s.terms_.push_back(t);
  return s;
}

void Symbol::simplify() {
  std::map<std::pair<std::vector<Atom>, int>, std::pair<Poly, double>> acc;
  for (const Term &t : terms_) {
    auto &[p, scale] = acc[{t.atoms, t.lam}];
    for (const auto &[g, v] : t.poly.c) {
      p.c[g] += v;
      scale = std::max(scale, std::abs(v));
    }
  }
  terms_.clear();
  for (auto &[key, ps] : acc) {
    Poly &p = ps.first;
    p.prune(1e-14 * ps.second);
    if (p.zero()) continue;
    std::vector<int> degs;
    for (const auto &[g, v] : p.c) degs.push_back(g[0] + g[1]);
    std::sort(degs.begin(), degs.end());
    degs.erase(std::unique(degs.begin(), degs.end()), degs.end());
    for (int d : degs) terms_.push_back({p.part(d), key.second, key.first});
  }
}

std::string Symbol::to_string() const {
  std::ostringstream os;
  for (const Term &t : terms_) {
    os << "(";
    bool first = true;
    for (const auto &[g, v] : t.poly.c) {
      os << (first ? "" : " + ") << v << " x^" << g[0] << "y^" << g[1];
      first = false;
    }
    os << ")";
    if (t.lam) os << " lam^" << t.lam;
    for (const Atom &a : t.atoms) os << (a.res() ? " [R]" : " [e" + std::to_string(a.id) + "]");
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- expansions

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Symbol apply_D(const Symbol &g, int j) {
  const TwistData &B = g.ctx()->twist();
  Symbol r = g.delta(j) * cplx(0.0, 1.0);
  for (int l = 1; l <= 2; ++l)
    if (B(l - 1, j - 1) != 0.0) r += g.d_xi(l) * cplx(B(l - 1, j - 1));
  return r;
}

Symbol d_xi_gamma(Symbol f, Multi g) {
  for (int i = 0; i < g[0]; ++i) f = f.d_xi(1);
  for (int i = 0; i < g[1]; ++i) f = f.d_xi(2);
  return f;
}

}  // namespace

Symbol compose_symbols(const Symbol &f, const Symbol &g, int M) {
  if (M < 0) throw std::invalid_argument("expansion order must be non-negative");
  Symbol out(f.ctx());
  std::vector<Symbol> Dg1{g};  // D_1^a g
  for (int a = 1; a <= M; ++a) Dg1.push_back(apply_D(Dg1.back(), 1));
  for (int a = 0; a <= M; ++a) {
    Symbol Dg = Dg1[a];
    for (int b = 0; a + b <= M; ++b) {
      if (b > 0) Dg = apply_D(Dg, 2);
      const Symbol df = d_xi_gamma(f, {a, b});
      if (df.zero() || Dg.zero()) continue;
      const cplx c = std::pow(cplx(0.0, -1.0), a + b) / (factorial(a) * factorial(b));
      out += (df * Dg) * c;
    }
  }
  return out;
}

Symbol adjoint_symbol(const Symbol &f, int M) {
  if (M < 0) throw std::invalid_argument("expansion order must be non-negative");
  const Symbol fs = f.star();
  Symbol out(f.ctx());
  for (int a = 0; a <= M; ++a)
    for (int b = 0; a + b <= M; ++b) {
      Symbol t = fs;
      for (int i = 0; i < a; ++i) t = t.delta(1);
      for (int i = 0; i < b; ++i) t = t.delta(2);
      t = d_xi_gamma(t, {a, b});
      if (!t.zero()) out += t * cplx(1.0 / (factorial(a) * factorial(b)));
    }
  return out;
}

// ---------------------------------------------------------------- multipliers

int DiffMultiplier::order() const {
  int m = 0;
  for (const auto &[g, a] : coeffs)
    if (!a.empty()) m = std::max(m, g[0] + g[1]);
  return m;
}

Symbol DiffMultiplier::symbol(const ContextPtr &ctx) const {
  Symbol s(ctx);
  for (const auto &[g, a] : coeffs) s += Symbol::element(ctx, a, Poly::monomial(g));
  return s;
}

DiffMultiplier ud(const AlgebraParams &p, Multi gamma) {
  DiffMultiplier d;
  d.coeffs[gamma] = TorusElement::unit(p);
  return d;
}

namespace {

void require_positive(const TorusElement &k2) {
  if (!k2.is_self_adjoint(1e-12)) throw ParametrixError("k^2 must be self-adjoint");
  const GnsTruncation tr{std::max(4, 2 * k2.support_radius())};
  const RVec ev = eigvalsh(CMat(represent_sparse(k2, tr)));
  if (!(ev(0) > 0.0)) throw ParametrixError("k^2 is not positive");
}

void add_eta_sq(DiffMultiplier &d, const TorusElement &k2) {
  const cplx t = k2.params().tau;
  d.coeffs[{2, 0}] = k2;
  d.coeffs[{1, 1}] = k2 * cplx(2.0 * t.real());
  d.coeffs[{0, 2}] = k2 * cplx(std::norm(t));
}

void add_first_order(DiffMultiplier &d, const TorusElement &A1, const TorusElement &A2) {
  // A1 conj(eta) + A2 eta with conj(eta) = xi1 + tau xi2, eta = xi1 + conj(tau) xi2
  const cplx t = A1.params().tau;
  d.coeffs[{1, 0}] = A1 + A2;
  d.coeffs[{0, 1}] = A1 * t + A2 * std::conj(t);
}

}  // namespace

DiffMultiplier conformal_P(const TorusElement &k2, double eps1, double eps2, const TorusElement &a0) {
  require_positive(k2);
  DiffMultiplier d;
  add_eta_sq(d, k2);
  add_first_order(d, delta_tau(k2) * cplx(eps1), delta_tau_star(k2) * cplx(eps2));
  if (!a0.empty()) d.coeffs[{0, 0}] = a0;
  return d;
}

DiffMultiplier laplace_kdk(const TorusElement &k) {
  const TorusElement k2 = multiply(k, k);
  require_positive(k2);
  DiffMultiplier d;
  add_eta_sq(d, k2);
  add_first_order(d, multiply(k, delta_tau(k)), multiply(k, delta_tau_star(k)));
  d.coeffs[{0, 0}] = multiply(k, delta_tau(delta_tau_star(k)));
  return d;
}

ConformalMatch match_conformal(const TorusElement &k) {
  const TorusElement k2 = multiply(k, k);
  const GnsTruncation tr{std::max(2, 2 * k.support_radius() + 2)};
  auto fit = [&](const TorusElement &basis, const TorusElement &target, double &res) {
    const CVec b = to_vector(basis, tr), y = to_vector(target, tr);
    const double nb = b.squaredNorm();
    const cplx e = nb > 0.0 ? b.dot(y) / nb : cplx(0.0);
    res = distance_l1(target, basis * e);
    return e;
  };
  ConformalMatch m;
  m.eps1 = fit(delta_tau(k2), multiply(k, delta_tau(k)), m.residual1);
  m.eps2 = fit(delta_tau_star(k2), multiply(k, delta_tau_star(k)), m.residual2);
  m.a0 = multiply(k, delta_tau(delta_tau_star(k)));
  return m;
}

Dilaton dilaton_factors(const TorusElement &h, int N) {
  if (N <= 0) N = std::max(12, 6 * h.support_radius() + 8);
  ModCalcOptions o;
  const ModularCalcContext ctx(h, N, o);
  Dilaton d{h, ctx.function_of_h([](double x) { return std::exp(0.5 * x); }),
            ctx.function_of_h([](double x) { return std::exp(x); })};
  return d;
}

Parametrix resolvent_parametrix(const DiffMultiplier &P, const ContextPtr &ctx) {
  auto it = P.coeffs.find({2, 0});
  if (it == P.coeffs.end() || P.order() != 2) throw ParametrixError("principal part must be k^2 |eta|^2");
  const TorusElement &k2 = it->second;
  const cplx t = ctx->params().tau;
  const double scale = std::max(1.0, k2.l1_norm());
  auto coeff = [&](Multi g) { return P.coeffs.count(g) ? P.coeffs.at(g) : TorusElement(ctx->params()); };
  if (distance_l1(coeff({1, 1}), k2 * cplx(2.0 * t.real())) > 1e-12 * scale ||
      distance_l1(coeff({0, 2}), k2 * cplx(std::norm(t))) > 1e-12 * scale)
    throw ParametrixError("principal part must be k^2 |eta|^2");
  require_positive(k2);
  if (!ctx->has_k2())
    ctx->set_k2(k2);
  else if (distance_l1(ctx->element(ctx->k2_id()), k2) > 1e-12 * scale)
    throw ParametrixError("context k^2 differs from the principal part");

  Parametrix par{P.symbol(ctx) - Symbol::lambda(ctx), Symbol::resolvent(ctx), Symbol(ctx), Symbol(ctx)};
  const Symbol R = Symbol::resolvent(ctx);
  par.b3 = (R * compose_symbols(par.sigma, par.b2, 2).part(-1)) * cplx(-1.0);
  par.b4 = (R * compose_symbols(par.sigma, par.b2 + par.b3, 2).part(-2)) * cplx(-1.0);
  return par;
}

// ---------------------------------------------------------------- evaluation

SymbolEvaluator::SymbolEvaluator(ContextPtr ctx, const GnsTruncation &tr) : ctx_(std::move(ctx)), tr_(tr) {
  const int D = tr.dim();
  if (ctx_->has_k2()) {
    const HermitianEigen e = eigh(CMat(represent_sparse(ctx_->element(ctx_->k2_id()), tr)));
    W_ = e.vectors;
    kappa_ = e.values;
  } else {
    W_ = CMat::Identity(D, D);
    kappa_ = RVec::Ones(D);
  }
  e1_ = W_.adjoint().col(tr.one());
}

const CMat &SymbolEvaluator::matrix(int id) {
  auto it = mats_.find(id);
  if (it != mats_.end()) return it->second;
  const CMat m = W_.adjoint() * (CMat(represent_sparse(ctx_->element(id), tr_)) * W_);
  return mats_.emplace(id, m).first->second;
}

SymbolEvaluator::Compiled SymbolEvaluator::compile(const Symbol &s) {
  if (s.ctx() != ctx_) throw ParamsMismatch("symbol from a different context");
  auto build = [&](bool prefix) {
    Compiled c;
    c.prefix = prefix;
    c.nodes.push_back({-1, Atom{}});
    std::map<std::pair<int, Atom>, int> index;
    for (const Term &t : s.terms()) {
      int node = 0;
      const std::size_t r = t.atoms.size();
      for (std::size_t i = 0; i < r; ++i) {
        const Atom a = prefix ? t.atoms[i] : t.atoms[r - 1 - i];
        const auto key = std::make_pair(node, a);
        auto f = index.find(key);
        if (f == index.end()) {
          c.nodes.push_back(key);
          f = index.emplace(key, int(c.nodes.size()) - 1).first;
        }
        node = f->second;
      }
      c.node_of_term.push_back(node);
      c.terms.push_back(t);
    }
    return c;
  };
  auto cost = [](const Compiled &c) {
    return std::count_if(c.nodes.begin() + 1, c.nodes.end(), [](const auto &n) { return !n.second.res(); });
  };
  Compiled a = build(false), b = build(true);
  Compiled &c = cost(b) < cost(a) ? b : a;
  for (std::size_t i = 1; i < c.nodes.size(); ++i)
    if (!c.nodes[i].second.res()) matrix(c.nodes[i].second.id);
  return std::move(c);
}

CVec SymbolEvaluator::apply(const Compiled &c, double x1, double x2, double lam) const {
  const cplx t = ctx_->params().tau;
  const double eta2 = x1 * x1 + 2.0 * t.real() * x1 * x2 + std::norm(t) * x2 * x2;
  auto act = [&](const Atom &a, const CVec &v) -> CVec {
    if (a.res()) return (v.array() / (kappa_.array() * eta2 - lam)).matrix();
    return mats_.at(a.id) * v;
  };
  auto weight = [&](const Term &tm) { return tm.poly.eval(x1, x2) * std::pow(lam, tm.lam); };
  if (c.prefix) {
    std::vector<CVec> S(c.nodes.size(), CVec::Zero(e1_.size()));
    for (std::size_t k = 0; k < c.terms.size(); ++k) S[c.node_of_term[k]] += weight(c.terms[k]) * e1_;
    for (std::size_t i = c.nodes.size() - 1; i >= 1; --i) S[c.nodes[i].first] += act(c.nodes[i].second, S[i]);
    return S[0];
  }
  std::vector<CVec> v(c.nodes.size());
  v[0] = e1_;
  for (std::size_t i = 1; i < c.nodes.size(); ++i) v[i] = act(c.nodes[i].second, v[c.nodes[i].first]);
  CVec out = CVec::Zero(e1_.size());
  for (std::size_t k = 0; k < c.terms.size(); ++k) out += weight(c.terms[k]) * v[c.node_of_term[k]];
  return out;
}

CVec SymbolEvaluator::apply(const Symbol &s, double x1, double x2, double lam) {
  return apply(compile(s), x1, x2, lam);
}

CVec SymbolEvaluator::probe_row(const TorusElement &a) const {
  const SpMat A = represent_sparse(a, tr_);
  const CVec row = CMat(A.row(tr_.one())).transpose();
  return W_.transpose() * row;
}

// ---------------------------------------------------------------- certificates

HomogeneityCheck homogeneity_check(const std::string &name, const Symbol &s, int declared, SymbolEvaluator &ev,
                                   double x1, double x2, double lam, double tol) {
  HomogeneityCheck h{name, declared, 0.0, 0.0, false};
  const auto c = ev.compile(s);
  const CVec v1 = ev.apply(c, x1, x2, lam);
  const double n1 = v1.norm();
  if (n1 == 0.0) {
    h.measured = declared;
    h.pass = true;
    return h;
  }
  double slope = 0.0;
  for (double r : {2.0, 3.0}) {
    const CVec vr = ev.apply(c, r * x1, r * x2, r * r * lam);
    const double rd = std::pow(r, declared);
    h.residual = std::max(h.residual, (vr - rd * v1).norm() / (rd * n1));
    slope = std::log(vr.norm() / n1) / std::log(r);
  }
  h.measured = slope;
  h.pass = h.residual < tol;
  return h;
}

std::vector<HomogeneityCheck> homogeneity_report(const Parametrix &par, SymbolEvaluator &ev) {
  std::vector<HomogeneityCheck> out;
  for (int d : par.sigma.degrees())
    out.push_back(homogeneity_check("sigma_" + std::to_string(d), par.sigma.part(d), d, ev));
  out.push_back(homogeneity_check("b_-2", par.b2, -2, ev));
  out.push_back(homogeneity_check("b_-3", par.b3, -3, ev));
  out.push_back(homogeneity_check("b_-4", par.b4, -4, ev));
  return out;
}

namespace {

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SlopeFit parametrix_residual_slope(const Parametrix &par, SymbolEvaluator &ev, const std::vector<double> &rs,
                                   double x1, double x2, double lam) {
  const Symbol total = compose_symbols(par.sigma, par.b2 + par.b3 + par.b4, 2);
  const auto c = ev.compile(total);
  const CVec one = ev.apply(Symbol::scalar(par.sigma.ctx(), Poly::constant(1.0)), 0.0, 0.0, 0.0);
  SlopeFit f;
  for (double r : rs) {
    f.r.push_back(r);
    f.residual.push_back((ev.apply(c, r * x1, r * x2, r * r * lam) - one).norm());
  }
  f.slope = loglog_slope(f.r, f.residual);
  return f;
}

double b4_radial_slope(const Parametrix &par, SymbolEvaluator &ev, double r0, double r1) {
  const auto c = ev.compile(par.b4);
  const double c0 = std::cos(0.3), s0 = std::sin(0.3);
  const double n0 = ev.apply(c, r0 * c0, r0 * s0, -1.0).norm();
  const double n1 = ev.apply(c, r1 * c0, r1 * s0, -1.0).norm();
  return std::log(n1 / n0) / std::log(r1 / r0);
}

// ---------------------------------------------------------------- quadrature

namespace {

// Polar quadrature of a vector-valued integrand: trapezoid in the angle, adaptive GK15 radially
// on u in [0, R/(1+R)] with r = u/(1-u), plus the |xi|^{-4} tail beyond R.
struct PolarResult {
  std::vector<double> value;
  double error = 0.0;
  double tail = 0.0;
  int evaluations = 0;
};

PolarResult polar_integrate(const std::function<std::vector<double>(double, double)> &f, std::size_t dim,
                            const QuadratureConfig &q, bool tail) {
  PolarResult out;
  out.value.assign(dim, 0.0);
  const double uR = q.R / (1.0 + q.R);
  const double w = 2.0 * kPi / q.angles;
  std::vector<double> tails(dim, 0.0);
  for (int k = 0; k < q.angles; ++k) {
    const double th = w * k, c = std::cos(th), s = std::sin(th);
    const auto rad = integrate_gk15_vec(
        [&](double u) {
          const double r = u / (1.0 - u), jac = r / ((1.0 - u) * (1.0 - u));
          std::vector<double> v = f(r * c, r * s);
          for (double &x : v) x *= jac;
          return v;
        },
        dim, 0.0, uR, q.abs_tol, q.rel_tol, q.max_intervals);
    out.evaluations += rad.evaluations;
    out.error += w * rad.error;
    std::vector<double> tv(dim, 0.0);
    if (tail) {
      tv = f(q.R * c, q.R * s);
      for (double &x : tv) x *= std::pow(q.R, 4) / (2.0 * q.R * q.R);
      ++out.evaluations;
    }
    for (std::size_t i = 0; i < dim; ++i) {
      out.value[i] += w * (rad.value[i] + tv[i]);
      tails[i] += w * tv[i];
    }
  }
  for (double t : tails) out.tail = std::max(out.tail, std::abs(t));
  return out;
}

}  // namespace

A2Integration a2_by_integration(const Parametrix &par, const std::vector<TorusElement> &probes, SymbolEvaluator &ev,
                                const QuadratureConfig &q, const FrozenConventions &conv) {
  const auto c = ev.compile(par.b4);
  std::vector<CVec> rows;
  for (const TorusElement &a : probes) rows.push_back(ev.probe_row(a));
  const PolarResult r = polar_integrate(
      [&](double x1, double x2) {
        const CVec v = ev.apply(c, x1, x2, -1.0);
        std::vector<double> out;
        for (const CVec &row : rows) out.push_back(row.cwiseProduct(v).sum().real());
        return out;
      },
      rows.size(), q, true);
  A2Integration out;
  const double f = conv.contour_sign * conv.plancherel;
  double scale = 0.0;
  for (double v : r.value) {
    out.values.push_back(f * v);
    scale = std::max(scale, std::abs(v));
  }
  out.quadrature_error = r.error;
  out.tail = r.tail;
  out.evaluations = r.evaluations;
  if (r.tail > q.max_tail * std::max(scale, 1e-6)) throw QuadratureTail("xi-integration tail above tolerance");
  return out;
}

double flat_a0_by_integration(cplx tau, const QuadratureConfig &q) {
  const PolarResult r = polar_integrate(
      [&](double x1, double x2) {
        return std::vector<double>{std::exp(-std::norm(cplx(x1) + std::conj(tau) * x2))};
      },
      1, q, false);
  return r.value[0];
}

cplx contour_identity(double t, double r) {
  const int n = 128;
  const double rho = std::max(1.0, 0.5 * std::abs(r));
  cplx s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    const cplx e = std::exp(cplx(0.0, -phi));
    const cplx lam = r + rho * e;
    const cplx dlam = cplx(0.0, -1.0) * rho * e * (2.0 * kPi / n);
    s += std::exp(-t * lam) / (r - lam) * dlam;
  }
  return s / cplx(0.0, 2.0 * kPi);
}

nlohmann::json to_json(const HomogeneityCheck &c) {
  return {{"name", c.name},
          {"declared", c.declared},
          {"measured", c.measured},
          {"residual", c.residual},
          {"tolerance", 1e-9},
          {"pass", c.pass}};
}

}  // namespace nct
