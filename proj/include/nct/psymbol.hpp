#pragma once
// Twisted pseudodifferential multipliers on (A_theta, R^2): symbols as sums of terms
// poly(xi) lambda^p A_1 ... A_r with A_i an algebra constant or the resolvent atom (k^2|eta|^2 - lambda)^{-1},
// composition and adjoint expansions, the resolvent parametrix and the xi-integration of b_{-4}.

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nct/gns.hpp"
#include "nct/linalg.hpp"
#include "nct/nctorus.hpp"

namespace nct {

struct TwistData {
  std::array<std::array<double, 2>, 2> b{};  // b[k][l], 0-based

  static TwistData from_b12(double b12);
  /// Throws std::invalid_argument unless B + B^T = 0.
  void validate() const;
  double operator()(int k, int l) const { return b[k][l]; }
};

using Multi = std::array<int, 2>;

struct UnsupportedDerivative : std::logic_error {
  using std::logic_error::logic_error;
};
struct ParametrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuadratureTail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar complex polynomial in xi_1, xi_2.
class Poly {
 public:
  std::map<Multi, cplx> c;

  static Poly constant(cplx v);
  static Poly monomial(Multi g, cplx v = 1.0);
  static Poly xi(int j);

  bool zero() const { return c.empty(); }
  /// Largest total degree; -1 for the zero polynomial.
  int degree() const;
  bool homogeneous() const;
  Poly part(int deg) const;
  Poly derive(int j) const;
  Poly conj() const;
  cplx eval(double x1, double x2) const;
  void prune(double tol = 0.0);

  Poly &operator+=(const Poly &o);
  Poly &operator*=(cplx s);
  friend Poly operator+(Poly a, const Poly &b) { return a += b; }
  friend Poly operator*(Poly a, cplx s) { return a *= s; }
  friend Poly operator*(const Poly &a, const Poly &b);
};

struct Atom {
  int id = -1;  // element id; -1 for the resolvent
  bool res() const { return id < 0; }
  auto operator<=>(const Atom &) const = default;
};

struct Term {
  Poly poly;  // homogeneous after simplification
  int lam = 0;
  std::vector<Atom> atoms;

  int resolvents() const;
  /// Parabolic degree: poly degree + 2 lam - 2 #resolvents.
  int degree() const;
};

/// Element registry with cached derivatives, products and adjoints, plus params, B and k^2.
class SymbolContext {
 public:
  SymbolContext(const AlgebraParams &p, TwistData B);

  const AlgebraParams &params() const { return params_; }
  const TwistData &twist() const { return B_; }

  /// -1 for the zero element.
  int add(const TorusElement &e);
  const TorusElement &element(int id) const { return elems_.at(id); }
  std::size_t size() const { return elems_.size(); }
  bool is_unit(int id) const { return id == unit_; }
  int delta(int id, int j);
  int product(int a, int b);
  int star(int id);

  void set_k2(const TorusElement &k2);
  bool has_k2() const { return k2_ >= 0; }
  int k2_id() const;

  /// |eta|^2 = xi1^2 + 2 Re(tau) xi1 xi2 + |tau|^2 xi2^2.
  Poly eta_sq() const;

 private:
  AlgebraParams params_;
  TwistData B_;
  std::vector<TorusElement> elems_;
  std::map<std::pair<int, int>, int> delta_, product_;
  std::map<int, int> star_;
  int unit_ = -1;
  int k2_ = -1;
};

using ContextPtr = std::shared_ptr<SymbolContext>;
ContextPtr make_context(const AlgebraParams &p, TwistData B = {});

class Symbol {
 public:
  explicit Symbol(ContextPtr ctx) : ctx_(std::move(ctx)) {}

  static Symbol scalar(ContextPtr ctx, const Poly &p);
  static Symbol element(ContextPtr ctx, const TorusElement &e, const Poly &p = Poly::constant(1.0));
  static Symbol resolvent(ContextPtr ctx);
  static Symbol lambda(ContextPtr ctx);

  const ContextPtr &ctx() const { return ctx_; }
  const std::vector<Term> &terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool zero() const { return terms_.empty(); }
  /// No resolvent atoms.
  bool differential() const;

  Symbol &operator+=(const Symbol &o);
  Symbol &operator-=(const Symbol &o);
  Symbol &operator*=(cplx s);
  friend Symbol operator+(Symbol a, const Symbol &b) { return a += b; }
  friend Symbol operator-(Symbol a, const Symbol &b) { return a -= b; }
  friend Symbol operator*(Symbol a, cplx s) { return a *= s; }
  friend Symbol operator*(cplx s, Symbol a) { return a *= s; }
  friend Symbol operator*(const Symbol &a, const Symbol &b);

  Symbol d_xi(int j) const;   // j = 1, 2
  Symbol delta(int j) const;  // j = 1, 2
  /// Pointwise adjoint for real lambda.
  Symbol star() const;

  std::vector<int> degrees() const;
  Symbol part(int degree) const;

  /// Merge terms with equal atoms and lambda power, split polynomials into homogeneous parts.
  void simplify();
  std::string to_string() const;

 private:
  ContextPtr ctx_;
  std::vector<Term> terms_;
};

/// sum_{|gamma| <= M} (i^{-|gamma|} / gamma!) d_xi^gamma f . D^gamma g with D_j = i delta_j + sum_l b_lj d_xi_l.
Symbol compose_symbols(const Symbol &f, const Symbol &g, int M);
/// sum_{|gamma| <= M} (1 / gamma!) d_xi^gamma delta^gamma f^*.
Symbol adjoint_symbol(const Symbol &f, int M);

struct DiffMultiplier {
  std::map<Multi, TorusElement> coeffs;  // a_gamma

  int order() const;
  Symbol symbol(const ContextPtr &ctx) const;
};

/// xi^gamma with unit coefficient.
DiffMultiplier ud(const AlgebraParams &p, Multi gamma);

/// k^2 |eta|^2 + eps1 delta_tau(k^2) conj(eta) + eps2 delta_tau^*(k^2) eta + a0.
DiffMultiplier conformal_P(const TorusElement &k2, double eps1, double eps2, const TorusElement &a0);
/// Symbol of x -> k Delta(k x) with Delta = delta_tau delta_tau^*.
DiffMultiplier laplace_kdk(const TorusElement &k);

/// Closest (eps1, eps2, a0) for k Delta k within the conformal family, with the coefficient mismatch left over.
struct ConformalMatch {
  cplx eps1{0.0, 0.0};
  cplx eps2{0.0, 0.0};
  TorusElement a0;
  double residual1 = 0.0;  // l1 distance of k delta_tau(k) from eps1 delta_tau(k^2)
  double residual2 = 0.0;
};
ConformalMatch match_conformal(const TorusElement &k);

struct Dilaton {
  TorusElement h, k, k2;
};
/// k = e^{h/2} and k^2 = e^h as finite Fourier series (coefficients below kPruneTol dropped).
Dilaton dilaton_factors(const TorusElement &h, int N = 0);

struct Parametrix {
  Symbol sigma;  // sigma(P - lambda)
  Symbol b2, b3, b4;
};
Parametrix resolvent_parametrix(const DiffMultiplier &P, const ContextPtr &ctx);

/// Symbol instantiated on GNS matrices, in the eigenbasis of rep(k^2) so that the resolvent is diagonal.
class SymbolEvaluator {
 public:
  struct Compiled {
    // Atom strings shared through a trie: read from the right (suffixes applied to the cyclic vector)
    // or from the left (prefixes, accumulated back to the root); whichever has fewer nodes.
    bool prefix = false;
    std::vector<std::pair<int, Atom>> nodes;  // (parent, atom); node 0 is the root
    std::vector<int> node_of_term;
    std::vector<Term> terms;
  };

  SymbolEvaluator(ContextPtr ctx, const GnsTruncation &tr);

  Compiled compile(const Symbol &s);
  /// Coefficient vector of s(xi, lambda), i.e. rep(s(xi, lambda)) e_1, in the eigenbasis.
  CVec apply(const Compiled &c, double x1, double x2, double lam) const;
  CVec apply(const Symbol &s, double x1, double x2, double lam);
  /// Back to the monomial basis.
  CVec to_standard(const CVec &w) const { return W_ * w; }
  /// Row r with trace0(a X) = r . w for X e_1 = W w.
  CVec probe_row(const TorusElement &a) const;
  const GnsTruncation &trunc() const { return tr_; }

 private:
  const CMat &matrix(int id);

  ContextPtr ctx_;
  GnsTruncation tr_;
  CMat W_;
  RVec kappa_;
  CVec e1_;
  std::map<int, CMat> mats_;
};

struct HomogeneityCheck {
  std::string name;
  int declared = 0;
  double measured = 0.0;
  double residual = 0.0;  // max over r in {2,3} of |s(r xi, r^2 lam) - r^d s(xi, lam)| / |r^d s(xi, lam)|
  bool pass = false;
};
HomogeneityCheck homogeneity_check(const std::string &name, const Symbol &s, int declared, SymbolEvaluator &ev,
                                   double x1 = 0.7, double x2 = -0.4, double lam = -1.0, double tol = 1e-9);
std::vector<HomogeneityCheck> homogeneity_report(const Parametrix &par, SymbolEvaluator &ev);

struct SlopeFit {
  std::vector<double> r;
  std::vector<double> residual;
  double slope = 0.0;
};
/// |compose(sigma(P - lambda), b2 + b3 + b4)(r xi, r^2 lam) - 1| against r.
SlopeFit parametrix_residual_slope(const Parametrix &par, SymbolEvaluator &ev, const std::vector<double> &rs,
                                   double x1 = 0.6, double x2 = 0.3, double lam = -1.0);
/// log-log slope of |b_{-4}(r xi, -1) e_1| for r in [r0, r1].
double b4_radial_slope(const Parametrix &par, SymbolEvaluator &ev, double r0 = 10.0, double r1 = 100.0);

struct QuadratureConfig {
  int angles = 32;
  double R = 200.0;  // outer cutoff; |xi|^{-4} tail added analytically beyond it
  double abs_tol = 1e-11;
  double rel_tol = 1e-9;
  int max_intervals = 200;
  double max_tail = 1e-4;  // relative to the integral
};

/// Sign of the contour integral and normalisation of the xi measure.
struct FrozenConventions {
  int contour_sign = 1;
  double plancherel = 1.0;  // dxi = plancherel * Lebesgue
  std::string source = "built-in";
};

struct A2Integration {
  std::vector<double> values;  // one per probe
  double quadrature_error = 0.0;
  double tail = 0.0;
  int evaluations = 0;
};
A2Integration a2_by_integration(const Parametrix &par, const std::vector<TorusElement> &probes, SymbolEvaluator &ev,
                                const QuadratureConfig &q = {}, const FrozenConventions &conv = {});
/// Same polar quadrature on xi -> e^{-|eta|^2}; pi / Im tau for the Lebesgue measure.
double flat_a0_by_integration(cplx tau, const QuadratureConfig &q = {});
/// (1/2 pi i) of the integral of e^{-t lambda} (r - lambda)^{-1} over a circle around r, traversed clockwise.
cplx contour_identity(double t, double r);

nlohmann::json to_json(const HomogeneityCheck &c);

}  // namespace nct
