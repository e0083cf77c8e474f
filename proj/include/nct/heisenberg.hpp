#pragma once
// Heisenberg bimodules E(g, theta) = S(R x Z_c) sampled on a periodic grid: actions, inner products,
// the standard connection, oscillator Laplacians, the transpose map and the Morita curvature check.

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "nct/gns.hpp"
#include "nct/linalg.hpp"
#include "nct/nctorus.hpp"

namespace nct {

struct TrivialBimodule : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SectionAliasing : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CutoffTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HeisenbergParams {
  int a = 0, b = -1, c = 1, d = 0;
  double theta = 0.5;

  /// Throws std::invalid_argument unless ad - bc = 1, TrivialBimodule when c = 0.
  static HeisenbergParams make(int a, int b, int c, int d, double theta);
  void validate() const;

  double theta_prime() const { return (a * theta + b) / (c * theta + d); }
  double rank() const { return c * theta + d; }
  int degree() const { return c; }
  double slope() const { return c / rank(); }
  int components() const { return std::abs(c); }
  /// (g^{-1}, theta').
  HeisenbergParams inverse() const;
  /// d^{-1} mod |c|.
  int d_inverse() const;
};

/// G samples of [-L, L) per Z_c component.
struct SectionGrid {
  double L = 12.0;
  int G = 512;
  int comps = 1;

  double step() const { return 2.0 * L / G; }
  double t(int i) const { return -L + i * step(); }
  /// Half-length moved to the nearest multiple of period / 2 so that 2L is a multiple of period.
  static SectionGrid snapped(double L, int G, int comps, double period);
};

struct HeisenbergSection {
  SectionGrid grid;
  CMat values;  // G x comps

  static HeisenbergSection sample(const SectionGrid &g, const std::function<cplx(double, int)> &f);
  /// l2 mass outside [-L/2, L/2] relative to the total.
  double tail_mass() const;
};

/// f(t - s) per component by an FFT phase ramp.
CVec fractional_shift(const CVec &f, double s, double step, double tol = 1e-8);

enum class Generator { One = 1, Two = 2 };

/// f U_j^{power} for the right A_theta action of E(g, theta).
HeisenbergSection act_right(const HeisenbergSection &f, const HeisenbergParams &p, int j, int power = 1);
/// V_j^{power} f for the left A_theta' action.
HeisenbergSection act_left(const HeisenbergSection &f, const HeisenbergParams &p, int j, int power = 1);

cplx l2_inner(const HeisenbergSection &f1, const HeisenbergSection &f2);
/// <f1, f2>_{A_theta}: coefficient (m, n) is <f1, f2 (U_1^m U_2^n)^*>.
TorusElement valued_inner_right(const HeisenbergSection &f1, const HeisenbergSection &f2, const HeisenbergParams &p,
                                cplx tau, int M, double tail_tol = 1e-10);
/// _{A_theta'}<f1, f2>: coefficient (m, n) is <f2, (V_1^m V_2^n)^* f1> / |rank|.
TorusElement valued_inner_left(const HeisenbergSection &f1, const HeisenbergSection &f2, const HeisenbergParams &p,
                               cplx tau, int M, double tail_tol = 1e-10);
/// x f with x in A_theta' acting on the left, f x with x in A_theta acting on the right.
HeisenbergSection apply_left(const TorusElement &x, const HeisenbergSection &f, const HeisenbergParams &p);
HeisenbergSection apply_right(const HeisenbergSection &f, const TorusElement &x, const HeisenbergParams &p);
/// Params of A_theta' with theta' reduced mod 1.
AlgebraParams left_algebra(const HeisenbergParams &p, cplx tau);

/// nabla_1 = d/dt, nabla_2 = 2 pi i mu t.
HeisenbergSection connection(const HeisenbergSection &f, const HeisenbergParams &p, int j);

/// Dense operators on the grid (G * comps square; component blocks in order).
struct ModuleOperators {
  SectionGrid grid;
  CMat D;        // d/dt
  CMat T;        // multiplication by t
  CMat V1, V2;   // left action generators
  CMat dE;       // nabla_1 + conj(tau) nabla_2
};
ModuleOperators module_operators(const HeisenbergParams &p, cplx tau, const SectionGrid &g);
/// Left action of x on the grid, x in A_theta' (V monomials).
CMat left_action_matrix(const TorusElement &x, const ModuleOperators &ops);

/// rank^2 k dE dE^* k with k = exp(rep(h)/2) through the left action; h empty gives the flat operator.
CMat oscillator_laplacian(const HeisenbergParams &p, cplx tau, const ModuleOperators &ops,
                          const std::optional<TorusElement> &h = std::nullopt);

/// kappa = 4 pi mu Im tau; the flat ladder is rank^2 |kappa| (n + s) with s = 1 if kappa > 0 else 0.
double oscillator_kappa(const HeisenbergParams &p, cplx tau);
int oscillator_shift(const HeisenbergParams &p, cplx tau);
/// Lowest eigenvalues of H = -d^2 + 4 pi^2 mu^2 |tau|^2 t^2 - 4 pi i mu Re(tau) t d - 2 pi i mu conj(tau)
/// in a Hermite-function basis of the given size.
RVec hermite_oracle(double mu, cplx tau, int count, int basis = 160);

/// conj(f(rank x, -d^{-1} alpha)) as a section of E(g^{-1}, theta') on the given grid.
HeisenbergSection j_transpose(const HeisenbergSection &f, const HeisenbergParams &p, const SectionGrid &target);
/// Band-limited interpolation of one component at arbitrary points; zero outside [-L, L).
CVec resample(const CVec &f, const SectionGrid &g, const std::vector<double> &points);

struct MoritaProbe {
  std::string name;
  double a0 = 0.0;          // fixed, phi0(a e^{-h}) / (4 pi |rank| Im tau)
  double a2 = 0.0;          // fitted
  double predicted = 0.0;   // |c|(1/2 - s) phi0(a) + phi0(a K_k) / |rank|
  double deviation = 0.0;   // |a2 - predicted| / max(|predicted|, floor)
  double fit_residual = 0.0;
};
struct MoritaReport {
  HeisenbergParams module;  // E' = E(g^{-1}, theta')
  SectionGrid grid;
  int good_levels = 0;  // exact flat ladder levels away from the wrap of [-L, L)
  int edge_modes = 0;   // conformal eigenvectors with most of their mass in |t| > 3L/4, dropped
  double t_min = 0.0, t_max = 0.0;
  std::vector<MoritaProbe> probes;
  double max_deviation = 0.0;
};
/// Heat-trace fit of a2(a, Lap_{E', k}) against the curvature density; g and theta describe E.
MoritaReport morita_curvature_check(const TorusElement &h, const HeisenbergParams &g, cplx tau, double L = 12.0,
                                    int G = 512, const std::vector<TorusElement> &probes = {}, int curvature_N = 16);

/// Fraction of |v|^2 (a grid vector, component blocks in order) in |t| > 3L/4.
double edge_mass(const CVec &v, const SectionGrid &g);

/// Exact heat trace of the flat ladder: |c| e^{-t w s} / (1 - e^{-t w}), w = rank^2 |kappa|.
double flat_oscillator_heat_trace(const HeisenbergParams &p, cplx tau, double t);

nlohmann::json to_json(const MoritaReport &r);

}  // namespace nct
