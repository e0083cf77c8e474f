#pragma once
// Smooth noncommutative torus: finitely supported Fourier series in U1^m U2^n.

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace nct {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kPruneTol = 1e-15;

struct ParamsMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotSelfAdjoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct AlgebraParams {
  double theta = 0.5;
  cplx tau{0.0, 1.0};

  void validate() const;
  bool operator==(const AlgebraParams &o) const { return theta == o.theta && tau == o.tau; }
};

struct FourierIndex {
  int m = 0;
  int n = 0;
  auto operator<=>(const FourierIndex &) const = default;
};

/// e^{2 pi i theta k} with k reduced mod 1 in extended precision.
cplx twist_phase(double theta, std::int64_t k);

class TorusElement {
 public:
  using Map = std::map<FourierIndex, cplx>;

  TorusElement() = default;
  explicit TorusElement(const AlgebraParams &p) : params_(p) {}
  TorusElement(const AlgebraParams &p, Map coeffs);

  static TorusElement unit(const AlgebraParams &p, cplx c = 1.0);
  static TorusElement monomial(const AlgebraParams &p, int m, int n, cplx c = 1.0);

  const AlgebraParams &params() const { return params_; }
  const Map &coeffs() const { return coeffs_; }
  cplx coeff(int m, int n) const;
  bool empty() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }

  /// max(|m|,|n|) over the support; 0 for the zero element.
  int support_radius() const;
  double l1_norm() const;
  double sup_norm() const;
  bool is_self_adjoint(double tol = 1e-12) const;

  TorusElement &operator+=(const TorusElement &o);
  TorusElement &operator-=(const TorusElement &o);
  TorusElement &operator*=(cplx s);

  friend TorusElement operator+(TorusElement a, const TorusElement &b) { return a += b; }
  friend TorusElement operator-(TorusElement a, const TorusElement &b) { return a -= b; }
  friend TorusElement operator*(TorusElement a, cplx s) { return a *= s; }
  friend TorusElement operator*(cplx s, TorusElement a) { return a *= s; }
  friend TorusElement operator*(const TorusElement &a, const TorusElement &b);

 private:
  void prune();
  void check_same(const TorusElement &o) const;

  AlgebraParams params_;
  Map coeffs_;
};

TorusElement multiply(const TorusElement &a, const TorusElement &b);
TorusElement star(const TorusElement &a);
cplx trace0(const TorusElement &a);
/// j = 1 multiplies the (m,n) coefficient by m, j = 2 by n.
TorusElement derive(const TorusElement &a, int j);
/// Iterated derivative with multiplier m^g1 n^g2.
TorusElement delta_gamma(const TorusElement &a, int g1, int g2);
TorusElement delta_tau(const TorusElement &a);
TorusElement delta_tau_star(const TorusElement &a);
TorusElement commutator(const TorusElement &a, const TorusElement &b);

/// delta_tau delta_tau^* h; h must be self-adjoint.
TorusElement conformal_laplacian_of(const TorusElement &h);

enum class SquareKind { Re, Im };
TorusElement dirichlet_square(const TorusElement &h, SquareKind kind);

double distance_l1(const TorusElement &a, const TorusElement &b);

/// h = b + b^* with Gaussian b on the box of radius R, rescaled to the given l1 norm.
TorusElement random_self_adjoint(const AlgebraParams &p, int radius, double l1, std::mt19937_64 &rng);
TorusElement random_element(const AlgebraParams &p, int radius, std::mt19937_64 &rng);

nlohmann::json to_json(const TorusElement &a, bool selfadjoint_flag = false);
/// Throws NotSelfAdjoint when the document declares "selfadjoint": true and the check fails.
TorusElement element_from_json(const nlohmann::json &j);
AlgebraParams params_from_json(const nlohmann::json &j);

std::string to_string(const TorusElement &a);

}  // namespace nct
