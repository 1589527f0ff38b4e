#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <vector>

#include "pencil/pencil_model.hpp"

namespace pencil {

/// Binomial coefficient C_n^k = n! / ((n-k)! k!) as a double.
double binomial(int n, int k);

/// Polynomial in k with complex coefficients, ascending degree.
/// Trailing exact zeros are trimmed; the empty list is the zero polynomial.
class ComplexPolynomial {
 public:
  ComplexPolynomial() = default;
  explicit ComplexPolynomial(std::vector<cplx> coefficients);
  ComplexPolynomial(std::initializer_list<cplx> coefficients);

  static ComplexPolynomial constant(cplx c);
  static ComplexPolynomial monomial(int degree, cplx c = 1.0);
  /// (a + b k)^power
  static ComplexPolynomial linear_power(cplx a, cplx b, int power);

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  /// Coefficient of k^i; zero beyond the degree.
  cplx coeff(int i) const noexcept;
  const std::vector<cplx>& coefficients() const noexcept { return c_; }

  cplx operator()(cplx k) const noexcept;
  /// sum |a_i| |k|^i, the natural magnitude scale of an evaluation at k.
  double scale_at(cplx k) const noexcept;

  ComplexPolynomial& operator+=(const ComplexPolynomial& o);
  ComplexPolynomial& operator-=(const ComplexPolynomial& o);
  ComplexPolynomial& operator*=(cplx s);

  friend ComplexPolynomial operator+(ComplexPolynomial a, const ComplexPolynomial& b) { return a += b; }
  friend ComplexPolynomial operator-(ComplexPolynomial a, const ComplexPolynomial& b) { return a -= b; }
  friend ComplexPolynomial operator*(ComplexPolynomial a, cplx s) { return a *= s; }
  friend ComplexPolynomial operator*(cplx s, ComplexPolynomial a) { return a *= s; }
  friend ComplexPolynomial operator*(const ComplexPolynomial& a, const ComplexPolynomial& b);

 private:
  void normalize();
  std::vector<cplx> c_;
};

/// Relative divisibility tolerance for poly_div_at_root.
inline constexpr double kDivisionTolerance = 1e-10;

/// Exact quotient q with q(k) * slope * (k - root) = numerator(k).
/// Throws NotDivisible when numerator(root) is not negligible.
ComplexPolynomial poly_div_at_root(const ComplexPolynomial& numerator, cplx root, cplx slope);

struct PoleKey {
  int n = 0;
  int j = 0;
  auto operator<=>(const PoleKey&) const = default;
};

/// Fixes the family of linear divisors  i n + sign * k * omega_tau (1 - omega_j).
/// sign = +1 gives the divisors of the special solutions f_tau, sign = -1 those
/// of the adjoint solutions phi_tau.
struct PoleContext {
  int m = 1;
  int tau = 0;
  int sign = 1;

  cplx slope(int j) const;
  cplx root(int n, int j) const;
  cplx divisor(int n, int j, cplx k) const;
};

/// poly(k) + sum_{(n,j)} b_{nj} / (i n + sign k omega_tau (1 - omega_j)).
class PolePolynomial {
 public:
  using Poles = std::map<PoleKey, cplx>;

  explicit PolePolynomial(PoleContext ctx, ComplexPolynomial poly = {}, Poles poles = {});

  const PoleContext& context() const noexcept { return ctx_; }
  const ComplexPolynomial& poly() const noexcept { return poly_; }
  const Poles& poles() const noexcept { return poles_; }
  cplx pole(int n, int j) const noexcept;
  int max_pole_n() const noexcept;

  void set_poly(ComplexPolynomial p) { poly_ = std::move(p); }
  /// Adds to the residue-numerator of (n, j); exact zeros are not stored.
  void add_pole(int n, int j, cplx b);

  cplx operator()(cplx k) const;

  PolePolynomial& operator+=(const PolePolynomial& o);
  PolePolynomial& operator*=(cplx s);

 private:
  PoleContext ctx_;
  ComplexPolynomial poly_;
  Poles poles_;
};

/// f(k) * g(k) re-expressed as a PolePolynomial, using
///   b g(k) / L(k) = b g(root) / L(k) + b (g(k) - g(root)) / L(k).
PolePolynomial pp_mul_split(const PolePolynomial& f, const ComplexPolynomial& g);

/// [(i alpha + k w_tau)^{2m} - k^{2m} - ((i alpha + k_{nj})^{2m} - k_{nj}^{2m})]
///   / (i n + k w_tau (1 - w_j));
/// its coefficient of k^gamma is C_{j tau gamma}(n, alpha).
ComplexPolynomial quotient_main(int m, int n, int j, int tau, int alpha);

/// [k^s (i k w_tau - t)^gamma - k_{njtau}^s (i k_{nj} - t)^gamma] / (i n + k w_tau (1 - w_j)).
ComplexPolynomial quotient_general(int m, int n, int j, int tau, int s, int gamma, int t);

}  // namespace pencil
