#pragma once

#include <span>
#include <vector>

#include "pencil/pencil_model.hpp"
#include "pencil/symbol_algebra.hpp"

namespace pencil {

/// Special solutions f_tau ~ e^{i k w_tau x} solve the pencil equation;
/// adjoint solutions phi_s ~ e^{-i k w_s x} solve its formal adjoint.
enum class SeriesKind { Special, Adjoint };

inline int kind_sign(SeriesKind kind) { return kind == SeriesKind::Special ? 1 : -1; }

/// Truncated coefficient tables of an exponential series
///   y_tau(x, k) = e^{lambda x} sum_{alpha=0}^{A} c_alpha(k) e^{-alpha x},
///   lambda = sign * i k w_tau,
/// where every c_alpha is a PolePolynomial with constant polynomial part
/// (alpha >= 1) and simple poles (n <= alpha, j) on the lattice.
class SeriesTable {
 public:
  SeriesTable(PencilOrder order, SeriesKind kind, int truncation, std::size_t fingerprint,
              std::vector<std::vector<PolePolynomial>> levels);

  PencilOrder order() const noexcept { return order_; }
  int m() const noexcept { return order_.m(); }
  SeriesKind kind() const noexcept { return kind_; }
  int truncation() const noexcept { return truncation_; }
  std::size_t fingerprint() const noexcept { return fingerprint_; }
  const PoleLattice& lattice() const noexcept { return lattice_; }

  const PolePolynomial& level(int tau, int alpha) const;
  std::span<const PolePolynomial> levels(int tau) const;

  /// V_alpha^{(tau)} (R_alpha^{(s)} for adjoint tables).
  cplx constant(int tau, int alpha) const;
  /// V_{n alpha}^{(j, tau)} (R_{n alpha}^{(j, s)} for adjoint tables).
  cplx pole(int tau, int n, int j, int alpha) const;

  /// Pole location of the series for (tau; n, j).
  cplx pole_location(int tau, int n, int j) const;
  double pole_guard() const noexcept { return 1e-3 * lattice_.spacing(); }
  /// Throws NearPole if k is within the guard of a lattice pole with n <= A.
  void check_pole_guard(int tau, cplx k) const;
  /// Distance from k to the nearest lattice pole (n <= A) of series tau.
  double distance_to_poles(int tau, cplx k) const;

  /// d-th x-derivative of the truncated series; guarded against poles.
  cplx evaluate(int tau, double x, cplx k, int d = 0) const;
  /// Same without the pole guard (for contour work near excluded disks).
  cplx evaluate_unguarded(int tau, double x, cplx k, int d = 0) const;
  /// Derivatives 0..count-1 at one point, sharing the level evaluations; guarded.
  std::vector<cplx> evaluate_jet(int tau, double x, cplx k, int count) const;
  /// Residue in k at the lattice pole (n, j), d-th x-derivative.
  cplx residue(int tau, int n, int j, double x, int d = 0) const;

 private:
  PencilOrder order_;
  SeriesKind kind_;
  int truncation_;
  std::size_t fingerprint_;
  PoleLattice lattice_;
  std::vector<std::vector<PolePolynomial>> levels_;
};

/// Per-level coefficient-matching machinery shared by the forward, adjoint and
/// inverse computations.
namespace engine {

PoleContext context(int m, SeriesKind kind, int tau);

/// D_alpha(k) = (-1)^m (lambda - alpha)^{2m} - k^{2m}, degree 2m-1.
ComplexPolynomial level_divisor(int m, SeriesKind kind, int tau, int alpha);

/// Polynomial factor multiplying p_{gamma s n} c_r(k), with alpha = r + n:
///   special: k^s (i k w_tau - r)^gamma,     adjoint: k^s (alpha + i k w_tau)^gamma.
ComplexPolynomial source_factor(int m, SeriesKind kind, int tau, int gamma, int s, int r, int alpha);

/// (D_alpha(k) - D_alpha(root_{nj})) / L_{nj}(k); for n = alpha this is D_alpha / L_{alpha j}.
ComplexPolynomial divisor_quotient(int m, SeriesKind kind, int tau, int n, int j, int alpha);

/// N_alpha = -sum_n sum_{gamma,s} p_{gamma s n} source_factor * c_{alpha-n}, built with
/// pp_mul_split. `lower` holds c_0 .. c_{alpha-1} (at least).
PolePolynomial level_rhs(const PotentialCoefficients& potential, SeriesKind kind, int tau,
                         std::span<const PolePolynomial> lower, int alpha);

/// Resonance tolerance on |D_alpha(root_{nj})|.
inline constexpr double kResonanceTolerance = 1e-10;

/// Off-diagonal residue-numerators V_{n alpha} (n < alpha) from the pole part of N_alpha.
PolePolynomial::Poles offdiagonal_poles(int m, SeriesKind kind, int tau, const PolePolynomial& rhs,
                                        int alpha);

/// Solves D_alpha c_alpha = N_alpha: off-diagonal poles first, then the constant
/// from the k^{2m-1} coefficient, then the (2m-1) diagonal residue-numerators.
PolePolynomial solve_level(int m, SeriesKind kind, int tau, const PolePolynomial& rhs, int alpha);

/// Polynomial-part coefficients (degrees 0..2m-1) of D_alpha c - N_alpha for a
/// candidate c whose off-diagonal poles satisfy the pole matching.
std::vector<cplx> level_identity_residual(int m, SeriesKind kind, int tau, const PolePolynomial& candidate,
                                          const PolePolynomial& rhs, int alpha);

/// Runs the level recursion for all tau up to the truncation.
SeriesTable solve_table(const PotentialCoefficients& potential, SeriesKind kind, int truncation);

}  // namespace engine

}  // namespace pencil
