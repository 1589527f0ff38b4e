#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pencil {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

/// z^p for p >= 0 by repeated squaring (exact for small integer p).
inline cplx ipow(cplx z, int p) {
  cplx r{1.0, 0.0};
  while (p > 0) {
    if (p & 1) r *= z;
    z *= z;
    p >>= 1;
  }
  return r;
}

/// Half-order m of the pencil; the differential order is 2m.
class PencilOrder {
 public:
  explicit PencilOrder(int m);

  int m() const noexcept { return m_; }
  /// Differential order 2m, also the number of roots of unity.
  int D() const noexcept { return 2 * m_; }

  friend bool operator==(PencilOrder, PencilOrder) = default;

 private:
  int m_;
};

/// omega_j = exp(i j pi / m), canonicalized to exact values near +-1, +-i.
cplx omega(int m, int j);

/// Lattice point k_{n j tau} = -i n / (omega_tau (1 - omega_j)); j = 0 is rejected.
cplx pole_k(int m, int n, int j, int tau);

/// Accessor over the pole lattice of a fixed order.
class PoleLattice {
 public:
  explicit PoleLattice(PencilOrder order);

  PencilOrder order() const noexcept { return order_; }
  cplx operator()(int n, int j, int tau) const;
  /// Smallest distance between distinct lattice points with n <= 2.
  double spacing() const noexcept { return spacing_; }

 private:
  PencilOrder order_;
  std::vector<cplx> unit_;   // k_{1 j tau}, indexed tau * (2m-1) + (j-1)
  double spacing_ = 0.0;
};

struct CoefficientKey {
  int gamma = 0;
  int s = 0;
  int n = 0;
  auto operator<=>(const CoefficientKey&) const = default;
};

struct CoefficientEntry {
  int gamma = 0;
  int s = 0;
  int n = 0;
  cplx value;
};

/// Finite table {p_{gamma s n}} of the coefficients
///   p_gamma(x, k) = sum_s sum_n p_{gamma s n} k^s e^{-n x}.
class PotentialCoefficients {
 public:
  using Table = std::map<CoefficientKey, cplx>;

  /// Zero potential of the given order.
  explicit PotentialCoefficients(PencilOrder order);

  /// Validates index ranges (0 <= gamma <= 2m-2, 0 <= s <= 2m-gamma-1, n >= 1)
  /// and sums duplicate keys. Throws IndexOutOfRange.
  static PotentialCoefficients build(int m, std::span<const CoefficientEntry> entries);

  PencilOrder order() const noexcept { return order_; }
  int m() const noexcept { return order_.m(); }
  /// Largest harmonic n present in the table (0 for the zero potential).
  int max_harmonic() const noexcept { return max_harmonic_; }
  const Table& table() const noexcept { return table_; }
  bool empty() const noexcept { return table_.empty(); }

  cplx at(int gamma, int s, int n) const;
  /// Entries with the given harmonic n, in key order.
  std::vector<CoefficientEntry> harmonic(int n) const;
  std::vector<CoefficientEntry> entries() const;

  /// sum n^{gamma+s} |p_{gamma s n}|
  double weighted_norm() const noexcept { return weighted_norm_; }

  /// p_gamma(x, k). Throws IndexOutOfRange for gamma outside [0, 2m-2].
  cplx eval_coefficient(int gamma, double x, cplx k) const;

  PotentialCoefficients scaled(cplx factor) const;

  /// Stable hash of order and table contents.
  std::size_t fingerprint() const noexcept;

  friend bool operator==(const PotentialCoefficients&, const PotentialCoefficients&) = default;

 private:
  PencilOrder order_;
  Table table_;
  int max_harmonic_ = 0;
  double weighted_norm_ = 0.0;
};

/// Valid (gamma, s) pairs for order m, in (gamma, s) order.
std::vector<std::pair<int, int>> coefficient_slots(int m);

PotentialCoefficients build_potential(int m, std::span<const CoefficientEntry> entries);

}  // namespace pencil
