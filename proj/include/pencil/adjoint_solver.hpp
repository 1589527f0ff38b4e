#pragma once

#include "pencil/forward_solver.hpp"

namespace pencil {

/// Tables {R_alpha^{(s)}, R_{n alpha}^{(j,s)}} of the adjoint solutions
///   phi_s(x,k) = e^{-i k w_s x} + sum_alpha [R_alpha + sum R_{n alpha} / (i n - k w_s (1 - w_j))]
///                e^{(-alpha - i k w_s) x}
/// of (-1)^m Z^{(2m)} + sum_gamma (-1)^gamma [p_gamma Z]^{(gamma)} = k^{2m} Z.
class AdjointCoefficients : public SeriesTable {
 public:
  explicit AdjointCoefficients(SeriesTable table) : SeriesTable(std::move(table)) {}
};

AdjointCoefficients solve_adjoint_coefficients(const PotentialCoefficients& potential,
                                               int truncation = kDefaultTruncation);

cplx eval_adjoint(const AdjointCoefficients& r, int s, double x, cplx k, int d = 0);

}  // namespace pencil
