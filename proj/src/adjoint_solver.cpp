#include "pencil/adjoint_solver.hpp"

namespace pencil {

AdjointCoefficients solve_adjoint_coefficients(const PotentialCoefficients& potential, int truncation) {
  return AdjointCoefficients(engine::solve_table(potential, SeriesKind::Adjoint, truncation));
}

cplx eval_adjoint(const AdjointCoefficients& r, int s, double x, cplx k, int d) {
  return r.evaluate(s, x, k, d);
}

}  // namespace pencil
