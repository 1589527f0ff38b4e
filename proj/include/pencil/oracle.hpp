#pragma once

#include <functional>
#include <vector>

#include "pencil/pencil_model.hpp"

namespace pencil::oracle {

/// (x, derivative order) -> value; must supply orders 0..2m.
using Evaluator = std::function<cplx(double x, int d)>;

/// Which equation an oracle computation refers to.
enum class Equation { Pencil, Adjoint };

/// l(f)(x, k) = (-1)^m f^{(2m)} + sum_gamma p_gamma(x,k) f^{(gamma)} - k^{2m} f.
cplx residual_l(const PotentialCoefficients& potential, const Evaluator& f, double x, cplx k);

/// (-1)^m Z^{(2m)} + sum_gamma (-1)^gamma [p_gamma Z]^{(gamma)} - k^{2m} Z.
cplx residual_adjoint(const PotentialCoefficients& potential, const Evaluator& z, double x, cplx k);

struct OdeSample {
  std::vector<double> grid;                  // strictly increasing
  std::vector<std::vector<cplx>> values;     // values[d][i], d = 0..2m-1
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double rtol = 0.0;
  double atol = 0.0;
};

struct OdeOptions {
  double x_far = 30.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  std::size_t max_rhs_evaluations = 20'000'000;
};

/// Integrates the 2m-dimensional first-order system from x_far down to 0 on the
/// grid, starting from the pure exponential e^{+-i k w_tau x} and its derivatives.
/// Throws StiffnessFailure (work limit) or ToleranceNotMet (x_far too short for the
/// requested tolerance, or non-finite output).
OdeSample integrate_ode(const PotentialCoefficients& potential, cplx k, int tau, std::vector<double> grid,
                        const OdeOptions& options = {}, Equation equation = Equation::Pencil);

struct ErrorReport {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::vector<double> max_abs_per_derivative;
  std::vector<double> max_rel_per_derivative;
};

/// Pointwise comparison of an evaluator against the sample on its grid.
ErrorReport compare(const Evaluator& series, const OdeSample& sample);

}  // namespace pencil::oracle
