#include "pencil/oracle.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "pencil/errors.hpp"

// The oracle only reads the coefficient table; it shares no code with the
// series solvers.

namespace pencil::oracle {

namespace {

double choose(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// r-th x-derivative of p_gamma(x, k).
cplx coefficient_derivative(const PotentialCoefficients& p, int gamma, int r, double x, cplx k) {
  cplx sum{};
  for (const auto& [key, value] : p.table()) {
    if (key.gamma != gamma) continue;
    const double dn = static_cast<double>(key.n);
    sum += value * ipow(k, key.s) * std::pow(-dn, r) * std::exp(-dn * x);
  }
  return sum;
}

/// Coefficients a_q(x) with the equation written as
///   (-1)^m y^{(2m)} + sum_{q <= 2m-2} a_q(x) y^{(q)} - k^{2m} y = 0.
std::vector<cplx> lower_coefficients(const PotentialCoefficients& p, Equation eq, double x, cplx k) {
  const int top = 2 * p.m() - 2;
  std::vector<cplx> a(static_cast<std::size_t>(top + 1));
  for (int gamma = 0; gamma <= top; ++gamma) {
    if (eq == Equation::Pencil) {
      a[static_cast<std::size_t>(gamma)] += coefficient_derivative(p, gamma, 0, x, k);
      continue;
    }
    // (-1)^gamma [p_gamma Z]^{(gamma)} by Leibniz
    const double sign = gamma % 2 == 0 ? 1.0 : -1.0;
    for (int q = 0; q <= gamma; ++q)
      a[static_cast<std::size_t>(q)] += sign * choose(gamma, q) * coefficient_derivative(p, gamma, gamma - q, x, k);
  }
  return a;
}

cplx residual(const PotentialCoefficients& p, Equation eq, const Evaluator& f, double x, cplx k) {
  const int m = p.m();
  const double parity = m % 2 == 0 ? 1.0 : -1.0;
  const auto a = lower_coefficients(p, eq, x, k);
  cplx out = parity * f(x, 2 * m) - ipow(k, 2 * m) * f(x, 0);
  for (std::size_t q = 0; q < a.size(); ++q)
    if (a[q] != cplx{}) out += a[q] * f(x, static_cast<int>(q));
  return out;
}

}  // namespace

cplx residual_l(const PotentialCoefficients& potential, const Evaluator& f, double x, cplx k) {
  return residual(potential, Equation::Pencil, f, x, k);
}

cplx residual_adjoint(const PotentialCoefficients& potential, const Evaluator& z, double x, cplx k) {
  return residual(potential, Equation::Adjoint, z, x, k);
}

OdeSample integrate_ode(const PotentialCoefficients& potential, cplx k, int tau, std::vector<double> grid,
                        const OdeOptions& options, Equation equation) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<cplx>;

  const int m = potential.m();
  const int dim = 2 * m;
  if (tau < 0 || tau >= dim) throw IndexOutOfRange("tau outside [0, 2m-1]");
  if (grid.empty()) throw IndexOutOfRange("empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw IndexOutOfRange("grid must be strictly increasing");
  if (grid.front() < 0.0 || grid.back() > options.x_far)
    throw IndexOutOfRange("grid must lie in [0, x_far]");

  double tail = 0.0;
  for (const auto& [key, value] : potential.table())
    tail += std::abs(value) * std::pow(std::abs(k), key.s) * std::exp(-key.n * options.x_far);
  if (tail > options.rtol) {
    std::ostringstream msg;
    msg << "potential tail " << tail << " at x_far = " << options.x_far << " exceeds rtol " << options.rtol;
    throw ToleranceNotMet(msg.str());
  }

  const double parity = m % 2 == 0 ? 1.0 : -1.0;
  const cplx k2m = ipow(k, dim);
  const double sgn = equation == Equation::Pencil ? 1.0 : -1.0;
  const cplx lambda = sgn * I * k * omega(m, tau);

  std::size_t evaluations = 0;
  auto rhs = [&](const State& y, State& dy, double x) {
    if (++evaluations > options.max_rhs_evaluations)
      throw StiffnessFailure("right-hand-side evaluation budget exhausted");
    const auto a = lower_coefficients(potential, equation, x, k);
    for (int d = 0; d + 1 < dim; ++d) dy[static_cast<std::size_t>(d)] = y[static_cast<std::size_t>(d + 1)];
    cplx top = k2m * y[0];
    for (std::size_t q = 0; q < a.size(); ++q) top -= a[q] * y[q];
    dy[static_cast<std::size_t>(dim - 1)] = parity * top;
    for (int d = 0; d < dim; ++d) dy[static_cast<std::size_t>(d)] -= lambda * y[static_cast<std::size_t>(d)];
  };

  // The state is u = e^{-lambda x} (y, y', ..., y^{(2m-1)}), which keeps the
  // magnitudes O(1) so that atol stays meaningful.
  State y(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) y[static_cast<std::size_t>(d)] = ipow(lambda, d);

  // descending times: x_far, grid reversed
  std::vector<double> times;
  times.reserve(grid.size() + 1);
  times.push_back(options.x_far);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it)
    if (*it < options.x_far) times.push_back(*it);

  OdeSample sample;
  sample.grid = grid;
  sample.rtol = options.rtol;
  sample.atol = options.atol;
  sample.values.assign(static_cast<std::size_t>(dim), std::vector<cplx>(grid.size()));

  std::size_t filled = 0;
  auto observer = [&](const State& s, double x) {
    // index into the increasing grid
    auto pos = std::lower_bound(grid.begin(), grid.end(), x - 1e-14 * std::max(1.0, std::abs(x)));
    if (pos == grid.end() || std::abs(*pos - x) > 1e-12 * std::max(1.0, std::abs(x))) return;
    const auto i = static_cast<std::size_t>(pos - grid.begin());
    const cplx e = std::exp(lambda * *pos);
    for (int d = 0; d < dim; ++d) sample.values[static_cast<std::size_t>(d)][i] = s[static_cast<std::size_t>(d)] * e;
    ++filled;
  };

  auto stepper = odeint::make_dense_output(options.atol, options.rtol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = -std::min(0.01, options.x_far / 100.0);
  sample.steps = odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0, observer);

  // dopri5 is FSAL: one initial evaluation, six per attempted step.
  const std::size_t attempts = evaluations > 0 ? (evaluations - 1) / 6 : 0;
  sample.rejected_steps = attempts > sample.steps ? attempts - sample.steps : 0;

  if (filled < grid.size() && grid.back() < options.x_far)
    throw ToleranceNotMet("dense output did not reach every grid point");
  if (grid.back() == options.x_far) {
    const cplx e = std::exp(lambda * options.x_far);
    for (int d = 0; d < dim; ++d) sample.values[static_cast<std::size_t>(d)].back() = ipow(lambda, d) * e;
  }
  for (const auto& row : sample.values)
    for (const auto& v : row)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw ToleranceNotMet("non-finite value in oracle solution");
  return sample;
}

ErrorReport compare(const Evaluator& series, const OdeSample& sample) {
  ErrorReport report;
  const std::size_t dims = sample.values.size();
  report.max_abs_per_derivative.assign(dims, 0.0);
  report.max_rel_per_derivative.assign(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t i = 0; i < sample.grid.size(); ++i) {
      const cplx ref = sample.values[d][i];
      const cplx got = series(sample.grid[i], static_cast<int>(d));
      const double abs_err = std::abs(got - ref);
      const double rel_err = abs_err / std::max(std::abs(ref), 1e-300);
      report.max_abs_per_derivative[d] = std::max(report.max_abs_per_derivative[d], abs_err);
      report.max_rel_per_derivative[d] = std::max(report.max_rel_per_derivative[d], rel_err);
    }
    report.max_abs = std::max(report.max_abs, report.max_abs_per_derivative[d]);
    report.max_rel = std::max(report.max_rel, report.max_rel_per_derivative[d]);
  }
  return report;
}

}  // namespace pencil::oracle
