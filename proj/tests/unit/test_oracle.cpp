#include <doctest.h>

#include <vector>

#include "closed_form.hpp"
#include "pencil/adjoint_solver.hpp"
#include "pencil/errors.hpp"
#include "pencil/forward_solver.hpp"
#include "pencil/oracle.hpp"

using namespace pencil;

namespace {

std::vector<double> grid(double lo, double hi, int pts) {
  std::vector<double> g;
  for (int i = 0; i < pts; ++i) g.push_back(lo + (hi - lo) * i / (pts - 1));
  return g;
}

PotentialCoefficients one_mode(double c) {
  return build_potential(1, std::vector<CoefficientEntry>{{0, 0, 1, c}});
}

}  // namespace

TEST_CASE("residual of pure exponentials vanishes for the zero potential") {
  for (int m = 1; m <= 3; ++m) {
    auto p = build_potential(m, {});
    const cplx k{0.6, 0.3};
    for (int tau = 0; tau < 2 * m; ++tau) {
      const cplx lam = I * k * omega(m, tau);
      oracle::Evaluator f = [&](double x, int d) { return ipow(lam, d) * std::exp(lam * x); };
      CHECK(std::abs(oracle::residual_l(p, f, 0.7, k)) < 1e-14);
    }
  }
}

TEST_CASE("one-mode residual at A = 25 and the effect of dropping a level") {
  auto p = one_mode(0.3);
  const cplx k{1.0, 1.0};
  auto v25 = solve_coefficients(p, 25);
  oracle::Evaluator f = [&](double x, int d) { return eval_solution(v25, 0, x, k, d); };
  for (double x = 0.0; x <= 5.0; x += 0.25) CHECK(std::abs(oracle::residual_l(p, f, x, k)) <= 1e-10);

  // truncating at A = 3 leaves the source term p c_3 e^{-(4 - ik)x} uncancelled
  auto v3 = solve_coefficients(p, 3);
  oracle::Evaluator g = [&](double x, int d) { return eval_solution(v3, 0, x, k, d); };
  for (double x : {0.0, 1.0, 2.0}) {
    const cplx dropped = 0.3 * closed_form::level(0.3, 0.0, 3, k) * std::exp((I * k - 4.0) * x);
    CHECK(std::abs(oracle::residual_l(p, g, x, k)) == doctest::Approx(std::abs(dropped)).epsilon(1e-8));
  }
}

TEST_CASE("integrate_ode reproduces pure exponentials") {
  auto p = build_potential(2, {});
  const cplx k{0.2, 0.15};
  oracle::OdeOptions opt;
  for (int tau = 0; tau < 4; ++tau) {
    auto sample = oracle::integrate_ode(p, k, tau, grid(0.0, 5.0, 11), opt);
    const cplx lam = I * k * omega(2, tau);
    oracle::Evaluator exact = [&](double x, int d) { return ipow(lam, d) * std::exp(lam * x); };
    auto rep = oracle::compare(exact, sample);
    CHECK(rep.max_rel < 1e3 * opt.rtol);
    CHECK(rep.max_abs_per_derivative.size() == 4);
  }
}

TEST_CASE("integrate_ode agrees with the closed-form series") {
  auto p = one_mode(0.3);
  const cplx k{1.0, 1.0};
  auto v = solve_coefficients(p, 25);
  auto sample = oracle::integrate_ode(p, k, 0, grid(0.0, 5.0, 21));
  oracle::Evaluator f = [&](double x, int d) { return eval_solution(v, 0, x, k, d); };
  CHECK(oracle::compare(f, sample).max_rel < 1e-6);
  CHECK(sample.steps > 0);
}

TEST_CASE("tightening rtol reduces the error against the closed form") {
  auto p = one_mode(0.3);
  const cplx k{1.0, 1.0};
  oracle::Evaluator exact = [&](double x, int d) { return closed_form::f0(0.3, 0.0, 40, x, k, d); };
  oracle::OdeOptions loose;
  loose.rtol = 1e-6;
  loose.atol = 1e-9;
  oracle::OdeOptions tight = loose;
  tight.rtol = 1e-8;
  tight.atol = 1e-11;
  const auto g = grid(0.0, 5.0, 11);
  const double e_loose = oracle::compare(exact, oracle::integrate_ode(p, k, 0, g, loose)).max_rel;
  const double e_tight = oracle::compare(exact, oracle::integrate_ode(p, k, 0, g, tight)).max_rel;
  CHECK(e_tight * 4.0 <= e_loose);
}

TEST_CASE("integrated adjoint solution matches the adjoint series") {
  std::vector<CoefficientEntry> e{{0, 0, 1, 0.1}, {1, 1, 2, cplx(0.0, 0.05)}, {2, 1, 1, -0.07}};
  auto p = build_potential(2, e);
  auto r = solve_adjoint_coefficients(p, 25);
  const cplx k{0.2, 0.1};
  oracle::OdeOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-14;
  opt.x_far = 35.0;
  for (int s = 0; s < 4; ++s) {
    // phi_s ~ e^{-ikw_s x} is recessive at +infinity when Im(k w_s) < 0
    if (std::imag(k * omega(2, s)) > 0.0) continue;
    auto sample = oracle::integrate_ode(p, k, s, grid(0.0, 5.0, 11), opt, oracle::Equation::Adjoint);
    oracle::Evaluator z = [&](double x, int d) { return eval_adjoint(r, s, x, k, d); };
    CHECK(oracle::compare(z, sample).max_rel < 1e-6);
  }
}

TEST_CASE("oracle solution satisfies the equation") {
  // top derivative by an eighth-order difference of y^{(2m-1)} on a fine grid
  auto p = one_mode(0.3);
  const cplx k{1.0, 1.0};
  const double h = 0.01;
  const std::vector<double> g{1.0 - 4 * h, 1.0 - 3 * h, 1.0 - 2 * h, 1.0 - h, 1.0, 1.0 + h, 1.0 + 2 * h, 1.0 + 3 * h, 1.0 + 4 * h};
  oracle::OdeOptions opt;
  auto s = oracle::integrate_ode(p, k, 0, g, opt);
  const double w[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  cplx top{};
  for (int i = 0; i < 9; ++i) top += w[i] * s.values[1][static_cast<std::size_t>(i)];
  top /= h;
  oracle::Evaluator f = [&](double, int d) { return d < 2 ? s.values[static_cast<std::size_t>(d)][4] : top; };
  CHECK(std::abs(oracle::residual_l(p, f, 1.0, k)) <= 10.0 * opt.rtol * std::norm(k) * std::abs(s.values[0][4]));
}

TEST_CASE("compare on identical input") {
  auto p = one_mode(0.3);
  auto sample = oracle::integrate_ode(p, cplx(1.0, 1.0), 0, grid(0.0, 2.0, 5));
  oracle::Evaluator same = [&](double x, int d) {
    for (std::size_t i = 0; i < sample.grid.size(); ++i)
      if (sample.grid[i] == x) return sample.values[static_cast<std::size_t>(d)][i];
    return cplx{};
  };
  auto rep = oracle::compare(same, sample);
  CHECK(rep.max_abs == 0.0);
  CHECK(rep.max_rel == 0.0);
}

TEST_CASE("integrate_ode preconditions") {
  auto p = one_mode(0.3);
  oracle::OdeOptions shortfar;
  shortfar.x_far = 5.0;
  CHECK_THROWS_AS(oracle::integrate_ode(p, cplx(1.0, 1.0), 0, grid(0.0, 5.0, 3), shortfar), ToleranceNotMet);
  CHECK_THROWS_AS(oracle::integrate_ode(p, cplx(1.0, 1.0), 0, {1.0, 0.5}), IndexOutOfRange);
  oracle::OdeOptions budget;
  budget.max_rhs_evaluations = 50;
  CHECK_THROWS_AS(oracle::integrate_ode(p, cplx(1.0, 1.0), 0, grid(0.0, 5.0, 3), budget), StiffnessFailure);
}
