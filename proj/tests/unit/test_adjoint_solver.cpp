#include <doctest.h>

#include <vector>

#include "pencil/adjoint_solver.hpp"
#include "pencil/oracle.hpp"

using namespace pencil;

namespace {

PotentialCoefficients mixed_m2() {
  std::vector<CoefficientEntry> e{{0, 0, 1, 0.1}, {1, 1, 2, cplx(0.0, 0.05)}, {2, 1, 1, -0.07}, {1, 0, 3, 0.02}};
  return build_potential(2, e);
}

}  // namespace

TEST_CASE("zero potential adjoint solutions are pure exponentials") {
  for (int m = 1; m <= 3; ++m) {
    auto r = solve_adjoint_coefficients(build_potential(m, {}), 5);
    const cplx k{0.3, -0.8};
    for (int s = 0; s < 2 * m; ++s) {
      const cplx lam = -I * k * omega(m, s);
      for (int d = 0; d <= 2 * m; ++d)
        CHECK(std::abs(eval_adjoint(r, s, 1.1, k, d) - ipow(lam, d) * std::exp(lam * 1.1)) < 1e-14);
    }
  }
}

TEST_CASE("adjoint denominators carry the flipped sign") {
  auto r = solve_adjoint_coefficients(build_potential(1, std::vector<CoefficientEntry>{{0, 0, 1, 0.3}}), 4);
  // i n - k w_0 (1 - w_1) = i - 2k vanishes at k = i/2
  CHECK(std::abs(r.pole_location(0, 1, 1) - cplx(0.0, 0.5)) < 1e-15);
  CHECK(std::abs(r.pole(0, 1, 1, 1) - 0.3 * I) < 1e-12);
}

TEST_CASE("m = 1 adjoint equals the pencil equation") {
  std::vector<CoefficientEntry> e{{0, 0, 1, 0.3}, {0, 1, 1, 0.1}};
  auto p = build_potential(1, e);
  auto v = solve_coefficients(p, 20);
  auto r = solve_adjoint_coefficients(p, 20);
  // phi_0 = e^{-ikx}(...) solves the same equation as f_1
  for (const cplx k : {cplx(0.3, 0.2), cplx(-0.8, 0.6), cplx(1.2, -0.4)})
    for (double x : {0.0, 0.6, 2.0})
      for (int d = 0; d <= 2; ++d) {
        CHECK(std::abs(eval_adjoint(r, 0, x, k, d) - eval_solution(v, 1, x, k, d)) < 1e-12);
        CHECK(std::abs(eval_adjoint(r, 1, x, k, d) - eval_solution(v, 0, x, k, d)) < 1e-12);
      }
}

TEST_CASE("adjoint residual") {
  auto p = mixed_m2();
  auto r = solve_adjoint_coefficients(p, 25);
  for (const cplx k : {cplx(0.3, 0.2), cplx(-0.7, 0.45), cplx(1.1, -0.3)})
    for (int s = 0; s < 4; ++s) {
      oracle::Evaluator z = [&](double x, int d) { return eval_adjoint(r, s, x, k, d); };
      for (double x = 0.0; x <= 5.0; x += 0.5) {
        const double scale = std::abs(std::exp(-I * k * omega(2, s) * x)) * std::max(1.0, std::norm(std::norm(k)));
        CHECK(std::abs(oracle::residual_adjoint(p, z, x, k)) < 1e-10 * scale);
        // the adjoint solution is not a solution of the pencil equation itself
      }
    }
  const cplx k{0.3, 0.2};
  oracle::Evaluator z = [&](double x, int d) { return eval_adjoint(r, 0, x, k, d); };
  CHECK(std::abs(oracle::residual_l(p, z, 0.3, k)) > 1e-4);
}

TEST_CASE("bilinear identity between special and adjoint solutions") {
  const int m = 2;
  auto p = mixed_m2();
  auto v = solve_coefficients(p, 25);
  auto r = solve_adjoint_coefficients(p, 25);
  for (const cplx k : {cplx(0.35, 0.15), cplx(-0.6, 0.5)})
    for (double x : {0.0, 0.8, 2.4}) {
      for (int j = 0; j < 2 * m; ++j) {
        cplx sum{};
        for (int s = 0; s < 2 * m; ++s) {
          const cplx kappa = I * omega(m, s) / (2.0 * m * ipow(k, 2 * m - 1));
          sum += kappa * eval_adjoint(r, s, x, k) * eval_solution(v, s, x, k, j);
        }
        const cplx want = j == 2 * m - 1 ? cplx(1.0) : cplx{};
        CHECK(std::abs(sum - want) < 1e-9);
      }
    }
}
