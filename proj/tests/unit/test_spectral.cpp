#include <doctest.h>

#include <boost/math/tools/roots.hpp>
#include <random>
#include <vector>

#include "closed_form.hpp"
#include "pencil/errors.hpp"
#include "pencil/oracle.hpp"
#include "pencil/spectral.hpp"

using namespace pencil;

namespace {

PotentialCoefficients one_mode(double c) {
  return build_potential(1, std::vector<CoefficientEntry>{{0, 0, 1, c}});
}

PotentialCoefficients mixed_m2() {
  std::vector<CoefficientEntry> e{{0, 0, 1, 0.08}, {1, 1, 2, cplx(0.0, 0.04)}, {2, 1, 1, -0.05}, {1, 0, 3, 0.02},
                                  {0, 3, 1, cplx(0.01, 0.01)}};
  return build_potential(2, e);
}

cplx vandermonde(int m, cplx k, const std::vector<int>& cols) {
  cplx out{1.0, 0.0};
  for (std::size_t a = 0; a < cols.size(); ++a)
    for (std::size_t b = a + 1; b < cols.size(); ++b) out *= I * k * (omega(m, cols[b]) - omega(m, cols[a]));
  return out;
}

/// c < 0 with sum_alpha c^alpha / prod_beta (beta^2 + 2 kappa beta) = 0, i.e. W(i kappa) = 0.
double planted_coupling(double kappa) {
  auto w = [kappa](double c) { return std::real(closed_form::wronskian(c, 40, I * kappa)); };
  double hi = -0.1;
  double lo = hi;
  while (w(lo) > 0.0) lo -= 0.1;
  auto r = boost::math::tools::bisect(w, lo, lo + 0.1, boost::math::tools::eps_tolerance<double>(52));
  return 0.5 * (r.first + r.second);
}

}  // namespace

TEST_CASE("sector ordering") {
  SUBCASE("m = 1 upper half-plane") {
    auto ctx = sector_ordering(1, std::polar(1.0, M_PI / 4));
    CHECK(ctx.order == std::vector<int>{1, 0});
    CHECK(ctx.decaying == std::vector<int>{0});
    CHECK(ctx.growing == std::vector<int>{1});
  }
  SUBCASE("m = 2") {
    auto ctx = sector_ordering(2, std::polar(1.0, M_PI / 8));
    CHECK(ctx.order == std::vector<int>{3, 2, 0, 1});
    CHECK(ctx.decaying == std::vector<int>{0, 1});
    CHECK(ctx.sector == 0);
  }
  SUBCASE("critical rays") {
    CHECK_THROWS_AS(sector_ordering(1, 1.0), OnCriticalRay);
    CHECK_THROWS_AS(sector_ordering(2, std::polar(2.0, M_PI / 4)), OnCriticalRay);
    CHECK_THROWS_AS(sector_ordering(3, std::polar(1.0, M_PI / 6)), OnCriticalRay);
    CHECK_THROWS_AS(sector_ordering(2, 0.0), OnCriticalRay);
  }
  SUBCASE("depends only on arg k") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
    for (int m = 1; m <= 4; ++m)
      for (int i = 0; i < 50; ++i) {
        const cplx k = std::polar(0.7, u(rng));
        auto a = sector_ordering(m, k);
        auto b = sector_ordering(m, 2.0 * k);
        CHECK(a.order == b.order);
        CHECK(a.sector == b.sector);
        CHECK(static_cast<int>(a.decaying.size()) == m);
      }
  }
}

TEST_CASE("sector table") {
  CHECK(sector_count(1) == 2);
  CHECK(sector_count(3) == 12);
  CHECK(sector_info(1, 0).label == "10");
  CHECK(sector_info(1, 1).label == "01");
  CHECK(sector_info(2, 0).label == "3201");
  for (int m = 1; m <= 3; ++m)
    for (int id = 0; id < sector_count(m); ++id) {
      auto info = sector_info(m, id);
      const cplx mid = std::polar(1.3, 0.5 * (info.theta_lo + info.theta_hi));
      CHECK(sector_of(m, mid) == id);
      auto ctx = sector_ordering(m, mid);
      CHECK(ctx.order == info.order);
      CHECK(ctx.decaying == info.decaying);
      // the ordering is constant across the open sector
      const cplx near_lo = std::polar(1.0, info.theta_lo + 1e-6);
      const cplx near_hi = std::polar(1.0, info.theta_hi - 1e-6);
      CHECK(sector_ordering(m, near_lo).order == info.order);
      CHECK(sector_ordering(m, near_hi).order == info.order);
    }
  CHECK_THROWS_AS(sector_info(2, 8), IndexOutOfRange);
}

TEST_CASE("zero-potential Wronskian is a Vandermonde determinant") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int m = 1; m <= 3; ++m) {
    auto v = solve_coefficients(build_potential(m, {}), 25);
    for (int i = 0; i < 100; ++i) {
      const cplx k{u(rng), u(rng)};
      const auto ctx = sector_ordering(m, k);
      const cplx want = vandermonde(m, k, ctx.decaying);
      CHECK(std::abs(wronskian(v, k) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
  auto v1 = solve_coefficients(build_potential(1, {}), 5);
  CHECK(wronskian(v1, cplx(0.3, 0.8)) == cplx(1.0));
  auto v2 = solve_coefficients(build_potential(2, {}), 5);
  const cplx k = std::polar(1.5, M_PI / 8);
  CHECK(std::abs(wronskian(v2, k) - I * k * (omega(2, 1) - omega(2, 0))) < 1e-14);
}

TEST_CASE("one-mode Wronskian and minor") {
  const double c = 0.3;
  auto v = solve_coefficients(one_mode(c), 25);
  for (const cplx k : {cplx(0.4, 0.3), cplx(-1.1, 0.7), cplx(0.2, -0.9)}) {
    const auto ctx = sector_ordering(1, k);
    const cplx w_want = ctx.decaying[0] == 0 ? closed_form::wronskian(c, 25, k) : closed_form::wronskian(c, 25, -k);
    CHECK(std::abs(wronskian(v, k) - w_want) < 1e-12);
    const int s = ctx.growing[0];
    // A_{0,s} = f_s(0, k), with f_1(x, k) = f_0(x, -k)
    const cplx want = s == 1 ? closed_form::wronskian(c, 25, -k) : closed_form::wronskian(c, 25, k);
    CHECK(std::abs(minor_A(v, k, 0, s) - want) < 1e-12);
  }
  auto z = solve_coefficients(build_potential(1, {}), 10);
  CHECK(minor_A(z, cplx(0.3, 0.4), 0, 1) == cplx(1.0));
  CHECK_THROWS_AS(minor_A(z, cplx(0.3, 0.4), 0, 0), IndexOutOfRange);
}

TEST_CASE("replacing a column by itself returns W") {
  auto v = solve_coefficients(mixed_m2(), 20);
  const cplx k = std::polar(0.9, 0.3);
  const auto ctx = sector_ordering(2, k);
  for (int pos = 0; pos < 2; ++pos)
    CHECK(std::abs(minor_A(v, k, ctx.decaying, pos, ctx.decaying[static_cast<std::size_t>(pos)]) - wronskian(v, k)) <
          1e-14);
}

TEST_CASE("W and A satisfy Cauchy-Riemann") {
  auto v = solve_coefficients(mixed_m2(), 20);
  for (const cplx k : {std::polar(0.9, 0.3), std::polar(1.7, 2.0), std::polar(0.6, 4.1)}) {
    const auto ctx = sector_ordering(2, k);
    const double h = 1e-5;
    auto w = [&](cplx z) { return wronskian(v, z, ctx.decaying); };
    auto a = [&](cplx z) { return minor_A(v, z, ctx.decaying, 1, ctx.growing[0]); };
    for (const auto& f : {std::function<cplx(cplx)>(w), std::function<cplx(cplx)>(a)}) {
      const cplx dx = (f(k + h) - f(k - h)) / (2 * h);
      const cplx dy = (f(k + I * h) - f(k - I * h)) / (2.0 * I * h);
      CHECK(std::abs(dx - dy) < 1e-6 * std::max(1.0, std::abs(dx)));
    }
  }
}

TEST_CASE("winding number") {
  const std::vector<cplx> square{cplx(-1, -1), cplx(1, -1), cplx(1, 1), cplx(-1, 1)};
  CHECK(winding_number([](cplx k) { return k; }, square, 1e-14) == 1);
  CHECK(winding_number([](cplx k) { return k * k * k; }, square, 1e-14) == 3);
  CHECK(winding_number([](cplx k) { return 1.0 / (k - 0.2); }, square, 1e-14) == -1);
  CHECK(winding_number([](cplx k) { return k - 3.0; }, square, 1e-14) == 0);
  CHECK_THROWS_AS(winding_number([](cplx k) { return k - 1.0; }, square, 1e-12), ContourThroughZero);
}

TEST_CASE("eigenvalues") {
  SUBCASE("zero potential has none") {
    for (int m = 1; m <= 2; ++m) {
      auto v = solve_coefficients(build_potential(m, {}), 25);
      for (int id = 0; id < sector_count(m); ++id) {
        auto rep = find_eigenvalues(v, id, 0.5, 5.0);
        CHECK(rep.count == 0);
        CHECK(rep.eigenvalues.empty());
      }
    }
  }
  SUBCASE("weak coupling has none") {
    auto v = solve_coefficients(one_mode(0.05), 25);
    for (int id = 0; id < 2; ++id) CHECK(find_eigenvalues(v, id, 0.3, 4.9).count == 0);
  }
  SUBCASE("planted zero") {
    const double kappa = 0.6;
    const double c = planted_coupling(kappa);
    CHECK(c < 0.0);
    CHECK(std::abs(closed_form::wronskian(c, 40, I * kappa)) < 1e-12);
    auto v = solve_coefficients(one_mode(c), 25);
    auto rep = find_eigenvalues(v, 0, 0.3, 2.9);
    REQUIRE(rep.count >= 1);
    double best = 1e9;
    for (const auto& e : rep.eigenvalues) {
      best = std::min(best, std::abs(e.k - I * kappa));
      CHECK(e.residual < 1e-10);
      CHECK(std::imag(e.k) > 0.0);
    }
    CHECK(best < 1e-8);
    // radius jitter leaves the count unchanged
    for (double f : {0.99, 1.01}) CHECK(find_eigenvalues(v, 0, 0.3 * f, 2.9 * f).count == rep.count);
  }
  SUBCASE("lattice pole on the circle") {
    auto v = solve_coefficients(one_mode(0.3), 25);
    // f_1 has its first pole at k = i/2, inside the upper sector
    CHECK_THROWS_AS(find_eigenvalues(v, 0, 0.5, 5.0), PoleOnContour);
    CHECK_THROWS_AS(find_eigenvalues(v, 0, 0.3, 0.2), IndexOutOfRange);
  }
  SUBCASE("m = 2 small potential") {
    auto v = solve_coefficients(mixed_m2(), 25);
    for (int id = 0; id < sector_count(2); ++id) CHECK(find_eigenvalues(v, id, 0.5, 5.0).count == 0);
  }
}

TEST_CASE("residue identity") {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.25 * i);
  SUBCASE("zero potential") {
    auto v = solve_coefficients(build_potential(1, {}), 10);
    auto rep = verify_residue_identity(v, 1, 1, 0, grid);
    CHECK(rep.fitted == cplx{});
    CHECK(rep.expected == cplx{});
    CHECK(rep.spread == 0.0);
  }
  SUBCASE("one-mode") {
    const double c = 0.3;
    auto v = solve_coefficients(one_mode(c), 25);
    auto rep = verify_residue_identity(v, 1, 1, 0, grid);
    CHECK(rep.target == 1);
    CHECK(std::abs(rep.pole - cplx(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(rep.expected - 0.5 * I * c) < 1e-12);
    CHECK(rep.spread < 1e-8);
    CHECK(rep.mismatch < 1e-8);
  }
  SUBCASE("m = 2, all poles up to n = 3") {
    auto v = solve_coefficients(mixed_m2(), 25);
    for (int n = 1; n <= 3; ++n)
      for (int j = 1; j < 4; ++j)
        for (int s = 0; s < 4; ++s) {
          auto rep = verify_residue_identity(v, n, j, s, grid);
          CHECK(rep.spread < 1e-8);
          CHECK(rep.mismatch < 1e-8);
        }
  }
}

TEST_CASE("bilinear identity") {
  auto p = mixed_m2();
  auto v = solve_coefficients(p, 25);
  auto r = solve_adjoint_coefficients(p, 25);
  for (const cplx k : {cplx(0.35, 0.15), cplx(-0.6, 0.5), cplx(0.2, -1.3)})
    for (double x : {0.0, 1.0, 3.0}) CHECK(bilinear_identity_defect(v, r, k, x) < 1e-9);
}

TEST_CASE("resolvent kernel") {
  SUBCASE("zero potential is the Dirichlet Green function") {
    auto p = build_potential(1, {});
    auto v = solve_coefficients(p, 5);
    auto r = solve_adjoint_coefficients(p, 5);
    const cplx k{1.0, 2.0};
    ResolventKernel kernel(v, r, k);
    for (double x : {0.3, 1.0, 2.5})
      for (double t : {0.2, 1.1, 3.0}) {
        const cplx g = I / (2.0 * k) * (std::exp(I * k * std::abs(x - t)) - std::exp(I * k * (x + t)));
        CHECK(std::abs(kernel(x, t) - g) < 1e-14);
      }
  }
  SUBCASE("boundary values and jump") {
    for (const auto& p : {one_mode(0.3), mixed_m2()}) {
      const int m = p.m();
      auto v = solve_coefficients(p, 25);
      auto r = solve_adjoint_coefficients(p, 25);
      const cplx k = std::polar(1.1, 0.5);
      ResolventKernel kernel(v, r, k);
      for (double t : {0.4, 1.3, 2.2})
        for (int d = 0; d < m; ++d) CHECK(std::abs(kernel(0.0, t, d)) < 1e-10);
      const double x = 1.2;
      for (int d = 0; d < 2 * m; ++d) {
        const cplx jump = kernel(x, x - 1e-12, d) - kernel(x, x + 1e-12, d);
        const double want = d == 2 * m - 1 ? (m % 2 == 0 ? 1.0 : -1.0) : 0.0;
        CHECK(std::abs(jump - want) < 1e-9);
      }
    }
  }
  SUBCASE("eigenvalue hit") {
    const double c = planted_coupling(0.6);
    auto p = one_mode(c);
    auto v = solve_coefficients(p, 25);
    auto r = solve_adjoint_coefficients(p, 25);
    auto rep = find_eigenvalues(v, 0, 0.3, 2.9);
    REQUIRE(!rep.eigenvalues.empty());
    CHECK_THROWS_AS(ResolventKernel(v, r, rep.eigenvalues.front().k, 1e-10), EigenvalueHit);
  }
}
