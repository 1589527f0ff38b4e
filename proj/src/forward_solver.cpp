#include "pencil/forward_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pencil {

SolutionCoefficients solve_coefficients(const PotentialCoefficients& potential, int truncation) {
  return SolutionCoefficients(engine::solve_table(potential, SeriesKind::Special, truncation));
}

cplx eval_solution(const SolutionCoefficients& v, int tau, double x, cplx k, int d) {
  return v.evaluate(tau, x, k, d);
}

cplx residue_at_pole(const SolutionCoefficients& v, int tau, int n, int j, double x, int d) {
  return v.residue(tau, n, j, x, d);
}

SeriesDiagnostics series_diagnostics(const SeriesTable& table) {
  const int m = table.m();
  const int A = table.truncation();
  SeriesDiagnostics out;
  // increments[series][alpha]
  std::array<std::vector<double>, 3> inc;
  for (auto& v : inc) v.assign(static_cast<std::size_t>(A + 1), 0.0);

  for (int tau = 0; tau < 2 * m; ++tau) {
    SeriesSums sums;
    for (int alpha = 1; alpha <= A; ++alpha) {
      const double a = static_cast<double>(alpha);
      const auto& lvl = table.level(tau, alpha);
      double off = 0.0;
      double diag = 0.0;
      for (const auto& [key, b] : lvl.poles()) {
        if (key.n < alpha)
          off += std::pow(a, 2 * m - 1) * (a - key.n) * std::abs(b) / key.n;
        else
          diag += std::pow(a, 2 * m - 1) * std::abs(b);
      }
      const double cst = std::pow(a, 2 * m) * std::abs(lvl.poly().coeff(0));
      sums.off_diagonal += off;
      sums.diagonal += diag;
      sums.constant += cst;
      inc[0][static_cast<std::size_t>(alpha)] += off;
      inc[1][static_cast<std::size_t>(alpha)] += diag;
      inc[2][static_cast<std::size_t>(alpha)] += cst;
    }
    out.total.off_diagonal += sums.off_diagonal;
    out.total.diagonal += sums.diagonal;
    out.total.constant += sums.constant;
    out.per_tau.push_back(sums);
  }

  const int q = std::max(1, A / 4);
  const int last_lo = A - q + 1;
  const int prev_lo = std::max(1, last_lo - q);
  for (const auto& series : inc) {
    double last = 0.0;
    double prev = 0.0;
    for (int a = last_lo; a <= A; ++a) last += series[static_cast<std::size_t>(a)];
    for (int a = prev_lo; a < last_lo; ++a) prev += series[static_cast<std::size_t>(a)];
    const double ratio = prev > 0.0 ? last / prev : (last > 0.0 ? INFINITY : 0.0);
    out.tail_ratio = std::max(out.tail_ratio, ratio);
    out.tail_bound = std::max(out.tail_bound, series[static_cast<std::size_t>(A)]);
  }
  out.decaying = out.tail_ratio < 1.0;
  return out;
}

}  // namespace pencil
