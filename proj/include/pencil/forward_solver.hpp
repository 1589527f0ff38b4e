#pragma once

#include <vector>

#include "pencil/series.hpp"

namespace pencil {

/// Coefficient tables {V_alpha^{(tau)}, V_{n alpha}^{(j,tau)}} of the special solutions
///   f_tau(x,k) = e^{i k w_tau x} + sum_alpha [V_alpha + sum_{j,n<=alpha} V_{n alpha} / (i n + k w_tau (1 - w_j))]
///                e^{(-alpha + i k w_tau) x}.
class SolutionCoefficients : public SeriesTable {
 public:
  explicit SolutionCoefficients(SeriesTable table) : SeriesTable(std::move(table)) {}
};

inline constexpr int kDefaultTruncation = 25;

/// Level-by-level solve: off-diagonal poles, then V_alpha, then the diagonal system.
/// Throws Resonance or SingularLevel on degenerate input.
SolutionCoefficients solve_coefficients(const PotentialCoefficients& potential, int truncation = kDefaultTruncation);

/// d-th x-derivative of f_tau(x, k). Throws NearPole inside the pole guard.
cplx eval_solution(const SolutionCoefficients& v, int tau, double x, cplx k, int d = 0);

/// Res_{k = k_{n j tau}} f_tau(x, k).
cplx residue_at_pole(const SolutionCoefficients& v, int tau, int n, int j, double x, int d = 0);

struct SeriesSums {
  double off_diagonal = 0.0;  // sum alpha^{2m-1} (alpha - n) |V_{n alpha}| / n
  double diagonal = 0.0;      // sum alpha^{2m-1} |V_{alpha alpha}|
  double constant = 0.0;      // sum alpha^{2m} |V_alpha|
};

struct SeriesDiagnostics {
  std::vector<SeriesSums> per_tau;
  SeriesSums total;
  /// Last-quartile increment mass over the preceding quartile, worst of the three series.
  double tail_ratio = 0.0;
  /// Increment of the final level; an a-posteriori size of the truncated tail.
  double tail_bound = 0.0;
  bool decaying = true;
};

SeriesDiagnostics series_diagnostics(const SeriesTable& table);

}  // namespace pencil
