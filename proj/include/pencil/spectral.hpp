#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pencil/adjoint_solver.hpp"
#include "pencil/forward_solver.hpp"

namespace pencil {

/// Ordering of Im(k w_j) at a point k, and the resulting split into decaying
/// (Im(k w) > 0, square integrable at +infinity) and growing solutions.
struct SectorContext {
  int m = 1;
  cplx k;
  std::vector<int> order;     // indices by ascending Im(k w_j)
  std::vector<int> decaying;  // ascending index; these are the Wronskian columns
  std::vector<int> growing;   // ascending index
  int sector = 0;
};

/// Maximal open arg-interval on which the ordering is constant.
struct SectorInfo {
  int id = 0;
  double theta_lo = 0.0;  // arg k in (theta_lo, theta_hi)
  double theta_hi = 0.0;
  std::vector<int> order;
  std::vector<int> decaying;
  std::vector<int> growing;
  /// The ordering permutation written as digits, e.g. "3201".
  std::string label;
};

/// Relative tolerance on coincident Im(k w) values.
inline constexpr double kTieTolerance = 1e-10;

/// Throws OnCriticalRay when two Im(k w_j) coincide (or k = 0).
SectorContext sector_ordering(int m, cplx k);

/// 2 sectors (half-planes) for m = 1, 4m sectors of width pi/(2m) otherwise,
/// numbered counter-clockwise from arg k = 0.
int sector_count(int m);
SectorInfo sector_info(int m, int id);
/// Sector containing arg k (no tie check).
int sector_of(int m, cplx k);

/// m x m matrix of f_c^{(d)}(0, k), d = 0..m-1, over the given columns.
Eigen::MatrixXcd boundary_matrix(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns);

/// Wronskian of the decaying solutions at k.
cplx wronskian(const SolutionCoefficients& v, cplx k);
/// Wronskian with a fixed column set, used to continue W across sector rays.
cplx wronskian(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns);

/// Wronskian with column `replace_col` (a position in the decaying list)
/// replaced by the boundary values of the growing solution `s`.
cplx minor_A(const SolutionCoefficients& v, cplx k, int replace_col, int s);
cplx minor_A(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns, int replace_col, int s);

struct Eigenvalue {
  cplx k;
  double residual = 0.0;  // |W(k)| over its term-wise magnitude bound
  int multiplicity = 1;
};

struct SpectrumReport {
  int sector = 0;
  std::string label;
  double r_min = 0.0;
  double r_max = 0.0;
  int count = 0;
  std::vector<Eigenvalue> eigenvalues;
};

struct SpectrumOptions {
  double tol_root = 1e-10;
  /// Angular inset of the search box from the sector rays, radians.
  double ray_inset = 1e-3;
  /// Boxes holding a single zero are refined to this relative size before Newton.
  double newton_box = 0.05;
  int max_depth = 40;
  /// Deterministic jitter seed for contours that pass too close to a zero.
  unsigned seed = 1;
};

/// Zeros of W in sector `id` within r_min <= |k| <= r_max, by argument-principle
/// counting on subdivided polar boxes and Newton polishing.
/// Throws PoleOnContour, ContourThroughZero, CountMismatch.
SpectrumReport find_eigenvalues(const SolutionCoefficients& v, int sector, double r_min, double r_max,
                                const SpectrumOptions& options = {});

/// Winding number of f around the closed polygon through `vertices`, with
/// adaptive refinement of each edge. Throws ContourThroughZero.
int winding_number(const std::function<cplx(cplx)>& f, const std::vector<cplx>& vertices, double floor);

struct ResidueIdentityReport {
  int n = 0;
  int j = 0;
  int v = 0;
  int target = 0;  // (j + v) mod 2m
  cplx pole;       // k_{njv}
  cplx fitted;     // least-squares constant c with Res f_v = c f_target
  cplx expected;   // V_nn^{(j,v)} / (w_v (1 - w_j))
  double spread = 0.0;    // max_x |Res f_v - c f_target| / max_x |Res f_v|
  double mismatch = 0.0;  // |fitted - expected|
};

ResidueIdentityReport verify_residue_identity(const SolutionCoefficients& v, int n, int j, int vv,
                                              const std::vector<double>& grid);

/// sum_s (i w_s / (2m k^{2m-1})) phi_s(x, k) f_s^{(j)}(x, k), which equals
/// delta_{j, 2m-1}; returns the worst deviation over j = 0..2m-1.
double bilinear_identity_defect(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double x);

/// Green kernel of l(y) = psi under y^{(d)}(0) = 0, d < m, bounded at +infinity:
///   y(x) = int_0^infty R(x, t, k) psi(t) dt.
class ResolventKernel {
 public:
  /// Throws EigenvalueHit when |W(k)| is below tol relative to its term-wise magnitude.
  ResolventKernel(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double tol = 1e-12);

  const SectorContext& sector() const noexcept { return ctx_; }
  cplx k() const noexcept { return k_; }
  cplx wronskian() const noexcept { return w_; }

  /// d-th x-derivative of R(x, t, k), 0 <= d <= 2m-1; at t = x the t < x branch is used.
  cplx operator()(double x, double t, int d = 0) const;

  /// d-th derivative of int_a^b R(x, t) psi(t) dt, Gauss-Legendre on `panels`
  /// panels per side of the split t = x.
  cplx apply(const std::function<double(double)>& psi, double a, double b, double x, int d = 0,
             int panels = 24) const;

 private:
  const SolutionCoefficients& v_;
  const AdjointCoefficients& r_;
  cplx k_;
  SectorContext ctx_;
  cplx w_;
  std::vector<cplx> kappa_;                 // i w_s / (2m k^{2m-1})
  std::vector<std::vector<cplx>> ratio_;    // [decaying pos][growing pos] A/W
};

cplx resolvent_kernel(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double x, double t,
                      int d = 0);

}  // namespace pencil
