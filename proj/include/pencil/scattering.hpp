#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pencil/forward_solver.hpp"
#include "pencil/spectral.hpp"

namespace pencil {

struct NormalizerKey {
  int n = 0;
  int j = 0;
  int v = 0;
  auto operator<=>(const NormalizerKey&) const = default;
};

/// Quadrature record of one extracted normalizer.
struct ResidueRecord {
  int sector = 0;         // sector whose column labels were continued to the pole
  double radius = 0.0;    // rho; the second estimate uses rho / 2
  cplx at_radius;         // V_nn from the circle of radius rho
  cplx at_half_radius;    // V_nn from the circle of radius rho / 2
  double radius_gap = 0.0;
  int wronskian_zeros = 0;  // zeros of W inside the circle of radius rho; must be 0
};

/// Scattering functions S_{d g}(k) = A_{d g}(k) / W(k) of a forward table, with
/// column labels fixed per sector, and the normalizing numbers V_nn^{(j,v)}.
class ScatteringData {
 public:
  using Normalizers = std::map<NormalizerKey, cplx>;

  /// Data carrying only normalizers (e.g. read from a file); no evaluators.
  ScatteringData(PencilOrder order, int max_harmonic, Normalizers normalizers = {});
  /// Evaluators over the given forward table; `sector` is the default sector.
  ScatteringData(std::shared_ptr<const SolutionCoefficients> forward, int max_harmonic, int sector = 0);

  PencilOrder order() const noexcept { return order_; }
  int m() const noexcept { return order_.m(); }
  int max_harmonic() const noexcept { return max_harmonic_; }
  int sector() const noexcept { return sector_; }
  bool has_evaluators() const noexcept { return forward_ != nullptr; }
  const SolutionCoefficients& forward() const;

  /// S_{d g}(k): d a position in the sector's decaying list, g a growing index.
  /// Throws EigenvalueHit at zeros of W.
  cplx S(int d, int g, cplx k) const;
  cplx S(int sector, int d, int g, cplx k) const;
  cplx S_inverse(int d, int g, cplx k) const;
  cplx S_inverse(int sector, int d, int g, cplx k) const;
  /// Full m x m matrix [d][g position] in the given sector.
  Eigen::MatrixXcd matrix(int sector, cplx k) const;

  const Normalizers& normalizers() const noexcept { return normalizers_; }
  Normalizers& normalizers() noexcept { return normalizers_; }
  cplx normalizer(int n, int j, int v) const;
  const std::map<NormalizerKey, ResidueRecord>& residue_records() const noexcept { return records_; }
  std::map<NormalizerKey, ResidueRecord>& residue_records() noexcept { return records_; }

 private:
  PencilOrder order_;
  int max_harmonic_;
  int sector_ = 0;
  std::shared_ptr<const SolutionCoefficients> forward_;
  Normalizers normalizers_;
  std::map<NormalizerKey, ResidueRecord> records_;
};

ScatteringData scattering_matrix(std::shared_ptr<const SolutionCoefficients> v, int sector, int max_harmonic);

struct ExtractionOptions {
  int points = 64;
  /// rho = radius_fraction * (distance to the nearest other lattice point)
  double radius_fraction = 0.1;
  /// Tolerance on |Res(rho) - Res(rho/2)|, relative to max(1, |Res|).
  double stability_tol = 1e-7;
};

/// Harmonics extracted for data of max harmonic N: one beyond N (at least 2),
/// so that the held-out check has data.
int extraction_depth(int max_harmonic);

/// Residues of S at every lattice pole k_{njv} with n <= extraction_depth(N),
/// converted to V_nn^{(j,v)} = w_v (1 - w_j) Res S_{pos(j+v), v}.
/// Throws AmbiguousResidue when a residue is radius-unstable or a zero of W lies
/// inside the contour, so that the residue would mix a pole of S with an eigenvalue.
ScatteringData extract_normalizers(ScatteringData data, const ExtractionOptions& options = {});

struct LevelResidual {
  int alpha = 0;
  double residual = 0.0;  // equilibrated least-squares residual norm
  double relative = 0.0;  // residual / max(1, |rhs|)
  int unknowns = 0;
  int equations = 0;
};

struct HeldOutResidual {
  int alpha = 0;     // shift: V_{2, 2+alpha} against V_22 c_alpha(k_{2jv})
  double residual = 0.0;
};

struct ReconstructionReport {
  PotentialCoefficients recovered;
  std::vector<LevelResidual> levels;
  std::vector<HeldOutResidual> held_out;
  /// Per-coefficient absolute errors against a reference, when supplied.
  std::map<CoefficientKey, double> errors;
  double max_error = 0.0;
  bool has_reference = false;
};

struct ReconstructionOptions {
  double tol_recon = 1e-6;
  /// Entries below this magnitude are dropped from the recovered table.
  double zero_tol = 1e-12;
};

/// Level-by-level joint least squares for p_{gamma s alpha}, V_alpha^{(tau)} and
/// V_{1,1+alpha}^{(j,tau)}, alpha = 1..N. Throws InconsistentData.
ReconstructionReport reconstruct(const ScatteringData& data, int truncation,
                                 const ReconstructionOptions& options = {});

/// Adds coefficient-wise errors against the reference potential.
void compare_with_reference(ReconstructionReport& report, const PotentialCoefficients& reference);

/// forward -> scattering -> normalizers -> reconstruct -> compare.
ReconstructionReport roundtrip(const PotentialCoefficients& potential, int truncation,
                               const ExtractionOptions& extraction = {},
                               const ReconstructionOptions& options = {});

}  // namespace pencil
