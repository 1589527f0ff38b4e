#include "pencil/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pencil/errors.hpp"

namespace pencil {

namespace {

int position_of(const std::vector<int>& list, int value) {
  auto it = std::find(list.begin(), list.end(), value);
  return it == list.end() ? -1 : static_cast<int>(it - list.begin());
}

/// Sector next to k0 in which `grow` is growing and `decay` decaying; k0 itself
/// may sit on a ray.
int adjacent_sector(int m, cplx k0, int grow, int decay) {
  const double width = m == 1 ? M_PI : M_PI / (2.0 * m);
  for (double side : {0.25, -0.25}) {
    const int id = sector_of(m, k0 * std::polar(1.0, side * width));
    const auto info = sector_info(m, id);
    if (position_of(info.growing, grow) >= 0 && position_of(info.decaying, decay) >= 0) return id;
  }
  std::ostringstream msg;
  msg << "no sector near k = " << k0 << " has " << grow << " growing and " << decay << " decaying";
  throw AmbiguousResidue(msg.str());
}

double nearest_other_lattice_point(int m, cplx k0, int nmax) {
  double best = std::numeric_limits<double>::infinity();
  const double self = 1e-12 * std::max(1.0, std::abs(k0));
  for (int tau = 0; tau < 2 * m; ++tau)
    for (int j = 1; j < 2 * m; ++j)
      for (int n = 1; n <= nmax; ++n) {
        const double d = std::abs(pole_k(m, n, j, tau) - k0);
        if (d > self) best = std::min(best, d);
      }
  return best;
}

template <class F>
cplx circle_residue(F&& f, cplx k0, double rho, int points) {
  cplx sum{};
  for (int p = 0; p < points; ++p) {
    const cplx e = std::polar(1.0, 2.0 * M_PI * (p + 0.5) / points);
    sum += f(k0 + rho * e) * e;
  }
  return sum * rho / static_cast<double>(points);
}

}  // namespace

ScatteringData::ScatteringData(PencilOrder order, int max_harmonic, Normalizers normalizers)
    : order_(order), max_harmonic_(max_harmonic), normalizers_(std::move(normalizers)) {
  if (max_harmonic < 0) throw IndexOutOfRange("max harmonic must be >= 0");
}

ScatteringData::ScatteringData(std::shared_ptr<const SolutionCoefficients> forward, int max_harmonic, int sector)
    : order_(forward->order()), max_harmonic_(max_harmonic), sector_(sector), forward_(std::move(forward)) {
  if (max_harmonic < 0) throw IndexOutOfRange("max harmonic must be >= 0");
  sector_info(m(), sector);  // validates the id
}

const SolutionCoefficients& ScatteringData::forward() const {
  if (!forward_) throw IndexOutOfRange("scattering data carries no forward table");
  return *forward_;
}

cplx ScatteringData::S(int sector, int d, int g, cplx k) const {
  const auto info = sector_info(m(), sector);
  if (position_of(info.growing, g) < 0) throw IndexOutOfRange("solution " + std::to_string(g) + " is not growing in this sector");
  if (d < 0 || d >= m()) throw IndexOutOfRange("row outside [0, m-1]");
  auto b = boundary_matrix(forward(), k, info.decaying);
  const cplx w = b.determinant();
  if (w == cplx{}) throw EigenvalueHit("W(k) = 0");
  const auto jet = forward().evaluate_jet(g, 0.0, k, m());
  for (int r = 0; r < m(); ++r) b(r, d) = jet[static_cast<std::size_t>(r)];
  return b.determinant() / w;
}

cplx ScatteringData::S_inverse(int sector, int d, int g, cplx k) const {
  const auto info = sector_info(m(), sector);
  if (position_of(info.growing, g) < 0) throw IndexOutOfRange("solution " + std::to_string(g) + " is not growing in this sector");
  const cplx a = minor_A(forward(), k, info.decaying, d, g);
  if (a == cplx{}) throw EigenvalueHit("A(k) = 0");
  return wronskian(forward(), k, info.decaying) / a;
}

cplx ScatteringData::S(int d, int g, cplx k) const { return S(sector_, d, g, k); }
cplx ScatteringData::S_inverse(int d, int g, cplx k) const { return S_inverse(sector_, d, g, k); }

Eigen::MatrixXcd ScatteringData::matrix(int sector, cplx k) const {
  const auto info = sector_info(m(), sector);
  const int mm = m();
  const cplx w = wronskian(forward(), k, info.decaying);
  if (w == cplx{}) throw EigenvalueHit("W(k) = 0");
  Eigen::MatrixXcd s(mm, mm);
  for (int d = 0; d < mm; ++d)
    for (int g = 0; g < mm; ++g)
      s(d, g) = minor_A(forward(), k, info.decaying, d, info.growing[static_cast<std::size_t>(g)]) / w;
  return s;
}

cplx ScatteringData::normalizer(int n, int j, int v) const {
  auto it = normalizers_.find({n, j, v});
  return it == normalizers_.end() ? cplx{} : it->second;
}

ScatteringData scattering_matrix(std::shared_ptr<const SolutionCoefficients> v, int sector, int max_harmonic) {
  return ScatteringData(std::move(v), max_harmonic, sector);
}

int extraction_depth(int max_harmonic) { return std::max(max_harmonic + 1, 2); }

ScatteringData extract_normalizers(ScatteringData data, const ExtractionOptions& options) {
  const int m = data.m();
  const auto& fwd = data.forward();
  const int depth = extraction_depth(data.max_harmonic());
  if (depth > fwd.truncation()) throw IndexOutOfRange("truncation below the extraction depth");
  const int nmax = std::max(fwd.truncation(), depth) + 1;

  for (int n = 1; n <= depth; ++n)
    for (int j = 1; j < 2 * m; ++j)
      for (int v = 0; v < 2 * m; ++v) {
        const cplx k0 = pole_k(m, n, j, v);
        const int target = (j + v) % (2 * m);
        const int sector = adjacent_sector(m, k0, v, target);
        const auto info = sector_info(m, sector);
        const int d = position_of(info.decaying, target);
        const double rho = options.radius_fraction * nearest_other_lattice_point(m, k0, nmax);

        auto s_form = [&](cplx k) { return data.S(sector, d, v, k); };
        const cplx slope = omega(m, v) * (1.0 - omega(m, j));

        ResidueRecord rec;
        rec.sector = sector;
        rec.radius = rho;
        rec.at_radius = slope * circle_residue(s_form, k0, rho, options.points);
        rec.at_half_radius = slope * circle_residue(s_form, k0, 0.5 * rho, options.points);
        rec.radius_gap = std::abs(rec.at_radius - rec.at_half_radius);
        std::vector<cplx> ring;
        // octagon circumscribing the quadrature circle
        for (int p = 0; p < 8; ++p) ring.push_back(k0 + rho / std::cos(M_PI / 8.0) * std::polar(1.0, M_PI * p / 4.0));
        const auto w_fixed = [&](cplx k) { return wronskian(fwd, k, info.decaying); };
        rec.wronskian_zeros = winding_number(w_fixed, ring, 1e-14 * std::abs(w_fixed(ring.front())));

        const double mag = std::max(1.0, std::abs(rec.at_radius));
        std::ostringstream where;
        where << "(n=" << n << ", j=" << j << ", v=" << v << ") at k = " << k0;
        if (rec.radius_gap > options.stability_tol * mag)
          throw AmbiguousResidue(where.str() + ": residue differs between radii by " + std::to_string(rec.radius_gap));
        if (rec.wronskian_zeros != 0)
          throw AmbiguousResidue(where.str() + ": W vanishes inside the residue contour");

        data.normalizers()[{n, j, v}] = rec.at_radius;
        data.residue_records()[{n, j, v}] = rec;
      }
  return data;
}

namespace {

struct LevelSystem {
  int m;
  int alpha;
  const std::vector<std::pair<int, int>>& slots;
  const std::vector<CoefficientEntry>& known;  // recovered p below alpha
  const std::vector<std::vector<PolePolynomial>>& lower;
  const ScatteringData& data;

  int n_slots() const { return static_cast<int>(slots.size()); }
  int n_v() const { return 2 * m; }
  int n_v1() const { return 2 * m * (2 * m - 1); }
  int unknowns() const { return n_slots() + n_v() + n_v1(); }

  std::vector<cplx> residual(const Eigen::VectorXcd& u) const {
    const int dim = 2 * m;
    std::vector<CoefficientEntry> entries = known;
    for (int i = 0; i < n_slots(); ++i)
      entries.push_back({slots[static_cast<std::size_t>(i)].first, slots[static_cast<std::size_t>(i)].second, alpha, u(i)});
    const auto p = build_potential(m, entries);
    auto v_const = [&](int tau) { return u(n_slots() + tau); };
    auto v_one = [&](int tau, int j) { return u(n_slots() + n_v() + tau * (dim - 1) + (j - 1)); };

    std::vector<cplx> out;
    std::vector<PolePolynomial> cand;
    for (int tau = 0; tau < dim; ++tau) {
      const auto& lv = lower[static_cast<std::size_t>(tau)];
      const auto rhs = engine::level_rhs(p, SeriesKind::Special, tau, lv, alpha);
      PolePolynomial c(engine::context(m, SeriesKind::Special, tau), ComplexPolynomial::constant(v_const(tau)),
                       engine::offdiagonal_poles(m, SeriesKind::Special, tau, rhs, alpha));
      for (int j = 1; j < dim; ++j) c.add_pole(alpha, j, data.normalizer(alpha, j, tau));
      for (const cplx r : engine::level_identity_residual(m, SeriesKind::Special, tau, c, rhs, alpha)) out.push_back(r);

      // pole matching one level up; p_{alpha+1} multiplies c_0 and adds no poles
      std::vector<PolePolynomial> ext(lv.begin(), lv.end());
      ext.push_back(c);
      const auto rhs_up = engine::level_rhs(p, SeriesKind::Special, tau, ext, alpha + 1);
      const auto d_up = engine::level_divisor(m, SeriesKind::Special, tau, alpha + 1);
      const auto ctx = engine::context(m, SeriesKind::Special, tau);
      for (int j = 1; j < dim; ++j) out.push_back(d_up(ctx.root(1, j)) * v_one(tau, j) - rhs_up.pole(1, j));
      cand.push_back(std::move(c));
    }
    // residue identity: V_{1,1+alpha}^{(j,v)} = V_11^{(j,v)} c_alpha^{(j+v)}(k_{1jv})
    for (int j = 1; j < dim; ++j)
      for (int v = 0; v < dim; ++v) {
        const int t = (j + v) % dim;
        out.push_back(v_one(v, j) - data.normalizer(1, j, v) * cand[static_cast<std::size_t>(t)](pole_k(m, 1, j, v)));
      }
    return out;
  }
};

}  // namespace

ReconstructionReport reconstruct(const ScatteringData& data, int truncation, const ReconstructionOptions& options) {
  const int m = data.m();
  const int dim = 2 * m;
  const int N = data.max_harmonic();
  if (truncation < std::max(N + 2, 2)) throw IndexOutOfRange("truncation too small for the data's max harmonic");
  const auto slots = coefficient_slots(m);

  ReconstructionReport report{PotentialCoefficients(PencilOrder(m)), {}, {}, {}, 0.0, false};
  std::vector<CoefficientEntry> recovered;
  std::vector<std::vector<PolePolynomial>> lower(static_cast<std::size_t>(dim));
  for (int tau = 0; tau < dim; ++tau)
    lower[static_cast<std::size_t>(tau)].emplace_back(engine::context(m, SeriesKind::Special, tau),
                                                      ComplexPolynomial::constant(1.0));

  for (int alpha = 1; alpha <= N; ++alpha) {
    LevelSystem sys{m, alpha, slots, recovered, lower, data};
    const int nu = sys.unknowns();
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(nu);
    const auto r0 = sys.residual(zero);
    const int ne = static_cast<int>(r0.size());
    Eigen::MatrixXcd jac(ne, nu);
    Eigen::VectorXcd rhs(ne);
    for (int i = 0; i < ne; ++i) rhs(i) = -r0[static_cast<std::size_t>(i)];
    for (int c = 0; c < nu; ++c) {
      Eigen::VectorXcd e = zero;
      e(c) = 1.0;
      const auto rc = sys.residual(e);
      for (int i = 0; i < ne; ++i) jac(i, c) = rc[static_cast<std::size_t>(i)] - r0[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < ne; ++i) {
      const double s = jac.row(i).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        jac.row(i) /= s;
        rhs(i) /= s;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(jac);
    qr.setThreshold(1e-10);
    if (qr.rank() < nu) {
      std::ostringstream msg;
      msg << "(alpha=" << alpha << ") reconstruction system rank " << qr.rank() << " < " << nu;
      throw SingularLevel(msg.str());
    }
    const Eigen::VectorXcd u = qr.solve(rhs);

    LevelResidual lr;
    lr.alpha = alpha;
    lr.unknowns = nu;
    lr.equations = ne;
    lr.residual = (jac * u - rhs).norm();
    lr.relative = lr.residual / std::max(1.0, rhs.norm());
    report.levels.push_back(lr);
    if (!(lr.relative <= options.tol_recon)) {
      std::ostringstream msg;
      msg << "level " << alpha << " least-squares residual " << lr.relative << " exceeds " << options.tol_recon;
      throw InconsistentData(msg.str());
    }

    for (int i = 0; i < static_cast<int>(slots.size()); ++i)
      if (std::abs(u(i)) > options.zero_tol)
        recovered.push_back({slots[static_cast<std::size_t>(i)].first, slots[static_cast<std::size_t>(i)].second, alpha, u(i)});
    const auto p = build_potential(m, recovered);
    for (int tau = 0; tau < dim; ++tau) {
      auto& lv = lower[static_cast<std::size_t>(tau)];
      const auto rhs_level = engine::level_rhs(p, SeriesKind::Special, tau, lv, alpha);
      lv.push_back(engine::solve_level(m, SeriesKind::Special, tau, rhs_level, alpha));
    }
  }
  report.recovered = build_potential(m, recovered);

  // held-out: V_{2,2+beta} of the recovered pencil against V_22^{data} c_beta(k_{2jv})
  const auto full = solve_coefficients(report.recovered, truncation);
  for (int beta = 0; beta <= std::max(N, 1) && 2 + beta <= truncation; ++beta) {
    HeldOutResidual h;
    h.alpha = beta;
    for (int j = 1; j < dim; ++j)
      for (int v = 0; v < dim; ++v) {
        const int t = (j + v) % dim;
        const cplx lhs = full.pole(v, 2, j, 2 + beta);
        const cplx rhs_v = data.normalizer(2, j, v) * full.level(t, beta)(pole_k(m, 2, j, v));
        h.residual = std::max(h.residual, std::abs(lhs - rhs_v));
      }
    report.held_out.push_back(h);
    if (!(h.residual <= options.tol_recon)) {
      std::ostringstream msg;
      msg << "held-out n = 2 relation at shift " << beta << " has residual " << h.residual;
      throw InconsistentData(msg.str());
    }
  }
  return report;
}

void compare_with_reference(ReconstructionReport& report, const PotentialCoefficients& reference) {
  report.errors.clear();
  report.max_error = 0.0;
  report.has_reference = true;
  for (const auto& [key, value] : reference.table())
    report.errors[key] = std::abs(report.recovered.at(key.gamma, key.s, key.n) - value);
  for (const auto& [key, value] : report.recovered.table())
    if (!report.errors.count(key)) report.errors[key] = std::abs(value - reference.at(key.gamma, key.s, key.n));
  for (const auto& [key, e] : report.errors) report.max_error = std::max(report.max_error, e);
}

ReconstructionReport roundtrip(const PotentialCoefficients& potential, int truncation,
                               const ExtractionOptions& extraction, const ReconstructionOptions& options) {
  auto forward = std::make_shared<const SolutionCoefficients>(solve_coefficients(potential, truncation));
  auto data = extract_normalizers(scattering_matrix(forward, 0, potential.max_harmonic()), extraction);
  auto report = reconstruct(data, truncation, options);
  compare_with_reference(report, potential);
  return report;
}

}  // namespace pencil
