#include "pencil/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "pencil/errors.hpp"

namespace pencil {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrapped_arg(cplx k) {
  double t = std::arg(k);
  if (t < 0.0) t += kTwoPi;
  return t;
}

double sector_width(int m) { return m == 1 ? M_PI : M_PI / (2.0 * m); }

std::vector<int> ordering_at(int m, cplx k) {
  std::vector<int> order(static_cast<std::size_t>(2 * m));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> im(order.size());
  for (int j = 0; j < 2 * m; ++j) im[static_cast<std::size_t>(j)] = std::imag(k * omega(m, j));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return im[static_cast<std::size_t>(a)] < im[static_cast<std::size_t>(b)]; });
  return order;
}

void split_by_decay(int m, cplx k, std::vector<int>& decaying, std::vector<int>& growing) {
  decaying.clear();
  growing.clear();
  for (int j = 0; j < 2 * m; ++j) (std::imag(k * omega(m, j)) > 0.0 ? decaying : growing).push_back(j);
}

/// Product over the columns of the term-wise magnitude
///   ( sum_d ( sum_alpha |c_alpha(k)| |lambda - alpha|^d )^2 )^{1/2},
/// an upper bound for |W| that does not see cancellation between levels.
double magnitude_bound(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns) {
  const int m = v.m();
  double h = 1.0;
  for (int c : columns) {
    const cplx lambda = I * k * omega(m, c);
    const auto lv = v.levels(c);
    std::vector<double> col(static_cast<std::size_t>(m), 0.0);
    for (int alpha = 0; alpha <= v.truncation(); ++alpha) {
      const double mag = std::abs(lv[static_cast<std::size_t>(alpha)](k));
      const double rate = std::abs(lambda - static_cast<double>(alpha));
      double p = 1.0;
      for (int d = 0; d < m; ++d, p *= rate) col[static_cast<std::size_t>(d)] += mag * p;
    }
    double norm2 = 0.0;
    for (double x : col) norm2 += x * x;
    h *= std::sqrt(norm2);
  }
  return h;
}

/// Lattice points k_{n j tau} (n <= A) at which some level of f_tau has a nonzero
/// residue-numerator.
std::vector<cplx> active_poles(const SolutionCoefficients& v) {
  std::vector<cplx> out;
  const int A = v.truncation();
  for (int tau = 0; tau < 2 * v.m(); ++tau) {
    std::set<PoleKey> keys;
    for (int alpha = 1; alpha <= A; ++alpha)
      for (const auto& [key, b] : v.level(tau, alpha).poles()) keys.insert(key);
    for (const auto& key : keys) out.push_back(v.pole_location(tau, key.n, key.j));
  }
  return out;
}

// ---- argument principle on curves -------------------------------------------------

using Curve = std::function<cplx(double)>;

struct WindingState {
  const std::function<cplx(cplx)>& f;
  double floor;
  double total = 0.0;
};

void wind_segment(WindingState& st, const Curve& c, double t0, cplx f0, double t1, cplx f1, int depth) {
  const double step = std::arg(f1 / f0);
  if (std::abs(step) <= 0.3) {
    st.total += step;
    return;
  }
  if (depth > 40) throw ContourThroughZero("argument step does not resolve; contour passes too close to a zero");
  const double tm = 0.5 * (t0 + t1);
  const cplx km = c(tm);
  const cplx fm = st.f(km);
  if (std::abs(fm) < st.floor) {
    std::ostringstream msg;
    msg << "|f| = " << std::abs(fm) << " at k = " << km;
    throw ContourThroughZero(msg.str());
  }
  wind_segment(st, c, t0, f0, tm, fm, depth + 1);
  wind_segment(st, c, tm, fm, t1, f1, depth + 1);
}

int wind_curves(const std::function<cplx(cplx)>& f, const std::vector<Curve>& edges, double floor,
                int samples_per_edge = 24) {
  WindingState st{f, floor};
  for (const auto& c : edges) {
    double t_prev = 0.0;
    cplx k_prev = c(0.0);
    cplx f_prev = f(k_prev);
    if (std::abs(f_prev) < floor) {
      std::ostringstream msg;
      msg << "|f| = " << std::abs(f_prev) << " at k = " << k_prev;
      throw ContourThroughZero(msg.str());
    }
    for (int i = 1; i <= samples_per_edge; ++i) {
      const double t = static_cast<double>(i) / samples_per_edge;
      const cplx kk = c(t);
      const cplx fk = f(kk);
      if (std::abs(fk) < floor) {
        std::ostringstream msg;
        msg << "|f| = " << std::abs(fk) << " at k = " << kk;
        throw ContourThroughZero(msg.str());
      }
      wind_segment(st, c, t_prev, f_prev, t, fk, 0);
      t_prev = t;
      f_prev = fk;
    }
  }
  const double turns = st.total / kTwoPi;
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.05) {
    std::ostringstream msg;
    msg << "non-integer winding " << turns;
    throw ContourThroughZero(msg.str());
  }
  return static_cast<int>(rounded);
}

struct PolarBox {
  double r0, r1, t0, t1;

  cplx center() const { return std::polar(0.5 * (r0 + r1), 0.5 * (t0 + t1)); }
  double size() const { return std::max(r1 - r0, r1 * (t1 - t0)); }
  bool contains(cplx k, double margin) const {
    const double r = std::abs(k);
    double t = std::arg(k);
    // bring t near the box
    while (t < t0 - M_PI) t += kTwoPi;
    while (t > t1 + M_PI) t -= kTwoPi;
    const double dr = margin;
    const double dt = margin / std::max(r0, 1e-12);
    return r >= r0 - dr && r <= r1 + dr && t >= t0 - dt && t <= t1 + dt;
  }
  std::vector<Curve> edges() const {
    const PolarBox b = *this;
    return {
        [b](double s) { return std::polar(b.r0 + s * (b.r1 - b.r0), b.t0); },
        [b](double s) { return std::polar(b.r1, b.t0 + s * (b.t1 - b.t0)); },
        [b](double s) { return std::polar(b.r1 - s * (b.r1 - b.r0), b.t1); },
        [b](double s) { return std::polar(b.r0, b.t1 - s * (b.t1 - b.t0)); },
    };
  }
};

class RootSearch {
 public:
  RootSearch(std::function<cplx(cplx)> w, std::function<double(cplx)> scale, const SpectrumOptions& opt)
      : w_(std::move(w)), scale_(std::move(scale)), opt_(opt), rng_(opt.seed) {}

  int count_checked(const PolarBox& b) const {
    // relative floor: W is compared to its Hadamard bound at the sample point
    auto normalized = [this](cplx k) { return w_(k) / scale_(k); };
    return wind_curves(normalized, b.edges(), 1e-11);
  }

  void search(const PolarBox& box, int n, int depth, std::vector<Eigenvalue>& out) {
    if (n == 0) return;
    if (depth > opt_.max_depth) {
      std::ostringstream msg;
      msg << "subdivision depth exceeded near k = " << box.center() << " with " << n << " zeros";
      throw CountMismatch(msg.str());
    }
    const double rel = box.size() / std::abs(box.center());
    if (n == 1 && rel < opt_.newton_box) {
      Eigenvalue e;
      if (polish(box.center(), 1, box, e)) {
        out.push_back(e);
        return;
      }
    }
    if (n > 1 && rel < 1e-7) {
      // cluster: treat as one zero of multiplicity n
      Eigenvalue e;
      if (polish(box.center(), n, box, e)) {
        out.push_back(e);
        return;
      }
      std::ostringstream msg;
      msg << "cluster of " << n << " zeros near k = " << box.center() << " did not polish";
      throw CountMismatch(msg.str());
    }
    for (int attempt = 0;; ++attempt) {
      const double sr = attempt == 0 ? 0.4871 : jitter();
      const double st = attempt == 0 ? 0.5129 : jitter();
      const double rm = box.r0 + sr * (box.r1 - box.r0);
      const double tm = box.t0 + st * (box.t1 - box.t0);
      const PolarBox kids[4] = {{box.r0, rm, box.t0, tm}, {rm, box.r1, box.t0, tm},
                                {box.r0, rm, tm, box.t1}, {rm, box.r1, tm, box.t1}};
      int counts[4];
      try {
        for (int i = 0; i < 4; ++i) counts[i] = count_checked(kids[i]);
      } catch (const ContourThroughZero&) {
        if (attempt >= 8) throw;
        continue;
      }
      if (counts[0] + counts[1] + counts[2] + counts[3] != n) {
        if (attempt >= 8) {
          std::ostringstream msg;
          msg << "children count " << counts[0] + counts[1] + counts[2] + counts[3] << " != parent " << n;
          throw CountMismatch(msg.str());
        }
        continue;
      }
      for (int i = 0; i < 4; ++i) search(kids[i], counts[i], depth + 1, out);
      return;
    }
  }

 private:
  double jitter() { return std::uniform_real_distribution<double>(0.35, 0.65)(rng_); }

  bool polish(cplx k, int mult, const PolarBox& box, Eigenvalue& e) const {
    for (int it = 0; it < 60; ++it) {
      const cplx wk = w_(k);
      if (wk == cplx{}) break;
      const double h = 1e-6 * std::abs(k);
      const cplx dw = (w_(k + h) - w_(k - h)) / (2.0 * h);
      if (dw == cplx{}) return false;
      const cplx step = static_cast<double>(mult) * wk / dw;
      k -= step;
      if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) return false;
      if (std::abs(step) < 1e-15 * std::abs(k)) break;
    }
    if (!box.contains(k, box.size())) return false;
    e.k = k;
    e.residual = std::abs(w_(k)) / scale_(k);
    e.multiplicity = mult;
    return e.residual < opt_.tol_root;
  }

  std::function<cplx(cplx)> w_;
  std::function<double(cplx)> scale_;
  const SpectrumOptions& opt_;
  std::mt19937 rng_;
};

}  // namespace

SectorContext sector_ordering(int m, cplx k) {
  if (m < 1) throw IndexOutOfRange("m must be >= 1");
  const double mag = std::abs(k);
  if (mag == 0.0) throw OnCriticalRay("k = 0");
  SectorContext ctx;
  ctx.m = m;
  ctx.k = k;
  ctx.order = ordering_at(m, k);
  for (std::size_t i = 0; i + 1 < ctx.order.size(); ++i) {
    const double a = std::imag(k * omega(m, ctx.order[i]));
    const double b = std::imag(k * omega(m, ctx.order[i + 1]));
    if (b - a < kTieTolerance * mag) {
      std::ostringstream msg;
      msg << "Im(k w_" << ctx.order[i] << ") = Im(k w_" << ctx.order[i + 1] << ") at k = " << k;
      throw OnCriticalRay(msg.str());
    }
  }
  for (int j = 0; j < 2 * m; ++j)
    if (std::abs(std::imag(k * omega(m, j))) < kTieTolerance * mag) {
      std::ostringstream msg;
      msg << "Im(k w_" << j << ") = 0 at k = " << k;
      throw OnCriticalRay(msg.str());
    }
  split_by_decay(m, k, ctx.decaying, ctx.growing);
  ctx.sector = sector_of(m, k);
  return ctx;
}

int sector_count(int m) {
  if (m < 1) throw IndexOutOfRange("m must be >= 1");
  return m == 1 ? 2 : 4 * m;
}

int sector_of(int m, cplx k) {
  const int n = sector_count(m);
  const int id = static_cast<int>(std::floor(wrapped_arg(k) / sector_width(m)));
  return std::clamp(id, 0, n - 1);
}

SectorInfo sector_info(int m, int id) {
  if (id < 0 || id >= sector_count(m)) throw IndexOutOfRange("sector id outside [0, sector_count)");
  SectorInfo info;
  info.id = id;
  const double w = sector_width(m);
  info.theta_lo = id * w;
  info.theta_hi = (id + 1) * w;
  const cplx mid = std::polar(1.0, 0.5 * (info.theta_lo + info.theta_hi));
  info.order = ordering_at(m, mid);
  split_by_decay(m, mid, info.decaying, info.growing);
  for (int j : info.order) info.label += std::to_string(j);
  return info;
}

Eigen::MatrixXcd boundary_matrix(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns) {
  const int m = v.m();
  if (static_cast<int>(columns.size()) != m) throw IndexOutOfRange("boundary matrix needs m columns");
  Eigen::MatrixXcd a(m, m);
  for (int c = 0; c < m; ++c) {
    const auto jet = v.evaluate_jet(columns[static_cast<std::size_t>(c)], 0.0, k, m);
    for (int d = 0; d < m; ++d) a(d, c) = jet[static_cast<std::size_t>(d)];
  }
  return a;
}

cplx wronskian(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns) {
  return boundary_matrix(v, k, columns).determinant();
}

cplx wronskian(const SolutionCoefficients& v, cplx k) {
  return wronskian(v, k, sector_ordering(v.m(), k).decaying);
}

cplx minor_A(const SolutionCoefficients& v, cplx k, const std::vector<int>& columns, int replace_col, int s) {
  const int m = v.m();
  if (replace_col < 0 || replace_col >= m) throw IndexOutOfRange("replace_col outside [0, m-1]");
  if (s < 0 || s >= 2 * m) throw IndexOutOfRange("solution index outside [0, 2m-1]");
  auto a = boundary_matrix(v, k, columns);
  const auto jet = v.evaluate_jet(s, 0.0, k, m);
  for (int d = 0; d < m; ++d) a(d, replace_col) = jet[static_cast<std::size_t>(d)];
  return a.determinant();
}

cplx minor_A(const SolutionCoefficients& v, cplx k, int replace_col, int s) {
  const auto ctx = sector_ordering(v.m(), k);
  if (std::find(ctx.growing.begin(), ctx.growing.end(), s) == ctx.growing.end())
    throw IndexOutOfRange("solution " + std::to_string(s) + " is not growing at this k");
  return minor_A(v, k, ctx.decaying, replace_col, s);
}

int winding_number(const std::function<cplx(cplx)>& f, const std::vector<cplx>& vertices, double floor) {
  if (vertices.size() < 3) throw IndexOutOfRange("contour needs at least 3 vertices");
  std::vector<Curve> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const cplx a = vertices[i];
    const cplx b = vertices[(i + 1) % vertices.size()];
    edges.push_back([a, b](double s) { return a + s * (b - a); });
  }
  return wind_curves(f, edges, floor);
}

SpectrumReport find_eigenvalues(const SolutionCoefficients& v, int sector, double r_min, double r_max,
                                const SpectrumOptions& options) {
  const int m = v.m();
  const auto info = sector_info(m, sector);
  if (!(r_min > 0.0) || !(r_max > r_min)) throw IndexOutOfRange("annulus needs 0 < r_min < r_max");

  SpectrumReport report;
  report.sector = sector;
  report.label = info.label;
  report.r_min = r_min;
  report.r_max = r_max;

  const PolarBox outer{r_min, r_max, info.theta_lo + options.ray_inset, info.theta_hi - options.ray_inset};

  // lattice poles strictly inside the sector must not sit on the circles
  const double guard = std::max(v.pole_guard(), 1e-9);
  for (const cplx p : active_poles(v)) {
    const double t = wrapped_arg(p);
    if (t <= outer.t0 || t >= outer.t1) continue;
    const double r = std::abs(p);
    if (std::abs(r - r_min) < guard || std::abs(r - r_max) < guard) {
      std::ostringstream msg;
      msg << "lattice pole k = " << p << " lies on the circle |k| = " << (std::abs(r - r_min) < guard ? r_min : r_max);
      throw PoleOnContour(msg.str());
    }
  }

  const auto columns = info.decaying;
  auto w = [&v, columns](cplx k) { return wronskian(v, k, columns); };
  auto scale = [&v, columns](cplx k) { return std::max(magnitude_bound(v, k, columns), 1e-300); };

  RootSearch search(w, scale, options);
  report.count = search.count_checked(outer);
  search.search(outer, report.count, 0, report.eigenvalues);

  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    if (std::abs(a.k) != std::abs(b.k)) return std::abs(a.k) < std::abs(b.k);
    return std::arg(a.k) < std::arg(b.k);
  });
  int total = 0;
  for (const auto& e : report.eigenvalues) total += e.multiplicity;
  if (total != report.count) {
    std::ostringstream msg;
    msg << "sum of multiplicities " << total << " != argument-principle count " << report.count;
    throw CountMismatch(msg.str());
  }
  return report;
}

ResidueIdentityReport verify_residue_identity(const SolutionCoefficients& v, int n, int j, int vv,
                                              const std::vector<double>& grid) {
  const int m = v.m();
  if (n < 1 || n > v.truncation()) throw IndexOutOfRange("n outside [1, A]");
  if (j < 1 || j >= 2 * m) throw InvalidPole("j outside [1, 2m-1]");
  if (vv < 0 || vv >= 2 * m) throw IndexOutOfRange("v outside [0, 2m-1]");

  ResidueIdentityReport rep;
  rep.n = n;
  rep.j = j;
  rep.v = vv;
  rep.target = (j + vv) % (2 * m);
  rep.pole = pole_k(m, n, j, vv);
  rep.expected = v.pole(vv, n, j, n) / (omega(m, vv) * (1.0 - omega(m, j)));

  std::vector<cplx> res, tgt;
  for (double x : grid) {
    res.push_back(v.residue(vv, n, j, x));
    tgt.push_back(v.evaluate(rep.target, x, rep.pole));
  }
  cplx num{};
  double den = 0.0;
  double res_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    num += res[i] * std::conj(tgt[i]);
    den += std::norm(tgt[i]);
    res_max = std::max(res_max, std::abs(res[i]));
  }
  rep.fitted = den > 0.0 ? num / den : cplx{};
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(res[i] - rep.fitted * tgt[i]));
  rep.spread = res_max > 0.0 ? worst / res_max : 0.0;
  rep.mismatch = std::abs(rep.fitted - rep.expected);
  return rep;
}

double bilinear_identity_defect(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double x) {
  const int m = v.m();
  const cplx k2m1 = ipow(k, 2 * m - 1);
  double worst = 0.0;
  for (int j = 0; j < 2 * m; ++j) {
    cplx sum{};
    for (int s = 0; s < 2 * m; ++s)
      sum += I * omega(m, s) / (2.0 * m * k2m1) * r.evaluate(s, x, k) * v.evaluate(s, x, k, j);
    const cplx want = j == 2 * m - 1 ? cplx(1.0) : cplx{};
    worst = std::max(worst, std::abs(sum - want));
  }
  return worst;
}

ResolventKernel::ResolventKernel(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double tol)
    : v_(v), r_(r), k_(k), ctx_(sector_ordering(v.m(), k)) {
  const int m = v.m();
  if (r.m() != m) throw IndexOutOfRange("forward and adjoint tables have different orders");
  w_ = pencil::wronskian(v, k, ctx_.decaying);
  if (std::abs(w_) < tol * magnitude_bound(v, k, ctx_.decaying)) {
    std::ostringstream msg;
    msg << "|W(k)| = " << std::abs(w_) << " at k = " << k;
    throw EigenvalueHit(msg.str());
  }
  const cplx k2m1 = ipow(k, 2 * m - 1);
  for (int s = 0; s < 2 * m; ++s) kappa_.push_back(I * omega(m, s) / (2.0 * m * k2m1));
  ratio_.assign(static_cast<std::size_t>(m), std::vector<cplx>(static_cast<std::size_t>(m)));
  for (int dp = 0; dp < m; ++dp)
    for (int gp = 0; gp < m; ++gp)
      ratio_[static_cast<std::size_t>(dp)][static_cast<std::size_t>(gp)] =
          minor_A(v, k, ctx_.decaying, dp, ctx_.growing[static_cast<std::size_t>(gp)]) / w_;
}

cplx ResolventKernel::operator()(double x, double t, int d) const {
  const int m = v_.m();
  if (d < 0 || d >= 2 * m) throw IndexOutOfRange("kernel derivative order outside [0, 2m-1]");
  cplx sum{};
  for (std::size_t gp = 0; gp < ctx_.growing.size(); ++gp) {
    const int g = ctx_.growing[gp];
    const cplx pg = kappa_[static_cast<std::size_t>(g)] * r_.evaluate(g, t, k_);
    cplx mix{};
    for (std::size_t dp = 0; dp < ctx_.decaying.size(); ++dp)
      mix += v_.evaluate(ctx_.decaying[dp], x, k_, d) * ratio_[dp][gp];
    sum += pg * mix;
    if (t > x) sum -= pg * v_.evaluate(g, x, k_, d);
  }
  if (t <= x)
    for (int dd : ctx_.decaying)
      sum += kappa_[static_cast<std::size_t>(dd)] * v_.evaluate(dd, x, k_, d) * r_.evaluate(dd, t, k_);
  return sum;
}

cplx ResolventKernel::apply(const std::function<double(double)>& psi, double a, double b, double x, int d,
                            int panels) const {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  auto integrate = [&](double lo, double hi) {
    cplx total{};
    if (!(hi > lo)) return total;
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (double sgn : {-1.0, 1.0}) {
          const double t = c + sgn * 0.5 * h * nodes[i];
          total += 0.5 * h * weights[i] * (*this)(x, t, d) * psi(t);
        }
    }
    return total;
  };
  return integrate(a, std::min(b, x)) + integrate(std::max(a, x), b);
}

cplx resolvent_kernel(const SolutionCoefficients& v, const AdjointCoefficients& r, cplx k, double x, double t,
                      int d) {
  return ResolventKernel(v, r, k)(x, t, d);
}

}  // namespace pencil
