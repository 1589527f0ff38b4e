#include "pencil/series.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pencil/errors.hpp"

namespace pencil {

SeriesTable::SeriesTable(PencilOrder order, SeriesKind kind, int truncation, std::size_t fingerprint,
                         std::vector<std::vector<PolePolynomial>> levels)
    : order_(order),
      kind_(kind),
      truncation_(truncation),
      fingerprint_(fingerprint),
      lattice_(order),
      levels_(std::move(levels)) {}

const PolePolynomial& SeriesTable::level(int tau, int alpha) const {
  if (tau < 0 || tau >= order_.D()) throw IndexOutOfRange("tau outside [0, 2m-1]");
  if (alpha < 0 || alpha > truncation_) throw IndexOutOfRange("level outside [0, A]");
  return levels_[static_cast<std::size_t>(tau)][static_cast<std::size_t>(alpha)];
}

std::span<const PolePolynomial> SeriesTable::levels(int tau) const {
  if (tau < 0 || tau >= order_.D()) throw IndexOutOfRange("tau outside [0, 2m-1]");
  return levels_[static_cast<std::size_t>(tau)];
}

cplx SeriesTable::constant(int tau, int alpha) const { return level(tau, alpha).poly().coeff(0); }

cplx SeriesTable::pole(int tau, int n, int j, int alpha) const { return level(tau, alpha).pole(n, j); }

cplx SeriesTable::pole_location(int tau, int n, int j) const {
  return engine::context(m(), kind_, tau).root(n, j);
}

double SeriesTable::distance_to_poles(int tau, cplx k) const {
  const auto ctx = engine::context(m(), kind_, tau);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j < order_.D(); ++j) {
    const cplx u = ctx.root(1, j);
    const double proj = std::real(k * std::conj(u)) / std::norm(u);
    const int n = std::clamp(static_cast<int>(std::lround(proj)), 1, std::max(truncation_, 1));
    best = std::min(best, std::abs(k - static_cast<double>(n) * u));
  }
  return best;
}

void SeriesTable::check_pole_guard(int tau, cplx k) const {
  if (truncation_ < 1) return;
  const double dist = distance_to_poles(tau, k);
  if (dist < pole_guard()) {
    std::ostringstream msg;
    msg << "k = " << k << " lies within " << dist << " of a lattice pole of series " << tau;
    throw NearPole(msg.str());
  }
}

cplx SeriesTable::evaluate(int tau, double x, cplx k, int d) const {
  check_pole_guard(tau, k);
  return evaluate_unguarded(tau, x, k, d);
}

cplx SeriesTable::evaluate_unguarded(int tau, double x, cplx k, int d) const {
  if (d < 0 || d > order_.D()) throw IndexOutOfRange("derivative order outside [0, 2m]");
  const cplx lambda = static_cast<double>(kind_sign(kind_)) * I * k * omega(m(), tau);
  const auto lv = levels(tau);
  cplx sum{};
  double decay = 1.0;
  const double step = std::exp(-x);
  for (int alpha = 0; alpha <= truncation_; ++alpha) {
    const cplx rate = lambda - static_cast<double>(alpha);
    sum += lv[static_cast<std::size_t>(alpha)](k) * ipow(rate, d) * decay;
    decay *= step;
  }
  return sum * std::exp(lambda * x);
}

std::vector<cplx> SeriesTable::evaluate_jet(int tau, double x, cplx k, int count) const {
  if (count < 1 || count > order_.D() + 1) throw IndexOutOfRange("derivative count outside [1, 2m+1]");
  check_pole_guard(tau, k);
  const cplx lambda = static_cast<double>(kind_sign(kind_)) * I * k * omega(m(), tau);
  const auto lv = levels(tau);
  std::vector<cplx> out(static_cast<std::size_t>(count));
  double decay = 1.0;
  const double step = std::exp(-x);
  for (int alpha = 0; alpha <= truncation_; ++alpha) {
    const cplx rate = lambda - static_cast<double>(alpha);
    cplx term = lv[static_cast<std::size_t>(alpha)](k) * decay;
    for (auto& o : out) {
      o += term;
      term *= rate;
    }
    decay *= step;
  }
  const cplx e = std::exp(lambda * x);
  for (auto& o : out) o *= e;
  return out;
}

cplx SeriesTable::residue(int tau, int n, int j, double x, int d) const {
  const auto ctx = engine::context(m(), kind_, tau);
  const cplx root = ctx.root(n, j);
  const cplx lambda = static_cast<double>(kind_sign(kind_)) * I * root * omega(m(), tau);
  const auto lv = levels(tau);
  cplx sum{};
  for (int alpha = n; alpha <= truncation_; ++alpha) {
    const cplx rate = lambda - static_cast<double>(alpha);
    sum += lv[static_cast<std::size_t>(alpha)].pole(n, j) * ipow(rate, d) * std::exp(rate * x);
  }
  return sum / ctx.slope(j);
}

namespace engine {

PoleContext context(int m, SeriesKind kind, int tau) { return PoleContext{m, tau, kind_sign(kind)}; }

ComplexPolynomial level_divisor(int m, SeriesKind kind, int tau, int alpha) {
  const cplx rate_slope = static_cast<double>(kind_sign(kind)) * I * omega(m, tau);
  auto p = ComplexPolynomial::linear_power(-static_cast<double>(alpha), rate_slope, 2 * m);
  std::vector<cplx> c = p.coefficients();
  c.resize(static_cast<std::size_t>(2 * m + 1));
  const double parity = (m % 2 == 0) ? 1.0 : -1.0;
  for (auto& v : c) v *= parity;
  // (-1)^m (sign i w)^{2m} = 1 cancels k^{2m} exactly
  c[static_cast<std::size_t>(2 * m)] = 0.0;
  return ComplexPolynomial(std::move(c));
}

ComplexPolynomial source_factor(int m, SeriesKind kind, int tau, int gamma, int s, int r, int alpha) {
  const cplx iw = I * omega(m, tau);
  auto ks = ComplexPolynomial::monomial(s);
  if (kind == SeriesKind::Special)
    return ks * ComplexPolynomial::linear_power(-static_cast<double>(r), iw, gamma);
  return ks * ComplexPolynomial::linear_power(static_cast<double>(alpha), iw, gamma);
}

ComplexPolynomial divisor_quotient(int m, SeriesKind kind, int tau, int n, int j, int alpha) {
  const auto ctx = context(m, kind, tau);
  const auto d = level_divisor(m, kind, tau, alpha);
  const cplx root = ctx.root(n, j);
  const cplx value = n == alpha ? cplx{} : d(root);
  return poly_div_at_root(d - ComplexPolynomial::constant(value), root, ctx.slope(j));
}

PolePolynomial level_rhs(const PotentialCoefficients& potential, SeriesKind kind, int tau,
                         std::span<const PolePolynomial> lower, int alpha) {
  const int m = potential.m();
  PolePolynomial rhs(context(m, kind, tau));
  for (const auto& [key, value] : potential.table()) {
    if (key.n > alpha) continue;
    const int r = alpha - key.n;
    if (r >= static_cast<int>(lower.size())) throw IndexOutOfRange("level_rhs needs lower levels up to alpha-1");
    const auto g = source_factor(m, kind, tau, key.gamma, key.s, r, alpha);
    auto term = pp_mul_split(lower[static_cast<std::size_t>(r)], g);
    term *= -value;
    rhs += term;
  }
  return rhs;
}

PolePolynomial::Poles offdiagonal_poles(int m, SeriesKind kind, int tau, const PolePolynomial& rhs,
                                        int alpha) {
  const auto ctx = context(m, kind, tau);
  const auto d = level_divisor(m, kind, tau, alpha);
  PolePolynomial::Poles out;
  for (const auto& [key, b] : rhs.poles()) {
    if (key.n >= alpha) throw IndexOutOfRange("right-hand side pole at or above the current level");
    const cplx dv = d(ctx.root(key.n, key.j));
    if (std::abs(dv) < kResonanceTolerance) {
      std::ostringstream msg;
      msg << "(n=" << key.n << ", j=" << key.j << ", alpha=" << alpha << ") divisor " << std::abs(dv);
      throw Resonance(msg.str());
    }
    out[key] = b / dv;
  }
  return out;
}

PolePolynomial solve_level(int m, SeriesKind kind, int tau, const PolePolynomial& rhs, int alpha) {
  const auto ctx = context(m, kind, tau);
  const int deg = 2 * m - 1;
  const auto d = level_divisor(m, kind, tau, alpha);

  PolePolynomial c(ctx);
  ComplexPolynomial remainder = rhs.poly();
  for (const auto& [key, v] : offdiagonal_poles(m, kind, tau, rhs, alpha)) {
    c.add_pole(key.n, key.j, v);
    remainder -= divisor_quotient(m, kind, tau, key.n, key.j, alpha) * v;
  }

  const cplx constant = remainder.coeff(deg) / d.coeff(deg);
  remainder -= d * constant;

  const int nd = 2 * m - 1;
  Eigen::MatrixXcd mat(nd, nd);
  Eigen::VectorXcd b(nd);
  for (int j = 1; j <= nd; ++j) {
    const auto q = divisor_quotient(m, kind, tau, alpha, j, alpha);
    for (int g = 0; g < nd; ++g) mat(g, j - 1) = q.coeff(g);
  }
  for (int g = 0; g < nd; ++g) b(g) = remainder.coeff(g);

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(mat);
  lu.setThreshold(1e-12);
  if (lu.rank() < nd) {
    std::ostringstream msg;
    msg << "(alpha=" << alpha << ", tau=" << tau << ") diagonal system rank " << lu.rank() << " < " << nd;
    throw SingularLevel(msg.str());
  }
  const Eigen::VectorXcd diag = lu.solve(b);

  c.set_poly(ComplexPolynomial::constant(constant));
  for (int j = 1; j <= nd; ++j) c.add_pole(alpha, j, diag(j - 1));
  return c;
}

std::vector<cplx> level_identity_residual(int m, SeriesKind kind, int tau, const PolePolynomial& candidate,
                                          const PolePolynomial& rhs, int alpha) {
  const auto d = level_divisor(m, kind, tau, alpha);
  ComplexPolynomial lhs = d * candidate.poly().coeff(0);
  for (const auto& [key, v] : candidate.poles())
    lhs += divisor_quotient(m, kind, tau, key.n, key.j, alpha) * v;
  const auto diff = lhs - rhs.poly();
  std::vector<cplx> out(static_cast<std::size_t>(2 * m));
  for (int g = 0; g < 2 * m; ++g) out[static_cast<std::size_t>(g)] = diff.coeff(g);
  return out;
}

SeriesTable solve_table(const PotentialCoefficients& potential, SeriesKind kind, int truncation) {
  if (truncation < 1) throw IndexOutOfRange("truncation A must be >= 1");
  const int m = potential.m();
  const int dim = 2 * m;
  std::vector<std::vector<PolePolynomial>> levels(static_cast<std::size_t>(dim));
  for (int tau = 0; tau < dim; ++tau) {
    auto& lv = levels[static_cast<std::size_t>(tau)];
    const auto ctx = context(m, kind, tau);
    lv.reserve(static_cast<std::size_t>(truncation + 1));
    lv.emplace_back(ctx, ComplexPolynomial::constant(1.0));
    for (int alpha = 1; alpha <= truncation; ++alpha) {
      const auto rhs = level_rhs(potential, kind, tau, lv, alpha);
      lv.push_back(solve_level(m, kind, tau, rhs, alpha));
    }
  }
  return SeriesTable(potential.order(), kind, truncation, potential.fingerprint(), std::move(levels));
}

}  // namespace engine

}  // namespace pencil
