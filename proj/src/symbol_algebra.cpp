#include "pencil/symbol_algebra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "pencil/errors.hpp"

namespace pencil {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

ComplexPolynomial::ComplexPolynomial(std::vector<cplx> coefficients) : c_(std::move(coefficients)) {
  normalize();
}

ComplexPolynomial::ComplexPolynomial(std::initializer_list<cplx> coefficients) : c_(coefficients) {
  normalize();
}

ComplexPolynomial ComplexPolynomial::constant(cplx c) { return ComplexPolynomial({c}); }

ComplexPolynomial ComplexPolynomial::monomial(int degree, cplx c) {
  std::vector<cplx> v(static_cast<std::size_t>(degree + 1));
  v.back() = c;
  return ComplexPolynomial(std::move(v));
}

ComplexPolynomial ComplexPolynomial::linear_power(cplx a, cplx b, int power) {
  std::vector<cplx> v(static_cast<std::size_t>(power + 1));
  for (int q = 0; q <= power; ++q)
    v[static_cast<std::size_t>(q)] = binomial(power, q) * ipow(a, power - q) * ipow(b, q);
  return ComplexPolynomial(std::move(v));
}

void ComplexPolynomial::normalize() {
  while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
}

cplx ComplexPolynomial::coeff(int i) const noexcept {
  if (i < 0 || i >= static_cast<int>(c_.size())) return {};
  return c_[static_cast<std::size_t>(i)];
}

cplx ComplexPolynomial::operator()(cplx k) const noexcept {
  cplx acc{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + *it;
  return acc;
}

double ComplexPolynomial::scale_at(cplx k) const noexcept {
  double acc = 0.0;
  const double r = std::abs(k);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

ComplexPolynomial& ComplexPolynomial::operator+=(const ComplexPolynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  normalize();
  return *this;
}

ComplexPolynomial& ComplexPolynomial::operator-=(const ComplexPolynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  normalize();
  return *this;
}

ComplexPolynomial& ComplexPolynomial::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  normalize();
  return *this;
}

ComplexPolynomial operator*(const ComplexPolynomial& a, const ComplexPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> out(a.c_.size() + b.c_.size() - 1);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return ComplexPolynomial(std::move(out));
}

ComplexPolynomial poly_div_at_root(const ComplexPolynomial& numerator, cplx root, cplx slope) {
  if (numerator.is_zero()) return {};
  const auto& a = numerator.coefficients();
  const int deg = numerator.degree();
  // synthetic division by (k - root)
  std::vector<cplx> q(static_cast<std::size_t>(std::max(deg, 0)));
  cplx carry = a[static_cast<std::size_t>(deg)];
  for (int i = deg - 1; i >= 0; --i) {
    q[static_cast<std::size_t>(i)] = carry;
    carry = a[static_cast<std::size_t>(i)] + carry * root;
  }
  const double scale = std::max(numerator.scale_at(root), 1e-300);
  if (std::abs(carry) > kDivisionTolerance * scale) {
    std::ostringstream msg;
    msg << "numerator(" << root << ") = " << carry << " relative to scale " << scale;
    throw NotDivisible(msg.str());
  }
  ComplexPolynomial quotient(std::move(q));
  quotient *= 1.0 / slope;
  return quotient;
}

cplx PoleContext::slope(int j) const {
  return static_cast<double>(sign) * omega(m, tau) * (1.0 - omega(m, j));
}

cplx PoleContext::root(int n, int j) const {
  if (j <= 0 || j >= 2 * m) throw InvalidPole("j outside [1, 2m-1]");
  return -I * static_cast<double>(n) / slope(j);
}

cplx PoleContext::divisor(int n, int j, cplx k) const {
  return I * static_cast<double>(n) + slope(j) * k;
}

PolePolynomial::PolePolynomial(PoleContext ctx, ComplexPolynomial poly, Poles poles)
    : ctx_(ctx), poly_(std::move(poly)) {
  for (const auto& [key, b] : poles) add_pole(key.n, key.j, b);
}

cplx PolePolynomial::pole(int n, int j) const noexcept {
  auto it = poles_.find({n, j});
  return it == poles_.end() ? cplx{} : it->second;
}

int PolePolynomial::max_pole_n() const noexcept {
  int n = 0;
  for (const auto& [key, b] : poles_) n = std::max(n, key.n);
  return n;
}

void PolePolynomial::add_pole(int n, int j, cplx b) {
  if (j <= 0 || j >= 2 * ctx_.m || n < 1) throw InvalidPole("pole key outside lattice");
  if (b == cplx{}) return;
  auto [it, inserted] = poles_.try_emplace({n, j}, b);
  if (!inserted) {
    it->second += b;
    if (it->second == cplx{}) poles_.erase(it);
  }
}

cplx PolePolynomial::operator()(cplx k) const {
  cplx acc = poly_(k);
  if (poles_.empty()) return acc;
  constexpr std::size_t kStack = 32;
  std::array<cplx, kStack> small{};
  std::vector<cplx> large;
  cplx* sk = small.data();
  if (static_cast<std::size_t>(2 * ctx_.m) > kStack) {
    large.resize(static_cast<std::size_t>(2 * ctx_.m));
    sk = large.data();
  }
  for (int j = 1; j < 2 * ctx_.m; ++j) sk[j] = ctx_.slope(j) * k;
  for (const auto& [key, b] : poles_) acc += b / (I * static_cast<double>(key.n) + sk[key.j]);
  return acc;
}

PolePolynomial& PolePolynomial::operator+=(const PolePolynomial& o) {
  poly_ += o.poly_;
  for (const auto& [key, b] : o.poles_) add_pole(key.n, key.j, b);
  return *this;
}

PolePolynomial& PolePolynomial::operator*=(cplx s) {
  poly_ *= s;
  if (s == cplx{}) {
    poles_.clear();
  } else {
    for (auto& [key, b] : poles_) b *= s;
  }
  return *this;
}

PolePolynomial pp_mul_split(const PolePolynomial& f, const ComplexPolynomial& g) {
  const auto& ctx = f.context();
  PolePolynomial out(ctx, f.poly() * g);
  if (g.is_zero()) return out;
  ComplexPolynomial absorbed;
  for (const auto& [key, b] : f.poles()) {
    const cplx root = ctx.root(key.n, key.j);
    const cplx g_root = g(root);
    out.add_pole(key.n, key.j, b * g_root);
    if (g.degree() >= 1) {
      auto q = poly_div_at_root(g - ComplexPolynomial::constant(g_root), root, ctx.slope(key.j));
      absorbed += q * b;
    }
  }
  out.set_poly(out.poly() + absorbed);
  return out;
}

ComplexPolynomial quotient_main(int m, int n, int j, int tau, int alpha) {
  const cplx w = omega(m, tau);
  auto numerator = ComplexPolynomial::linear_power(I * static_cast<double>(alpha), w, 2 * m);
  // the k^{2m} coefficient is w^{2m} - 1 = 0
  std::vector<cplx> c = numerator.coefficients();
  c.resize(static_cast<std::size_t>(2 * m + 1));
  c[static_cast<std::size_t>(2 * m)] = 0.0;
  const cplx knj = pole_k(m, n, j, 0);
  const cplx subtracted = ipow(I * static_cast<double>(alpha) + knj, 2 * m) - ipow(knj, 2 * m);
  c[0] -= subtracted;
  const PoleContext ctx{m, tau, 1};
  return poly_div_at_root(ComplexPolynomial(std::move(c)), ctx.root(n, j), ctx.slope(j));
}

ComplexPolynomial quotient_general(int m, int n, int j, int tau, int s, int gamma, int t) {
  const cplx w = omega(m, tau);
  auto g = ComplexPolynomial::monomial(s) *
           ComplexPolynomial::linear_power(-static_cast<double>(t), I * w, gamma);
  const cplx knjt = pole_k(m, n, j, tau);
  const cplx knj = pole_k(m, n, j, 0);
  const cplx subtracted = ipow(knjt, s) * ipow(I * knj - static_cast<double>(t), gamma);
  const PoleContext ctx{m, tau, 1};
  return poly_div_at_root(g - ComplexPolynomial::constant(subtracted), ctx.root(n, j), ctx.slope(j));
}

}  // namespace pencil
