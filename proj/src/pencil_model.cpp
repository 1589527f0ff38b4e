#include "pencil/pencil_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "pencil/errors.hpp"

namespace pencil {

namespace {

double canonical_component(double v) {
  constexpr double snap = 1e-15;
  if (std::abs(v) < snap) return 0.0;
  if (std::abs(v - 1.0) < snap) return 1.0;
  if (std::abs(v + 1.0) < snap) return -1.0;
  return v;
}

void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

PencilOrder::PencilOrder(int m) : m_(m) {
  if (m < 1) throw IndexOutOfRange("half-order m must be >= 1, got " + std::to_string(m));
}

namespace {

cplx compute_omega(int m, int j) {
  const double angle = std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
  cplx w{std::cos(angle), std::sin(angle)};
  double re = canonical_component(w.real());
  double im = canonical_component(w.imag());
  // exact +-1 and +-i
  if (re == 0.0 || im == 0.0) {
    if (re == 0.0) im = im > 0 ? 1.0 : -1.0;
    if (im == 0.0) re = re > 0 ? 1.0 : -1.0;
  }
  return {re, im};
}

constexpr int kCachedOrders = 16;

const std::vector<std::vector<cplx>>& omega_cache() {
  static const auto table = [] {
    std::vector<std::vector<cplx>> t(kCachedOrders + 1);
    for (int m = 1; m <= kCachedOrders; ++m)
      for (int j = 0; j < 2 * m; ++j) t[static_cast<std::size_t>(m)].push_back(compute_omega(m, j));
    return t;
  }();
  return table;
}

}  // namespace

cplx omega(int m, int j) {
  if (m < 1) throw IndexOutOfRange("m must be >= 1");
  if (j < 0 || j >= 2 * m)
    throw IndexOutOfRange("omega index j=" + std::to_string(j) + " outside [0, 2m-1]");
  if (m <= kCachedOrders) return omega_cache()[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
  return compute_omega(m, j);
}

cplx pole_k(int m, int n, int j, int tau) {
  if (j == 0) throw InvalidPole("j = 0 has 1 - omega_0 = 0");
  if (j < 0 || j >= 2 * m) throw InvalidPole("j=" + std::to_string(j) + " outside [1, 2m-1]");
  if (n < 1) throw InvalidPole("n must be >= 1");
  if (tau < 0 || tau >= 2 * m) throw IndexOutOfRange("tau outside [0, 2m-1]");
  return -I * static_cast<double>(n) / (omega(m, tau) * (1.0 - omega(m, j)));
}

PoleLattice::PoleLattice(PencilOrder order) : order_(order) {
  const int d = order.D();
  unit_.reserve(static_cast<std::size_t>(d * (d - 1)));
  for (int tau = 0; tau < d; ++tau)
    for (int j = 1; j < d; ++j) unit_.push_back(pole_k(order.m(), 1, j, tau));

  std::vector<cplx> pts;
  for (int n = 1; n <= 2; ++n)
    for (const cplx& u : unit_) pts.push_back(static_cast<double>(n) * u);
  spacing_ = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double dist = std::abs(pts[a] - pts[b]);
      if (dist > 1e-12) spacing_ = std::min(spacing_, dist);
    }
}

cplx PoleLattice::operator()(int n, int j, int tau) const {
  const int d = order_.D();
  if (j <= 0 || j >= d) throw InvalidPole("j outside [1, 2m-1]");
  if (n < 1) throw InvalidPole("n must be >= 1");
  if (tau < 0 || tau >= d) throw IndexOutOfRange("tau outside [0, 2m-1]");
  return static_cast<double>(n) * unit_[static_cast<std::size_t>(tau * (d - 1) + (j - 1))];
}

std::vector<std::pair<int, int>> coefficient_slots(int m) {
  std::vector<std::pair<int, int>> slots;
  for (int gamma = 0; gamma <= 2 * m - 2; ++gamma)
    for (int s = 0; s <= 2 * m - gamma - 1; ++s) slots.emplace_back(gamma, s);
  return slots;
}

PotentialCoefficients::PotentialCoefficients(PencilOrder order) : order_(order) {}

PotentialCoefficients PotentialCoefficients::build(int m, std::span<const CoefficientEntry> entries) {
  PotentialCoefficients p{PencilOrder(m)};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto where = "entry " + std::to_string(i) + " (gamma=" + std::to_string(e.gamma) +
                       ", s=" + std::to_string(e.s) + ", n=" + std::to_string(e.n) + ")";
    if (e.gamma < 0 || e.gamma > 2 * m - 2)
      throw IndexOutOfRange(where + ": gamma must lie in [0, " + std::to_string(2 * m - 2) + "]");
    if (e.s < 0 || e.s > 2 * m - e.gamma - 1)
      throw IndexOutOfRange(where + ": s must lie in [0, " + std::to_string(2 * m - e.gamma - 1) + "]");
    if (e.n < 1) throw IndexOutOfRange(where + ": n must be >= 1");
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw IndexOutOfRange(where + ": value is not finite");
    p.table_[{e.gamma, e.s, e.n}] += e.value;
  }
  for (const auto& [key, value] : p.table_) {
    p.max_harmonic_ = std::max(p.max_harmonic_, key.n);
    p.weighted_norm_ += std::pow(static_cast<double>(key.n), key.gamma + key.s) * std::abs(value);
  }
  return p;
}

PotentialCoefficients build_potential(int m, std::span<const CoefficientEntry> entries) {
  return PotentialCoefficients::build(m, entries);
}

cplx PotentialCoefficients::at(int gamma, int s, int n) const {
  auto it = table_.find({gamma, s, n});
  return it == table_.end() ? cplx{} : it->second;
}

std::vector<CoefficientEntry> PotentialCoefficients::harmonic(int n) const {
  std::vector<CoefficientEntry> out;
  for (const auto& [key, value] : table_)
    if (key.n == n) out.push_back({key.gamma, key.s, key.n, value});
  return out;
}

std::vector<CoefficientEntry> PotentialCoefficients::entries() const {
  std::vector<CoefficientEntry> out;
  out.reserve(table_.size());
  for (const auto& [key, value] : table_) out.push_back({key.gamma, key.s, key.n, value});
  return out;
}

cplx PotentialCoefficients::eval_coefficient(int gamma, double x, cplx k) const {
  if (gamma < 0 || gamma > 2 * m() - 2)
    throw IndexOutOfRange("gamma=" + std::to_string(gamma) + " outside [0, 2m-2]");
  cplx sum{};
  for (const auto& [key, value] : table_) {
    if (key.gamma != gamma) continue;
    sum += value * ipow(k, key.s) * std::exp(-static_cast<double>(key.n) * x);
  }
  return sum;
}

PotentialCoefficients PotentialCoefficients::scaled(cplx factor) const {
  auto entries_now = entries();
  for (auto& e : entries_now) e.value *= factor;
  return build(m(), entries_now);
}

std::size_t PotentialCoefficients::fingerprint() const noexcept {
  std::size_t seed = std::hash<int>{}(m());
  for (const auto& [key, value] : table_) {
    hash_combine(seed, std::hash<int>{}(key.gamma));
    hash_combine(seed, std::hash<int>{}(key.s));
    hash_combine(seed, std::hash<int>{}(key.n));
    hash_combine(seed, std::hash<double>{}(value.real()));
    hash_combine(seed, std::hash<double>{}(value.imag()));
  }
  return seed;
}

}  // namespace pencil
