#pragma once

#include "hrdair/theory/bounds.hpp"
#include "hrdair/theory/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hrdair {

struct BitBounds {
  int floor = 1;
  int cap = 12;
};

/// s_t = sum_{w in block t, rho_w > 0} lambda_w^2 / rho_w.
inline VectorXd block_weights(const VectorXd& rho, const VectorXd& lambda_bar, int D) {
  require(rho.size() == lambda_bar.size() && D >= 1 && rho.size() % D == 0, "dimension mismatch");
  const Eigen::Index T = rho.size() / D;
  VectorXd s = VectorXd::Zero(T);
  for (Eigen::Index w = 0; w < rho.size(); ++w)
    if (rho(w) > 0) s(w / D) += lambda_bar(w) * lambda_bar(w) / rho(w);
  return s;
}

/// sum_t s_t (psi1 2^B_t + psi2 2^{-2B_t/(D-1)}).
inline double bit_allocation_objective(const ErrorCoefficients& c, const VectorXd& weights, const VectorXd& bits) {
  double v = 0.0;
  for (Eigen::Index t = 0; t < bits.size(); ++t)
    if (weights(t) > 0) v += weights(t) * c.value(bits(t));
  return v;
}

/// Linearized surrogate sum_w (2 rho_w/lambda_w - c_w - c^e_w(B)) lambda_w^2 / rho_w; equals G when lambda is tight.
inline double bit_allocation_surrogate(const GmmModel& gmm, const VectorXd& lambda_bar, const ErrorCoefficients& c,
                                       const VectorXd& bits) {
  const VectorXd& rho = gmm.rho();
  const int D = c.D;
  require(bits.size() * D == rho.size(), "bit vector does not match the feature dimension");
  double v = 0.0;
  for (Eigen::Index w = 0; w < rho.size(); ++w) {
    if (!(rho(w) > 0) || !(lambda_bar(w) > 0)) continue;
    const double l = lambda_bar(w);
    v += (2.0 * rho(w) / l - gmm.cov_diag()(w) - c.value(bits(w / D))) * l * l / rho(w);
  }
  return v;
}

namespace detail {

/// Root of s g'(B) = -mu on [lo, hi] (clamped).
inline double block_bits_for_multiplier(const ErrorCoefficients& c, double s, double mu, double lo, double hi) {
  auto h = [&](double b) { return s * c.derivative(b) + mu; };
  if (h(lo) >= 0) return lo;
  if (h(hi) <= 0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double m = 0.5 * (lo + hi);
    (h(m) > 0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Continuous minimizer of sum_t s_t g(B_t) subject to sum B_t = B and floor <= B_t <= cap.
/// Blocks with zero weight sit at the floor unless the others are saturated.
inline VectorXd solve_bit_allocation_continuous(const ErrorCoefficients& c, const VectorXd& weights, int B,
                                                BitBounds bounds = {}) {
  const Eigen::Index T = weights.size();
  require(T >= 1, "need at least one block");
  require(c.psi1 >= 0 && c.psi2 >= 0 && c.psi1 + c.psi2 > 0, "psi coefficients must be non-negative, not both 0");
  if (B < T * bounds.floor) throw ParameterError("total bits below the per-block floor");
  if (B > T * bounds.cap) throw ParameterError("total bits above the per-block cap");
  const double lo = bounds.floor, hi = bounds.cap;

  std::vector<Eigen::Index> pos, zero;
  for (Eigen::Index t = 0; t < T; ++t) (weights(t) > 0 ? pos : zero).push_back(t);
  VectorXd bits = VectorXd::Constant(T, lo);
  if (pos.empty()) return VectorXd::Constant(T, static_cast<double>(B) / T);

  const double np = static_cast<double>(pos.size());
  double budget = B - lo * static_cast<double>(zero.size());
  budget = std::clamp(budget, np * lo, np * hi);
  double leftover = B - budget - lo * static_cast<double>(zero.size());
  for (Eigen::Index t : zero) bits(t) = lo + leftover / static_cast<double>(zero.size());

  auto total = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index t : pos) s += detail::block_bits_for_multiplier(c, weights(t), mu, lo, hi);
    return s;
  };
  double mu_lo = kInf, mu_hi = -kInf;  // total(mu_lo) = np*hi, total(mu_hi) = np*lo
  for (Eigen::Index t : pos) {
    mu_lo = std::min(mu_lo, -weights(t) * c.derivative(hi));
    mu_hi = std::max(mu_hi, -weights(t) * c.derivative(lo));
  }
  mu_lo -= 1.0 + std::abs(mu_lo);
  mu_hi += 1.0 + std::abs(mu_hi);
  for (int i = 0; i < 300; ++i) {
    const double m = 0.5 * (mu_lo + mu_hi);
    if (m == mu_lo || m == mu_hi) break;
    (total(m) > budget ? mu_lo : mu_hi) = m;
  }
  const double mu = 0.5 * (mu_lo + mu_hi);
  double sum = 0.0;
  for (Eigen::Index t : pos) {
    bits(t) = detail::block_bits_for_multiplier(c, weights(t), mu, lo, hi);
    sum += bits(t);
  }
  // spread the bisection residue over unsaturated blocks
  double resid = budget - sum;
  for (Eigen::Index t : pos) {
    if (std::abs(resid) < 1e-15) break;
    const double nb = std::clamp(bits(t) + resid, lo, hi);
    resid -= nb - bits(t);
    bits(t) = nb;
  }
  return bits;
}

/// Integer allocation near `continuous`: largest-remainder rounding, then unit exchanges between
/// blocks while they lower the objective (exact for separable convex objectives).
inline VectorXi round_bit_allocation(const VectorXd& continuous, const ErrorCoefficients& c, const VectorXd& weights,
                                     int B, BitBounds bounds = {}) {
  const Eigen::Index T = continuous.size();
  VectorXi bits(T);
  std::vector<std::pair<double, Eigen::Index>> frac;
  int used = 0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double v = std::clamp(continuous(t), double(bounds.floor), double(bounds.cap));
    bits(t) = static_cast<int>(std::floor(v + 1e-9));
    bits(t) = std::clamp(bits(t), bounds.floor, bounds.cap);
    frac.emplace_back(v - bits(t), t);
    used += bits(t);
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < B; i = (i + 1) % frac.size()) {
    const Eigen::Index t = frac[i].second;
    if (bits(t) < bounds.cap) {
      ++bits(t);
      ++used;
    }
  }
  for (auto it = frac.rbegin(); used > B && it != frac.rend(); ++it)
    if (bits(it->second) > bounds.floor) {
      --bits(it->second);
      --used;
    }

  auto cost = [&](Eigen::Index t, int b) { return weights(t) > 0 ? weights(t) * c.value(b) : 0.0; };
  for (int guard = 0; guard < 100 * B + 100; ++guard) {
    double best = 0.0;
    Eigen::Index from = -1, to = -1;
    for (Eigen::Index i = 0; i < T; ++i) {
      if (bits(i) <= bounds.floor) continue;
      const double gain_i = cost(i, bits(i) - 1) - cost(i, bits(i));
      for (Eigen::Index j = 0; j < T; ++j) {
        if (j == i || bits(j) >= bounds.cap) continue;
        const double delta = gain_i + cost(j, bits(j) + 1) - cost(j, bits(j));
        if (delta < best - 1e-14 * (std::abs(cost(i, bits(i))) + std::abs(cost(j, bits(j))))) {
          best = delta;
          from = i;
          to = j;
        }
      }
    }
    if (from < 0) break;
    --bits(from);
    ++bits(to);
  }
  return bits;
}

/// Integer bit allocation maximizing the linearized surrogate at lambda_bar.
inline VectorXi solve_bit_allocation(double psi1, double psi2, const GmmModel& gmm, const VectorXd& lambda_bar, int B,
                                     int T, int D, BitBounds bounds = {}) {
  require(psi1 > 0 && psi2 > 0, "psi1 and psi2 must be positive");
  require(T * D == gmm.dim(), "T * D must equal W");
  for (Eigen::Index w = 0; w < lambda_bar.size(); ++w) require(lambda_bar(w) >= 0, "lambda must be non-negative");
  const ErrorCoefficients c{psi1, psi2, D};
  const VectorXd s = block_weights(gmm.rho(), lambda_bar, D);
  return round_bit_allocation(solve_bit_allocation_continuous(c, s, B, bounds), c, s, B, bounds);
}

}  // namespace hrdair
