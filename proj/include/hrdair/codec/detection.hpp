#pragma once

#include "hrdair/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace hrdair {

struct SwompOptions {
  double threshold = 0.5;     // weak-selection fraction of the largest correlation
  int max_stages = 10;
  double rel_tol = 1e-6;      // stop once ||r|| < rel_tol ||y||
  double residual_floor = 0;  // also stop once ||r||^2 <= this (e.g. the expected noise energy)
};

namespace detail {

/// Least squares on the columns `support` of A.
inline VectorXd support_lstsq(const MatrixXd& A, const VectorXd& y, const std::vector<Eigen::Index>& support) {
  MatrixXd As(A.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) As.col(static_cast<Eigen::Index>(j)) = A.col(support[j]);
  return As.colPivHouseholderQr().solve(y);
}

inline VectorXd residual_on(const MatrixXd& A, const VectorXd& y, const std::vector<Eigen::Index>& support,
                            const VectorXd& coef) {
  VectorXd r = y;
  for (std::size_t j = 0; j < support.size(); ++j) r -= coef(static_cast<Eigen::Index>(j)) * A.col(support[j]);
  return r;
}

}  // namespace detail

/// Real stacking [Re P; Im P] so that real non-negative x solves a real least-squares problem.
inline MatrixXd stack_real(const MatrixXcd& p) {
  MatrixXd a(2 * p.rows(), p.cols());
  a.topRows(p.rows()) = p.real();
  a.bottomRows(p.rows()) = p.imag();
  return a;
}

inline VectorXd stack_real(const VectorXcd& y) {
  VectorXd v(2 * y.size());
  v.head(y.size()) = y.real();
  v.tail(y.size()) = y.imag();
  return v;
}

/// Stagewise weak OMP for y ~ P x with x real, non-negative and at most `sparsity` nonzeros.
/// `stacked` is stack_real(P).
inline VectorXd detect_aggregate_stacked(const VectorXd& yr, const MatrixXd& stacked, int sparsity,
                                         const SwompOptions& opt = {}) {
  require(yr.size() == stacked.rows(), "observation length does not match the codebook");
  const Eigen::Index I = stacked.cols();
  VectorXd x = VectorXd::Zero(I);
  const double ynorm = yr.norm();
  if (ynorm == 0 || sparsity <= 0) return x;
  const auto cap = static_cast<std::size_t>(std::min<Eigen::Index>(sparsity, I));

  std::vector<Eigen::Index> support;
  std::vector<char> in_support(I, 0);
  VectorXd r = yr;
  VectorXd coef;
  for (int stage = 0; stage < opt.max_stages && support.size() < cap; ++stage) {
    if (r.norm() < opt.rel_tol * ynorm || r.squaredNorm() <= opt.residual_floor) break;
    const VectorXd c = stacked.transpose() * r;
    double cmax = 0.0;
    for (Eigen::Index i = 0; i < I; ++i)
      if (!in_support[i]) cmax = std::max(cmax, c(i));
    if (cmax <= 0) break;
    std::vector<Eigen::Index> cand;
    for (Eigen::Index i = 0; i < I; ++i)
      if (!in_support[i] && c(i) >= opt.threshold * cmax) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(), [&](Eigen::Index a, Eigen::Index b) { return c(a) > c(b); });
    for (Eigen::Index i : cand) {
      if (support.size() >= cap) break;
      support.push_back(i);
      in_support[i] = 1;
    }
    coef = detail::support_lstsq(stacked, yr, support);
    r = detail::residual_on(stacked, yr, support, coef);
  }
  if (support.empty()) return x;

  // drop negative and negligible coefficients, refit on the remaining support until all are positive
  coef = detail::support_lstsq(stacked, yr, support);
  for (;;) {
    const double floor = 1e-10 * coef.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < support.size(); ++j)
      if (coef(static_cast<Eigen::Index>(j)) > floor) keep.push_back(support[j]);
    if (keep.size() == support.size() || keep.empty()) {
      support = keep;
      break;
    }
    support = keep;
    coef = detail::support_lstsq(stacked, yr, support);
  }
  for (std::size_t j = 0; j < support.size(); ++j) x(support[j]) = coef(static_cast<Eigen::Index>(j));
  if (detail::residual_on(stacked, yr, support, coef).norm() > ynorm) x.setZero();
  return x;
}

inline VectorXd detect_aggregate(const VectorXcd& y, const MatrixXcd& modulation, int sparsity,
                                 const SwompOptions& opt = {}) {
  require(y.size() == modulation.rows(), "observation length does not match the codebook");
  return detect_aggregate_stacked(stack_real(y), stack_real(modulation), sparsity, opt);
}

}  // namespace hrdair
