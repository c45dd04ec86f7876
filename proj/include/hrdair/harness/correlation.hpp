#pragma once

#include "hrdair/model/ris.hpp"

namespace hrdair {

enum class CorrelationMode { kUniform = 1, kFeatures = 2 };

/// U = eps 1 1^T + (1 - eps) I.
inline CorrelationMatrix uniform_correlation(int K, double eps) {
  if (!(eps >= 0 && eps <= 1)) throw ParameterError("correlation eps must lie in [0, 1]");
  require(K >= 1, "K must be >= 1");
  CorrelationMatrix u = CorrelationMatrix::Constant(K, K, eps);
  u.diagonal().setOnes();
  return u;
}

/// u_kk' = (1/W) sum_w f~_k,w f~_k',w with f~_k = sqrt(W) f_k / ||f_k||; columns of `local` are agents.
inline CorrelationMatrix feature_correlation(const MatrixXd& local) {
  const Eigen::Index W = local.rows();
  require(W >= 1 && local.cols() >= 1, "need at least one agent and one dimension");
  MatrixXd n = local;
  for (Eigen::Index k = 0; k < n.cols(); ++k) {
    const double nk = n.col(k).norm();
    if (nk > 0) n.col(k) *= std::sqrt(static_cast<double>(W)) / nk;
  }
  return sanitize_correlation(n.transpose() * n / static_cast<double>(W));
}

inline CorrelationMatrix estimate_correlation(CorrelationMode mode, int K, double eps, const MatrixXd* local) {
  if (mode == CorrelationMode::kUniform) return uniform_correlation(K, eps);
  if (!local) throw ParameterError("feature-based correlation needs local features");
  require(local->cols() == K, "local feature matrix must have K columns");
  return feature_correlation(*local);
}

}  // namespace hrdair
