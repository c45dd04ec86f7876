#pragma once

#include "hrdair/theory/gmm.hpp"

namespace hrdair {

/// argmin_l (f - mu_l)^T (C + sigmaF2 I)^{-1} (f - mu_l); lowest label on ties.
inline int classify(const VectorXd& f_hat, const GmmModel& gmm, double sigma_f2) {
  require(f_hat.size() == gmm.dim(), "feature length must equal W");
  const VectorXd inv = (gmm.cov_diag().array() + sigma_f2).inverse();
  int best = 0;
  double best_d = kInf;
  for (int l = 0; l < gmm.classes(); ++l) {
    const double d = ((f_hat - gmm.means().col(l)).array().square() * inv.array()).sum();
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

}  // namespace hrdair
