#pragma once

#include "hrdair/rng.hpp"
#include "hrdair/theory/gmm.hpp"

#include <cmath>

namespace hrdair {

struct SurrogateReport {
  double g = 0.0;           // sum_w rho_w / (c_w + c^e_w)
  double g_pairwise = 0.0;  // (1/(L(L-1))) sum_{l<l'} G_ll'
  MatrixXd pairwise;        // symmetric L x L, zero diagonal
  double h_low = 0.0;       // (1/L) sum_l ln(1 + sum_{l'!=l} e^{-G_ll'/2})
  double h_low_approx = 0.0;  // ln(1 + (L-1) e^{-g/2})
};

/// Exact pairwise-form lower bound on the posterior entropy.
inline double entropy_lower_bound_pairwise(const MatrixXd& pairwise) {
  const Eigen::Index L = pairwise.rows();
  double h = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    double s = 0.0;
    for (Eigen::Index m = 0; m < L; ++m)
      if (m != l) s += std::exp(-pairwise(l, m) / 2.0);
    h += std::log1p(s);
  }
  return L > 0 ? h / L : 0.0;
}

/// ln(1 + (L-1) e^{-g/2}).
inline double entropy_lower_bound(double g, int L) {
  require(L >= 1, "L must be positive");
  require(g >= 0, "G must be non-negative");
  return std::log1p((L - 1) * std::exp(-g / 2.0));
}

inline SurrogateReport surrogate_g(const GmmModel& gmm, const VectorXd& cov_e) {
  require(cov_e.size() == gmm.dim(), "error covariance length must equal W");
  const VectorXd denom = gmm.cov_diag() + cov_e;
  for (Eigen::Index w = 0; w < denom.size(); ++w)
    if (!(denom(w) > 0)) throw ParameterError("non-positive covariance denominator");
  const int L = gmm.classes();
  SurrogateReport r;
  r.pairwise = MatrixXd::Zero(L, L);
  double sum = 0.0;
  for (int l = 0; l < L; ++l)
    for (int m = l + 1; m < L; ++m) {
      const double v = ((gmm.means().col(l) - gmm.means().col(m)).array().square() / denom.array()).sum();
      r.pairwise(l, m) = r.pairwise(m, l) = v;
      sum += v;
    }
  r.g_pairwise = L >= 2 ? sum / (static_cast<double>(L) * (L - 1)) : 0.0;
  r.g = (gmm.rho().array() / denom.array()).sum();
  r.h_low = entropy_lower_bound_pairwise(r.pairwise);
  r.h_low_approx = entropy_lower_bound(std::max(0.0, r.g), L);
  return r;
}

/// Posterior class probabilities for equal priors and diagonal covariance, computed in the log domain.
inline VectorXd class_posterior(const VectorXd& f, const MatrixXd& means, const VectorXd& cov) {
  const Eigen::Index L = means.cols();
  VectorXd logp(L);
  for (Eigen::Index l = 0; l < L; ++l) logp(l) = -0.5 * ((f - means.col(l)).array().square() / cov.array()).sum();
  const double mx = logp.maxCoeff();
  VectorXd p = (logp.array() - mx).exp();
  return p / p.sum();
}

inline double shannon_entropy(const VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0) h -= p(i) * std::log(p(i));
  return h;
}

struct EntropyEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte-Carlo entropy of posteriors for f_hat ~ (1/L) sum_l N(mu_l, C + C^e).
inline EntropyEstimate posterior_entropy_mc(const GmmModel& gmm, const VectorXd& cov_e, int n_samples,
                                            CounterRng& rng) {
  require(cov_e.size() == gmm.dim(), "error covariance length must equal W");
  require(n_samples >= 2, "need at least two samples");
  if (gmm.classes() == 1) return {0.0, 0.0};
  const VectorXd cov = gmm.cov_diag() + cov_e;
  const VectorXd sd = cov.cwiseSqrt();
  double s = 0.0, s2 = 0.0;
  VectorXd f(gmm.dim());
  for (int i = 0; i < n_samples; ++i) {
    const int l = std::min(gmm.classes() - 1, static_cast<int>(rng.uniform() * gmm.classes()));
    for (int w = 0; w < gmm.dim(); ++w) f(w) = gmm.means()(w, l) + sd(w) * rng.normal();
    const double h = shannon_entropy(class_posterior(f, gmm.means(), cov));
    s += h;
    s2 += h * h;
  }
  EntropyEstimate e;
  e.mean = s / n_samples;
  const double var = std::max(0.0, (s2 - n_samples * e.mean * e.mean) / (n_samples - 1));
  e.se = std::sqrt(var / n_samples);
  return e;
}

}  // namespace hrdair
