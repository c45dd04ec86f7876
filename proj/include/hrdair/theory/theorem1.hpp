#pragma once

#include "hrdair/theory/bounds.hpp"

#include <Eigen/Eigenvalues>

namespace hrdair {

/// J x K signals with ||s_k||^2 = beta^2 J and s_k^H s_k' = beta^2 J u_kk' exactly. Requires J >= K and U PSD.
inline MatrixXcd correlated_signals(const CorrelationMatrix& u, int J, double beta, CounterRng& rng) {
  const Eigen::Index K = u.rows();
  require(J >= K, "exact correlated signals need J >= K");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(u);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of U failed");
  if (es.eigenvalues().minCoeff() < -1e-10) throw ParameterError("U must be positive semidefinite");
  const MatrixXd root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const MatrixXcd g = complex_normal_matrix(rng, J, K);
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  const MatrixXcd o = qr.householderQ() * MatrixXcd::Identity(J, K);
  return (beta * std::sqrt(static_cast<double>(J))) * o * root.cast<cd>();
}

struct Theorem1Report {
  double closed_form = 0.0;  // beta^2 J misalignment + J noise
  double mc_mean = 0.0;      // sample mean of ||y_t - s_t||^2
  double mc_se = 0.0;
  double z_score() const { return mc_se > 0 ? (mc_mean - closed_form) / mc_se : (mc_mean == closed_form ? 0 : kInf); }
  bool passed(double n_se = 3.0) const {
    return std::abs(mc_mean - closed_form) <= n_se * mc_se + 1e-12 * std::max(1.0, std::abs(closed_form));
  }
};

/// Monte-Carlo check that E||y_t - sum_k s_k||^2 equals the closed-form misalignment + noise energy.
inline Theorem1Report verify_theorem1_identity(const VectorXcd& nu, const VectorXcd& b, const ChannelSet& ch,
                                               const HybridRisState& ris, const CorrelationMatrix& u,
                                               const SystemConfig& cfg, int n_mc, CounterRng& rng) {
  require(n_mc >= 2, "need at least two Monte-Carlo draws");
  const int J = cfg.sequence_length;
  CounterRng sig_rng = rng.substream(Stream::kTest, 1);
  CounterRng noise_rng = rng.substream(Stream::kNoise, 0);
  const MatrixXcd s = correlated_signals(u, J, cfg.block_norm_bound, sig_rng);
  const VectorXcd target = s.rowwise().sum();
  const UplinkNoise noise{cfg.ris_noise_w, cfg.en_noise_w};

  Theorem1Report r;
  r.closed_form = distortion_terms(nu, b, ch, ris, u, cfg).energy(cfg.block_norm_bound, J);
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double v = (simulate_uplink(s, nu, ch, ris, b, noise, noise_rng) - target).squaredNorm();
    acc += v;
    acc2 += v * v;
  }
  r.mc_mean = acc / n_mc;
  r.mc_se = std::sqrt(std::max(0.0, (acc2 - n_mc * r.mc_mean * r.mc_mean) / (n_mc - 1)) / n_mc);
  return r;
}

}  // namespace hrdair
