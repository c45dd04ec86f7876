#pragma once

#include "hrdair/model/config.hpp"
#include "hrdair/model/uplink.hpp"

#include <cmath>
#include <vector>

namespace hrdair {

/// The two transceiver-dependent parts of E||y_t - s_t||^2 (per unit signal energy beta^2 J and per symbol).
struct DistortionTerms {
  double misalignment = 0.0;  // sum_kk' u_kk' e_k^* e_k', e_k = nu_k h_k^T b - 1
  double noise = 0.0;         // sigma_R^2 ||Phi_a H_RE^T b||^2 + sigma_E^2 ||b||^2
  double imag_residue = 0.0;  // |Im| of the misalignment quadratic form

  /// beta^2 J misalignment + J noise = E||y_t - s_t||^2 for signals meeting the correlation model.
  double energy(double beta, int J) const { return beta * beta * J * misalignment + J * noise; }
};

inline DistortionTerms distortion_terms(const VectorXcd& nu, const VectorXcd& b, const ChannelSet& ch,
                                        const HybridRisState& ris, const CorrelationMatrix& u, double sigma_r2,
                                        double sigma_e2) {
  require(nu.size() == ch.agents() && u.rows() == ch.agents() && b.size() == ch.antennas(), "dimension mismatch");
  const VectorXcd e = nu.cwiseProduct(aligned_gains(ch, ris, b)).array() - 1.0;
  const cd q = e.dot(u.cast<cd>() * e);
  DistortionTerms t;
  t.misalignment = q.real();
  t.imag_residue = std::abs(q.imag());
  t.noise = sigma_r2 * ris_noise_gains(ch, ris, b).squaredNorm() + sigma_e2 * b.squaredNorm();
  return t;
}

inline DistortionTerms distortion_terms(const VectorXcd& nu, const VectorXcd& b, const ChannelSet& ch,
                                        const HybridRisState& ris, const CorrelationMatrix& u,
                                        const SystemConfig& cfg) {
  return distortion_terms(nu, b, ch, ris, u, cfg.ris_noise_w, cfg.en_noise_w);
}

/// Quantization distortion bound 2^{-2 bits/(D-1)}; bits may be fractional.
inline double quantization_distortion_bound(double bits, int D) {
  if (D < 2) throw ParameterError("quantization bound needs D >= 2");
  return std::exp2(-2.0 * bits / (D - 1));
}

/// Coefficients of the per-dimension error variance c^e = psi1 2^B + psi2 2^{-2B/(D-1)}.
struct ErrorCoefficients {
  double psi1 = 0.0;
  double psi2 = 0.0;
  int D = 2;

  double value(double bits) const { return psi1 * std::exp2(bits) + psi2 * quantization_distortion_bound(bits, D); }
  double derivative(double bits) const {
    return std::log(2.0) * (psi1 * std::exp2(bits) - psi2 * 2.0 / (D - 1) * quantization_distortion_bound(bits, D));
  }
};

inline ErrorCoefficients error_coefficients(const DistortionTerms& t, const SystemConfig& cfg) {
  const double K = cfg.agents, D = cfg.block_length;
  const double beta2 = cfg.block_norm_bound * cfg.block_norm_bound;
  ErrorCoefficients c;
  c.psi1 = 2.0 * cfg.detection_mse_const / (K * K * D) * t.energy(cfg.block_norm_bound, cfg.sequence_length);
  c.psi2 = 2.0 * beta2 / (K * D);
  c.D = cfg.block_length;
  return c;
}

/// Upper bound eps_t on the block-t aggregation MSE.
inline double block_error_bound(double bits, const DistortionTerms& t, const SystemConfig& cfg) {
  return cfg.block_length * error_coefficients(t, cfg).value(bits);
}

inline double block_error_bound(double bits, const VectorXcd& nu, const VectorXcd& b, const ChannelSet& ch,
                                const HybridRisState& ris, const CorrelationMatrix& u, const SystemConfig& cfg) {
  return block_error_bound(bits, distortion_terms(nu, b, ch, ris, u, cfg), cfg);
}

/// Diagonal of C^e: eps_t / D repeated over the D dimensions of block t.
inline VectorXd error_covariance(const std::vector<double>& eps, int D) {
  require(D >= 1, "D must be positive");
  VectorXd c(static_cast<Eigen::Index>(eps.size()) * D);
  for (std::size_t t = 0; t < eps.size(); ++t) {
    require(eps[t] >= 0, "error bounds must be non-negative");
    c.segment(static_cast<Eigen::Index>(t) * D, D).setConstant(eps[t] / D);
  }
  return c;
}

inline VectorXd error_covariance(const VectorXd& eps, int D) {
  return error_covariance(std::vector<double>(eps.data(), eps.data() + eps.size()), D);
}

}  // namespace hrdair
