#pragma once

#include "hrdair/model/channel.hpp"
#include "hrdair/model/ris.hpp"

namespace hrdair {

/// h_k = h_AE,k + H_RE Phi h_AR,k.
inline VectorXcd effective_channel(const ChannelSet& ch, const HybridRisState& ris, int k) {
  require(k >= 0 && k < ch.agents(), "agent index out of range");
  require(ris.elements() == ch.elements(), "RIS state does not match the channel set");
  return ch.ae.col(k) + ch.re * ris.coefficients().cwiseProduct(ch.ar.col(k));
}

/// All effective channels as the columns of an M x K matrix.
inline MatrixXcd effective_channels(const ChannelSet& ch, const HybridRisState& ris) {
  require(ris.elements() == ch.elements(), "RIS state does not match the channel set");
  return ch.ae + ch.re * (ris.coefficients().asDiagonal() * ch.ar);
}

/// Effective scalar gains g_k = h_k^T b.
inline VectorXcd aligned_gains(const ChannelSet& ch, const HybridRisState& ris, const VectorXcd& b) {
  return effective_channels(ch, ris).transpose() * b;
}

/// Phi_a H_RE^T b: the beamformed amplification-noise gains of the active elements.
inline VectorXcd ris_noise_gains(const ChannelSet& ch, const HybridRisState& ris, const VectorXcd& b) {
  return ris.active_coefficients().cwiseProduct(ch.re.transpose() * b);
}

/// Noise variances used by the uplink (watts per complex entry).
struct UplinkNoise {
  double ris = 0.0;  // sigma_R^2
  double en = 0.0;   // sigma_E^2
};

/// y = [sum_k nu_k s_k h_k^T + Z_R Phi_a H_RE^T + Z_E] b with signals as the J x K matrix [s_1 .. s_K].
inline VectorXcd simulate_uplink(const MatrixXcd& signals, const VectorXcd& nu, const ChannelSet& ch,
                                 const HybridRisState& ris, const VectorXcd& b, const UplinkNoise& noise,
                                 CounterRng& rng) {
  require(signals.cols() == ch.agents() && nu.size() == ch.agents(), "one signal and coefficient per agent");
  require(b.size() == ch.antennas(), "beamformer length must equal M");
  const Eigen::Index J = signals.rows();
  VectorXcd y = signals * nu.cwiseProduct(aligned_gains(ch, ris, b));

  const int Na = ris.active_count();
  if (Na > 0 && noise.ris > 0) {
    const VectorXcd z = ris_noise_gains(ch, ris, b).head(Na);
    y += complex_normal_matrix(rng, J, Na, noise.ris) * z;
  }
  if (noise.en > 0) y += complex_normal_matrix(rng, J, ch.antennas(), noise.en) * b;
  return y;
}

/// tr[Phi_a^H (beta^2 J sum_kk' u_kk' nu_k^* nu_k' h_AR,k^* h_AR,k'^T + sigma_R^2 I) Phi_a].
inline double ris_amplification_power(const HybridRisState& ris, const VectorXcd& nu, const ChannelSet& ch,
                                       const CorrelationMatrix& u, double beta, int J, double sigma_r2) {
  require(nu.size() == ch.agents() && u.rows() == ch.agents(), "dimension mismatch");
  const int Na = ris.active_count();
  if (Na == 0) return 0.0;
  const double scale = beta * beta * J;
  // v(n, k) = nu_k h_AR,k[n] on active rows
  const MatrixXcd v = ch.ar.topRows(Na) * nu.asDiagonal();
  const VectorXd amp2 = ris.active_amplitudes().array().square();
  double p = 0.0;
  for (int n = 0; n < Na; ++n) {
    const VectorXcd vn = v.row(n).transpose();
    const double q = std::real(vn.dot(u.cast<cd>() * vn));
    p += amp2(n) * (scale * q + sigma_r2);
  }
  return p;
}

}  // namespace hrdair
