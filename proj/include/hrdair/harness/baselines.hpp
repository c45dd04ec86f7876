#pragma once

#include "hrdair/model/uplink.hpp"
#include "hrdair/opt/beamforming.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace hrdair {

/// Channels with the RIS removed (N = 0).
inline ChannelSet without_ris(const ChannelSet& ch) {
  ChannelSet out;
  out.ae = ch.ae;
  out.ar.resize(0, ch.agents());
  out.re.resize(ch.antennas(), 0);
  out.agent_positions = ch.agent_positions;
  return out;
}

struct TruncatedInversionDesign {
  VectorXcd nu;
  VectorXcd b;
  std::vector<char> active;
  int active_count() const { return static_cast<int>(std::count(active.begin(), active.end(), 1)); }
};

/// Agents whose |g_k| ranks among the lowest floor(pct/100 * K) are switched off.
inline std::vector<char> truncation_mask(const VectorXcd& gains, double truncation_pct) {
  const Eigen::Index K = gains.size();
  std::vector<Eigen::Index> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(gains(a)) < std::abs(gains(b)); });
  const auto drop = static_cast<Eigen::Index>(std::floor(truncation_pct / 100.0 * K + 1e-9));
  std::vector<char> active(K, 1);
  for (Eigen::Index i = 0; i < std::min(drop, K); ++i) active[order[i]] = 0;
  for (Eigen::Index k = 0; k < K; ++k)
    if (std::abs(gains(k)) == 0) active[k] = 0;
  return active;
}

/// Truncated channel inversion nu_k = c / g_k for active agents, with the common c set by the weakest
/// active agent's power limit; b is rescaled by 1/c so that nu_k h_k^T b = 1.
inline void apply_truncated_inversion(const ChannelSet& ch, double max_coeff, double truncation_pct,
                                      TruncatedInversionDesign& d) {
  const HybridRisState none(ch.elements(), 0);
  const VectorXcd g = ch.ae.transpose() * d.b;
  d.active = truncation_mask(g, truncation_pct);
  double c = kInf;
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (d.active[k]) c = std::min(c, max_coeff * std::abs(g(k)));
  d.nu = VectorXcd::Zero(g.size());
  if (!std::isfinite(c) || c <= 0) return;
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (d.active[k]) d.nu(k) = c / g(k);
  d.b /= c;
}

/// Minimum-MSE receive beamformer over the active agents with U = I and no RIS.
inline VectorXcd mmse_beamformer(const ChannelSet& ch, const VectorXcd& nu, double signal_scale, int J,
                                 double sigma_e2) {
  const MatrixXcd A = ch.ae.conjugate() * nu.conjugate().asDiagonal();
  MatrixXcd pi = signal_scale * A * A.adjoint();
  pi.diagonal().array() += J * sigma_e2;
  const VectorXcd omega = signal_scale * A * VectorXcd::Ones(nu.size());
  BeamformingSystem sys{pi, omega};
  return solve_beamforming_system(sys);
}

/// MD-AirComp transceiver: alternate truncated inversion and the MMSE beamformer.
inline TruncatedInversionDesign design_truncated_inversion(const ChannelSet& ch, const SystemConfig& cfg,
                                                           double max_coeff, double signal_scale, int rounds = 10) {
  TruncatedInversionDesign d;
  d.b = ch.ae.conjugate().rowwise().sum();
  if (d.b.norm() == 0) d.b = VectorXcd::Unit(ch.antennas(), 0);
  for (int r = 0; r < rounds; ++r) {
    apply_truncated_inversion(ch, max_coeff, cfg.md_truncation_pct, d);
    if (d.active_count() == 0) break;
    d.b = mmse_beamformer(ch, d.nu, signal_scale, cfg.sequence_length, cfg.en_noise_w);
  }
  apply_truncated_inversion(ch, max_coeff, cfg.md_truncation_pct, d);
  return d;
}

/// Uniform split of B over T blocks; the first B mod T blocks take one extra bit.
inline VectorXi uniform_bits(int B, int T) {
  VectorXi bits = VectorXi::Constant(T, B / T);
  for (int t = 0; t < B % T; ++t) ++bits(t);
  return bits;
}

/// One-bit sign with sign(0) = +1.
inline double sign_bit(double v) { return v < 0 ? -1.0 : 1.0; }

/// E|f_w| under the mixture: average over classes of the folded-normal mean.
inline VectorXd mixture_abs_mean(const MatrixXd& means, const VectorXd& cov) {
  VectorXd m = VectorXd::Zero(means.rows());
  for (Eigen::Index w = 0; w < means.rows(); ++w) {
    const double s = std::sqrt(cov(w));
    for (Eigen::Index l = 0; l < means.cols(); ++l) {
      const double mu = means(w, l);
      m(w) += s * std::sqrt(2.0 / kPi) * std::exp(-mu * mu / (2 * s * s)) + mu * std::erf(mu / (std::sqrt(2.0) * s));
    }
    m(w) /= static_cast<double>(means.cols());
  }
  return m;
}

}  // namespace hrdair
