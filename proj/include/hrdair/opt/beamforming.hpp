#pragma once

#include "hrdair/opt/state.hpp"

namespace hrdair {

/// Pi b = omega, the stationarity condition of the receive-beamforming subproblem.
struct BeamformingSystem {
  MatrixXcd pi;
  VectorXcd omega;
};

inline BeamformingSystem beamforming_system(const VectorXcd& nu, const HybridRisState& ris, const ChannelSet& ch,
                                            const CorrelationMatrix& u, const SystemConfig& cfg) {
  const int M = ch.antennas(), J = cfg.sequence_length;
  const double scale = cfg.signal_scale();
  const MatrixXcd A = effective_channels(ch, ris).conjugate() * nu.conjugate().asDiagonal();  // M x K
  const MatrixXcd Uc = u.cast<cd>();
  BeamformingSystem sys;
  sys.pi = scale * A * Uc * A.adjoint();
  const int Na = ris.active_count();
  if (Na > 0) {
    const MatrixXcd Ha = ch.re.leftCols(Na).conjugate() * ris.active_amplitudes().asDiagonal();
    sys.pi += (J * cfg.ris_noise_w) * Ha * Ha.adjoint();
  }
  sys.pi.diagonal().array() += J * cfg.en_noise_w;
  sys.omega = scale * A * (Uc * VectorXcd::Ones(u.rows()));
  (void)M;
  return sys;
}

/// b = Pi^{-1} omega.
inline VectorXcd solve_beamforming_system(const BeamformingSystem& sys) {
  Eigen::LLT<MatrixXcd> llt(sys.pi);
  if (llt.info() == Eigen::Success) {
    VectorXcd b = llt.solve(sys.omega);
    if (b.allFinite()) return b;
  }
  Eigen::FullPivLU<MatrixXcd> lu(sys.pi);
  if (!lu.isInvertible()) throw NumericalError("receive beamforming matrix is singular");
  return lu.solve(sys.omega);
}

inline VectorXcd solve_receive_beamforming(const Problem& p, const OptimizationState& s) {
  return solve_beamforming_system(beamforming_system(s.nu, s.ris, p.ch, p.u, p.cfg));
}

}  // namespace hrdair
