#pragma once

#include "hrdair/model/channel.hpp"
#include "hrdair/model/config.hpp"
#include "hrdair/model/ris.hpp"
#include "hrdair/theory/bounds.hpp"
#include "hrdair/theory/entropy.hpp"
#include "hrdair/theory/gmm.hpp"

#include <vector>

namespace hrdair {

/// Read-only inputs shared by every subproblem.
struct Problem {
  const SystemConfig& cfg;
  const ChannelSet& ch;
  const GmmModel& gmm;
  const CorrelationMatrix& u;
};

struct TraceRecord {
  int iteration = 0;
  double g = 0.0;
  double sp1_objective = 0.0;  // sum_t s_t (psi1 2^B_t + psi2 2^{-2B_t/(D-1)})
  double sp2_objective = 0.0;  // distortion energy after the coefficient sweep
  double sp3_objective = 0.0;  // ... after the receive beamformer update
  double sp4_objective = 0.0;  // ... after the RIS inner loop
  int inner_iters = 0;
  double wall_ms = 0.0;
};

struct OptimizationState {
  VectorXd bits;  // per block; fractional during the outer loop, integral at exit
  VectorXcd nu;
  VectorXcd b;
  HybridRisState ris;
  VectorXd lambda;
  std::vector<TraceRecord> trace;
  int outer_iters = 0;
  bool converged = false;
  double final_g = 0.0;  // G at the returned (integer-bit) point

  VectorXi integer_bits() const { return bits.array().round().cast<int>(); }
};

inline DistortionTerms distortion_terms(const Problem& p, const OptimizationState& s) {
  return distortion_terms(s.nu, s.b, p.ch, s.ris, p.u, p.cfg);
}

/// Distortion energy beta^2 J misalignment + J noise: the objective shared by the coefficient, beamforming and RIS updates.
inline double distortion_energy(const Problem& p, const OptimizationState& s) {
  return distortion_terms(p, s).energy(p.cfg.block_norm_bound, p.cfg.sequence_length);
}

/// Per-block eps_t for the current state.
inline std::vector<double> block_error_bounds(const Problem& p, const OptimizationState& s) {
  const auto coef = error_coefficients(distortion_terms(p, s), p.cfg);
  std::vector<double> eps(s.bits.size());
  for (Eigen::Index t = 0; t < s.bits.size(); ++t) eps[t] = p.cfg.block_length * coef.value(s.bits(t));
  return eps;
}

inline VectorXd state_error_covariance(const Problem& p, const OptimizationState& s) {
  return error_covariance(block_error_bounds(p, s), p.cfg.block_length);
}

inline SurrogateReport state_surrogate(const Problem& p, const OptimizationState& s) {
  return surrogate_g(p.gmm, state_error_covariance(p, s));
}

inline double state_g(const Problem& p, const OptimizationState& s) {
  const VectorXd ce = state_error_covariance(p, s);
  return (p.gmm.rho().array() / (p.gmm.cov_diag() + ce).array()).sum();
}

inline double max_coefficient(const SystemConfig& cfg) { return std::sqrt(cfg.max_coeff_sq()); }

}  // namespace hrdair
