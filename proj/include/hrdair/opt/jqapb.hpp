#pragma once

#include "hrdair/opt/beamforming.hpp"
#include "hrdair/opt/bit_allocation.hpp"
#include "hrdair/opt/ris_update.hpp"
#include "hrdair/opt/transmission.hpp"

#include <chrono>

namespace hrdair {

enum class CoefficientPolicy {
  kOptimized,  // per-agent subproblems
  kFullPower,  // full-power phase alignment
};

struct JqapbOptions {
  CoefficientPolicy coefficients = CoefficientPolicy::kOptimized;
  bool round_bits = true;
  double init_power_margin = 0.95;
};

inline BitBounds bit_bounds(const SystemConfig& cfg) { return {cfg.min_block_bits, cfg.max_block_bits}; }

/// Infeasible-configuration check run before any iteration.
inline void check_feasible(const SystemConfig& cfg) {
  if (cfg.ris_noise_w * cfg.active_elements > cfg.ris_power_w)
    throw ConfigError("sigma_R^2 * Na exceeds the RIS amplification budget");
}

/// Amplification power of the current state.
inline double state_ris_power(const Problem& p, const OptimizationState& s) {
  return ris_amplification_power(s.ris, s.nu, p.ch, p.u, p.cfg.block_norm_bound, p.cfg.sequence_length,
                                 p.cfg.ris_noise_w);
}

/// Scales all active amplitudes by a common factor so that the amplification power is at most margin * P_R.
inline void scale_active_amplitudes(const Problem& p, OptimizationState& s, double margin, bool only_if_violated) {
  const int Na = s.ris.active_count();
  if (Na == 0) return;
  const double pw = state_ris_power(p, s);
  if (only_if_violated && pw <= p.cfg.ris_power_w) return;
  if (pw <= 0) return;
  s.ris.set_active_amplitudes(s.ris.active_amplitudes() * std::sqrt(margin * p.cfg.ris_power_w / pw));
}

/// lambda_w = rho_w / (c_w + c^e_w).
inline VectorXd tight_lambda(const Problem& p, const OptimizationState& s) {
  return (p.gmm.rho().array() / (p.gmm.cov_diag() + state_error_covariance(p, s)).array()).matrix();
}

/// Random RIS phases with unit amplitudes, matched-filter b, full-power aligned nu, active amplitudes
/// sized to the amplification budget with a margin, then b from the beamforming closed form.
inline OptimizationState initialize_state(const Problem& p, CounterRng& rng, const JqapbOptions& opt = {}) {
  const auto& cfg = p.cfg;
  check_feasible(cfg);
  OptimizationState s;
  s.ris = HybridRisState(cfg.ris_elements, cfg.active_elements);
  VectorXd alpha(cfg.ris_elements);
  for (int n = 0; n < cfg.ris_elements; ++n) alpha(n) = 2.0 * kPi * rng.uniform();
  s.ris.set_phases(alpha);

  const MatrixXcd H = effective_channels(p.ch, s.ris);
  s.b = H.conjugate().rowwise().sum();
  if (s.b.norm() == 0) s.b = VectorXcd::Unit(cfg.en_antennas, 0);
  s.nu = full_power_coefficients(p, s.ris, s.b);
  scale_active_amplitudes(p, s, opt.init_power_margin, false);
  s.b = solve_receive_beamforming(p, s);
  s.bits = VectorXd::Constant(cfg.blocks(), static_cast<double>(cfg.total_bits) / cfg.blocks());
  s.lambda = tight_lambda(p, s);
  return s;
}

namespace detail {

inline void update_coefficients(const Problem& p, OptimizationState& s, CoefficientPolicy policy) {
  if (policy == CoefficientPolicy::kOptimized) {
    transmission_sweep(p, s);
  } else {
    s.nu = full_power_coefficients(p, s.ris, s.b);
    scale_active_amplitudes(p, s, 1.0, true);
  }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Joint quantization-bit, coefficient, beamformer and hybrid-RIS optimization.
inline OptimizationState run_jqapb(const Problem& p, OptimizationState s, const JqapbOptions& opt = {}) {
  const auto& cfg = p.cfg;
  check_feasible(cfg);
  const BitBounds bounds = bit_bounds(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  double g_prev = state_g(p, s);
  s.trace.clear();
  s.trace.push_back({0, g_prev, 0, 0, 0, 0, 0, detail::elapsed_ms(t0)});
  s.outer_iters = 0;
  s.converged = false;

  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    TraceRecord rec;
    rec.iteration = it;

    s.lambda = tight_lambda(p, s);
    const ErrorCoefficients coef = error_coefficients(distortion_terms(p, s), cfg);
    const VectorXd weights = block_weights(p.gmm.rho(), s.lambda, cfg.block_length);
    if (weights.sum() > 0) s.bits = solve_bit_allocation_continuous(coef, weights, cfg.total_bits, bounds);
    rec.sp1_objective = bit_allocation_objective(coef, weights, s.bits);

    detail::update_coefficients(p, s, opt.coefficients);
    rec.sp2_objective = distortion_energy(p, s);
    s.b = solve_receive_beamforming(p, s);
    rec.sp3_objective = distortion_energy(p, s);
    if (cfg.ris_elements > 0) {
      const RisLoopResult inner = run_ris_inner_loop(p, s);
      s.ris = inner.ris;
      rec.inner_iters = inner.iterations;
    }
    rec.sp4_objective = distortion_energy(p, s);

    rec.g = state_g(p, s);
    rec.wall_ms = detail::elapsed_ms(t0);
    s.trace.push_back(rec);
    s.outer_iters = it;
    const bool done = std::abs(rec.g - g_prev) < cfg.delta_out * std::abs(g_prev);
    g_prev = rec.g;
    if (done) {
      s.converged = true;
      break;
    }
  }

  if (opt.round_bits) {
    s.lambda = tight_lambda(p, s);
    const ErrorCoefficients coef = error_coefficients(distortion_terms(p, s), cfg);
    const VectorXd weights = block_weights(p.gmm.rho(), s.lambda, cfg.block_length);
    s.bits = round_bit_allocation(s.bits, coef, weights, cfg.total_bits, bounds).cast<double>();
    detail::update_coefficients(p, s, opt.coefficients);
    s.b = solve_receive_beamforming(p, s);
    if (cfg.ris_elements > 0) s.ris = run_ris_inner_loop(p, s).ris;
  }
  // the full-power baseline keeps nu phase-aligned with the returned b and RIS
  if (opt.coefficients == CoefficientPolicy::kFullPower) detail::update_coefficients(p, s, opt.coefficients);
  s.final_g = state_g(p, s);
  return s;
}

inline OptimizationState run_jqapb(const Problem& p, CounterRng& rng, const JqapbOptions& opt = {}) {
  return run_jqapb(p, initialize_state(p, rng, opt), opt);
}

}  // namespace hrdair
