#pragma once

#include "hrdair/opt/state.hpp"

#include <Eigen/Eigenvalues>

namespace hrdair {

/// The RIS subproblem min d^H R1 d - 2Re{r1^H d} s.t. sum_{n active} R2_nn |d_n|^2 <= P_R, |d_n| = 1 passive.
struct RisSubproblemCoefficients {
  MatrixXcd R1;
  VectorXcd r1;
  VectorXd R2;  // diagonal, length N; only the active entries enter the constraint
  double sigma_max = 0.0;
  double constant = 0.0;  // objective + constant = distortion energy
  int active = 0;
  double power_budget = 0.0;

  /// Majorizer linear term r1 + (sigma_max I - R1) d.
  VectorXcd r2_bar(const VectorXcd& d) const { return r1 + sigma_max * d - R1 * d; }
  VectorXd R3() const { return R2.head(active); }
};

/// Largest eigenvalue of a Hermitian matrix: power iteration, dense solver when it does not settle.
inline double largest_eigenvalue(const MatrixXcd& A, bool* used_dense = nullptr) {
  const Eigen::Index n = A.rows();
  if (used_dense) *used_dense = false;
  if (n == 0) return 0.0;
  const double fro = A.norm();
  if (fro == 0) return 0.0;
  VectorXcd x = VectorXcd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    const VectorXcd y = A * x;
    const double ny = y.norm();
    if (ny == 0) break;
    const double next = std::real(x.dot(y));
    x = y / ny;
    const double resid = (A * x - std::real(x.dot(A * x)) * x).norm();
    lambda = std::real(x.dot(A * x));
    if (std::abs(next - lambda) <= 1e-10 * std::abs(lambda) && resid <= 1e-10 * fro && lambda > 0) return lambda;
  }
  if (used_dense) *used_dense = true;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return es.eigenvalues().maxCoeff();
}

inline RisSubproblemCoefficients compute_ris_coefficients(const VectorXcd& nu, const VectorXcd& b,
                                                          const HybridRisState& ris, const ChannelSet& ch,
                                                          const CorrelationMatrix& u, const SystemConfig& cfg) {
  const int N = ch.elements(), Na = ris.active_count(), J = cfg.sequence_length;
  const double scale = cfg.signal_scale();
  const MatrixXcd Uc = u.cast<cd>();
  const VectorXcd z = ch.re.transpose() * b;           // N
  const VectorXcd a = ch.ae.transpose() * b;           // K, direct-path gains
  const MatrixXcd V = ch.ar * nu.asDiagonal();         // N x K
  const MatrixXcd VcU = V.conjugate() * Uc;            // N x K
  const MatrixXcd omega2 = scale * VcU * V.transpose();  // beta^2 J sum u nu_k^* nu_k' h_k^* h_k'^T
  const VectorXcd w = VectorXcd::Ones(nu.size()) - nu.cwiseProduct(a);

  RisSubproblemCoefficients c;
  c.active = Na;
  c.power_budget = cfg.ris_power_w;
  c.R1 = (z.conjugate() * z.transpose()).cwiseProduct(omega2);
  for (int n = 0; n < Na; ++n) c.R1(n, n) += J * cfg.ris_noise_w * std::norm(z(n));
  c.r1 = scale * z.conjugate().cwiseProduct(VcU * w);
  c.R2 = omega2.diagonal().real().array() + cfg.ris_noise_w;
  c.sigma_max = N > 0 ? largest_eigenvalue(c.R1) : 0.0;
  const VectorXcd e0 = nu.cwiseProduct(a).array() - 1.0;
  c.constant = scale * std::real(e0.dot(Uc * e0)) + J * cfg.en_noise_w * b.squaredNorm();
  return c;
}

inline RisSubproblemCoefficients compute_ris_coefficients(const Problem& p, const OptimizationState& s) {
  return compute_ris_coefficients(s.nu, s.b, s.ris, p.ch, p.u, p.cfg);
}

/// d^H R1 d - 2 Re{r1^H d}.
inline double ris_objective(const VectorXcd& d, const RisSubproblemCoefficients& c) {
  return std::real(d.dot(c.R1 * d)) - 2.0 * std::real(c.r1.dot(d));
}

/// alpha_n = arg [r2_bar]_n; zero entries keep the previous phase.
inline VectorXd update_phases(const VectorXcd& r2_bar, const VectorXd& previous) {
  require(r2_bar.size() == previous.size(), "phase vector length mismatch");
  VectorXd alpha = previous;
  for (Eigen::Index n = 0; n < r2_bar.size(); ++n)
    if (std::abs(r2_bar(n)) > 0) {
      double a = std::arg(r2_bar(n));
      if (a < 0) a += 2.0 * kPi;
      alpha(n) = a;
    }
  return alpha;
}

struct AmplitudeUpdate {
  VectorXd q;
  double varsigma = 0.0;  // multiplier of the amplification-power constraint
  bool boundary_scaled = false;
};

/// q = r3_bar / (sigma_max + varsigma R3), varsigma >= 0 chosen so that sum R3 q^2 <= P_R.
inline AmplitudeUpdate update_active_amplitudes(const VectorXd& r3_bar, const VectorXd& R3, double sigma_max,
                                                double power_budget) {
  require(r3_bar.size() == R3.size(), "amplitude data length mismatch");
  require(sigma_max >= 0 && power_budget > 0, "sigma_max must be >= 0 and P_R > 0");
  AmplitudeUpdate out;
  const Eigen::Index n = r3_bar.size();
  out.q = VectorXd::Zero(n);
  if (n == 0 || r3_bar.cwiseAbs().maxCoeff() == 0) return out;

  auto power = [&](double vs) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double qi = r3_bar(i) / (sigma_max + vs * R3(i));
      f += R3(i) * qi * qi;
    }
    return f;
  };
  if (sigma_max <= 0) {
    const double f = (R3.array() * r3_bar.array().square()).sum();
    out.q = r3_bar * std::sqrt(power_budget / f);
    out.boundary_scaled = true;
    return out;
  }
  if (power(0.0) <= power_budget) {
    out.q = r3_bar / sigma_max;
    return out;
  }
  double lo = 0.0, hi = sigma_max / std::max(R3.maxCoeff(), 1e-300);
  while (power(hi) > power_budget) hi *= 2.0;
  for (int i = 0; i < 400; ++i) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    (power(m) > power_budget ? lo : hi) = m;
  }
  out.varsigma = hi;
  for (Eigen::Index i = 0; i < n; ++i) out.q(i) = r3_bar(i) / (sigma_max + hi * R3(i));
  return out;
}

struct RisLoopResult {
  HybridRisState ris;
  std::vector<double> objective;  // value before the first and after every iteration
  int iterations = 0;
};

/// Alternates the phase and amplitude closed forms on the majorized objective until the relative
/// change of the RIS objective drops below delta_in.
inline RisLoopResult run_ris_inner_loop(const RisSubproblemCoefficients& c, const HybridRisState& start,
                                        double delta_in, int max_iters) {
  RisLoopResult res{start, {}, 0};
  VectorXcd d = start.coefficients();
  double obj = ris_objective(d, c);
  res.objective.push_back(obj);
  const int Na = start.active_count();
  for (int it = 0; it < max_iters; ++it) {
    const VectorXcd r2 = c.r2_bar(d);
    HybridRisState next = res.ris;
    next.set_phases(update_phases(r2, res.ris.phases()));
    if (Na > 0) {
      const VectorXd r3 = r2.head(Na).cwiseAbs();
      next.set_active_amplitudes(update_active_amplitudes(r3, c.R3(), c.sigma_max, c.power_budget).q);
    }
    const VectorXcd dn = next.coefficients();
    const double on = ris_objective(dn, c);
    ++res.iterations;
    if (on > obj + 1e-12 * std::abs(obj)) break;  // numerical stall: keep the previous iterate
    res.ris = next;
    d = dn;
    res.objective.push_back(on);
    const bool done = std::abs(obj - on) <= delta_in * std::abs(obj);
    obj = on;
    if (done) break;
  }
  return res;
}

inline RisLoopResult run_ris_inner_loop(const Problem& p, const OptimizationState& s) {
  return run_ris_inner_loop(compute_ris_coefficients(p, s), s.ris, p.cfg.delta_in, p.cfg.max_inner_iters);
}

}  // namespace hrdair
