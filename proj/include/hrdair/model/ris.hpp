#pragma once

#include "hrdair/core.hpp"

#include <cmath>
#include <vector>

namespace hrdair {

/// Reflection state of a hybrid RIS. Elements [0, active) are active (amplitude and phase),
/// the remainder are passive with amplitude fixed to 1.
class HybridRisState {
 public:
  HybridRisState() = default;
  HybridRisState(int elements, int active)
      : phases_(VectorXd::Zero(elements)), amplitudes_(VectorXd::Ones(elements)), active_(active) {
    require(active >= 0 && active <= elements, "active element count must lie in [0, N]");
  }

  int elements() const { return static_cast<int>(phases_.size()); }
  int active_count() const { return active_; }
  bool is_active(int n) const { return n < active_; }

  std::vector<int> active_set() const {
    std::vector<int> s(active_);
    for (int n = 0; n < active_; ++n) s[n] = n;
    return s;
  }
  std::vector<int> passive_set() const {
    std::vector<int> s;
    for (int n = active_; n < elements(); ++n) s.push_back(n);
    return s;
  }

  const VectorXd& phases() const { return phases_; }
  const VectorXd& amplitudes() const { return amplitudes_; }

  /// Phases are wrapped into [0, 2pi).
  void set_phases(const VectorXd& alpha) {
    require(alpha.size() == phases_.size(), "phase vector length must equal N");
    for (Eigen::Index n = 0; n < alpha.size(); ++n) {
      double a = std::fmod(alpha(n), 2.0 * kPi);
      if (a < 0) a += 2.0 * kPi;
      if (a >= 2.0 * kPi) a = 0.0;
      phases_(n) = a;
    }
  }
  void set_phase(int n, double alpha) {
    VectorXd a = phases_;
    a(n) = alpha;
    set_phases(a);
  }

  /// Sets the amplitudes of the active elements (length Na, entries >= 0).
  void set_active_amplitudes(const VectorXd& q) {
    require(q.size() == active_, "amplitude vector length must equal Na");
    for (int n = 0; n < active_; ++n) {
      require(q(n) >= 0 && std::isfinite(q(n)), "active amplitudes must be finite and non-negative");
      amplitudes_(n) = q(n);
    }
  }
  VectorXd active_amplitudes() const { return amplitudes_.head(active_); }

  /// Diagonal of Phi: d_n = |phi_n| e^{j alpha_n}.
  VectorXcd coefficients() const {
    VectorXcd d(elements());
    for (int n = 0; n < elements(); ++n) d(n) = std::polar(amplitudes_(n), phases_(n));
    return d;
  }
  /// Diagonal of Phi_a (zero on passive rows).
  VectorXcd active_coefficients() const {
    VectorXcd d = coefficients();
    d.tail(elements() - active_).setZero();
    return d;
  }
  /// Diagonal of Phi_p (zero on active rows).
  VectorXcd passive_coefficients() const {
    VectorXcd d = coefficients();
    d.head(active_).setZero();
    return d;
  }

  MatrixXcd reflection_matrix() const { return coefficients().asDiagonal(); }

 private:
  VectorXd phases_;
  VectorXd amplitudes_;
  int active_ = 0;
};

/// Agent feature-correlation matrix U: real symmetric, unit diagonal, entries in [0, 1].
using CorrelationMatrix = MatrixXd;

inline bool is_valid_correlation(const CorrelationMatrix& u, double tol = 1e-12) {
  if (u.rows() != u.cols()) return false;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (std::abs(u(i, i) - 1.0) > tol) return false;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      if (u(i, j) < -tol || u(i, j) > 1 + tol) return false;
      if (std::abs(u(i, j) - u(j, i)) > tol) return false;
    }
  }
  return true;
}

/// Symmetrizes, clamps to [0, 1] and resets the diagonal to 1.
inline CorrelationMatrix sanitize_correlation(const MatrixXd& raw) {
  require(raw.rows() == raw.cols(), "correlation matrix must be square");
  CorrelationMatrix u = 0.5 * (raw + raw.transpose());
  u = u.cwiseMax(0.0).cwiseMin(1.0);
  u.diagonal().setOnes();
  return u;
}

}  // namespace hrdair
