#pragma once

#include "hrdair/model/uplink.hpp"
#include "hrdair/opt/state.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace hrdair {

/// Constraint a|nu|^2 + 2 Re{xi nu} + c0 <= limit on one complex scalar.
struct ScalarQuadConstraint {
  double a = 0.0;
  cd xi = 0.0;
  double c0 = 0.0;
  double limit = 0.0;

  double value(cd nu) const { return a * std::norm(nu) + 2.0 * std::real(xi * nu) + c0; }
  bool holds(cd nu, double tol = 1e-12) const {
    return value(nu) <= limit + tol * std::max({std::abs(limit), std::abs(c0), 1e-300});
  }
};

/// Per-agent subproblem data: objective w1 |nu|^2 + 2 Re{w2 nu} and the two constraints.
struct TransmissionSubproblem {
  double w1 = 0.0;
  cd w2 = 0.0;
  ScalarQuadConstraint power;  // |nu|^2 <= P_A / (beta^2 J)
  ScalarQuadConstraint ris;    // hybrid-RIS amplification power <= P_R

  double objective(cd nu) const { return w1 * std::norm(nu) + 2.0 * std::real(w2 * nu); }
};

enum class ActivePattern { kNone, kPower, kRis, kBoth, kDegenerate };

struct TransmissionSolution {
  cd nu = 0.0;
  ActivePattern pattern = ActivePattern::kNone;
  double kappa_power = 0.0;  // multipliers recovered from stationarity
  double kappa_ris = 0.0;
};

namespace detail {

/// Convex planar region {nu : constraint holds}: a disc, a half-plane or the whole plane.
struct Region {
  enum Kind { kPlane, kDisc, kHalfPlane } kind = kPlane;
  cd center = 0.0;
  double radius = 0.0;
  cd normal = 0.0;  // half-plane <normal, nu> <= offset with <x, y> = Re(conj(x) y)
  double offset = 0.0;
};

inline Region region_of(const ScalarQuadConstraint& c) {
  Region r;
  const double rhs = c.limit - c.c0;
  if (c.a > 0) {
    r.kind = Region::kDisc;
    r.center = -std::conj(c.xi) / c.a;
    r.radius = std::sqrt(std::max(0.0, rhs / c.a + std::norm(c.xi) / (c.a * c.a)));
  } else if (std::abs(c.xi) > 0) {
    r.kind = Region::kHalfPlane;
    r.normal = 2.0 * std::conj(c.xi);
    r.offset = rhs;
  }
  return r;
}

inline cd project(const Region& r, cd p) {
  switch (r.kind) {
    case Region::kDisc: {
      const cd d = p - r.center;
      const double n = std::abs(d);
      return n <= r.radius ? p : r.center + (r.radius / n) * d;
    }
    case Region::kHalfPlane: {
      const double v = std::real(std::conj(r.normal) * p) - r.offset;
      return v <= 0 ? p : p - (v / std::norm(r.normal)) * r.normal;
    }
    default:
      return p;
  }
}

/// Points lying on both boundaries (at most two).
inline std::vector<cd> boundary_intersections(const Region& r1, const Region& r2) {
  std::vector<cd> out;
  auto line_circle = [&](const Region& line, const Region& circ) {
    // line: <n, x> = offset; param x = x0 + s * t, t perpendicular to n
    const double nn = std::abs(line.normal);
    const cd n = line.normal / nn;
    const double off = line.offset / nn;
    const double dist = off - std::real(std::conj(n) * circ.center);
    const double h2 = circ.radius * circ.radius - dist * dist;
    if (h2 < 0) return;
    const cd foot = circ.center + dist * n;
    const cd t = cd(0, 1) * n;
    const double h = std::sqrt(h2);
    out.push_back(foot + h * t);
    out.push_back(foot - h * t);
  };
  if (r1.kind == Region::kDisc && r2.kind == Region::kDisc) {
    const cd dv = r2.center - r1.center;
    const double d = std::abs(dv);
    if (d == 0) return out;
    const double x = (d * d + r1.radius * r1.radius - r2.radius * r2.radius) / (2 * d);
    const double h2 = r1.radius * r1.radius - x * x;
    if (h2 < 0) return out;
    const cd e = dv / d;
    const double h = std::sqrt(h2);
    out.push_back(r1.center + x * e + h * cd(0, 1) * e);
    out.push_back(r1.center + x * e - h * cd(0, 1) * e);
  } else if (r1.kind == Region::kHalfPlane && r2.kind == Region::kDisc) {
    line_circle(r1, r2);
  } else if (r1.kind == Region::kDisc && r2.kind == Region::kHalfPlane) {
    line_circle(r2, r1);
  }
  return out;
}

}  // namespace detail

/// Minimizes w1|nu|^2 + 2Re{w2 nu} over both constraints. With w1 > 0 this is the Euclidean projection of
/// nu0 = -conj(w2)/w1 onto the intersection, found by testing the activity patterns none, power, RIS, both.
/// `fallback` (a feasible point, normally the current iterate) is returned whenever nothing better is found.
inline TransmissionSolution solve_transmission_subproblem(const TransmissionSubproblem& sp, cd fallback) {
  TransmissionSolution sol;
  sol.nu = fallback;
  if (!(sp.w1 > 0)) {
    sol.pattern = ActivePattern::kDegenerate;
    return sol;
  }
  const cd nu0 = -std::conj(sp.w2) / sp.w1;
  const detail::Region rp = detail::region_of(sp.power), rr = detail::region_of(sp.ris);
  auto feasible = [&](cd v) { return sp.power.holds(v, 1e-10) && sp.ris.holds(v, 1e-10); };

  std::optional<cd> best;
  ActivePattern pat = ActivePattern::kNone;
  if (feasible(nu0)) {
    best = nu0;
  } else if (cd p = detail::project(rp, nu0); feasible(p)) {
    best = p;
    pat = ActivePattern::kPower;
  } else if (cd q = detail::project(rr, nu0); feasible(q)) {
    best = q;
    pat = ActivePattern::kRis;
  } else {
    for (cd v : detail::boundary_intersections(rp, rr))
      if (!best || std::abs(v - nu0) < std::abs(*best - nu0)) best = v;
    pat = ActivePattern::kBoth;
  }
  if (!best || sp.objective(*best) > sp.objective(fallback)) return sol;
  sol.nu = *best;
  sol.pattern = pat;

  // stationarity: (w1 + k1 + k2 a) nu + conj(w2) + k2 conj(xi) = 0
  const cd g = sp.w1 * sol.nu + std::conj(sp.w2);
  if (pat == ActivePattern::kPower) {
    sol.kappa_power = std::max(0.0, -std::real(std::conj(sol.nu) * g) / std::norm(sol.nu));
  } else if (pat == ActivePattern::kRis) {
    const cd dir = sp.ris.a * sol.nu + std::conj(sp.ris.xi);
    sol.kappa_ris = std::norm(dir) > 0 ? std::max(0.0, -std::real(std::conj(dir) * g) / std::norm(dir)) : 0.0;
  } else if (pat == ActivePattern::kBoth) {
    // solve [nu, dir] [k1; k2] = -g in the real plane
    const cd dir = sp.ris.a * sol.nu + std::conj(sp.ris.xi);
    Eigen::Matrix2d A;
    A << sol.nu.real(), dir.real(), sol.nu.imag(), dir.imag();
    const Eigen::Vector2d k = A.colPivHouseholderQr().solve(Eigen::Vector2d(-g.real(), -g.imag()));
    sol.kappa_power = std::max(0.0, k(0));
    sol.kappa_ris = std::max(0.0, k(1));
  }
  return sol;
}

/// Builds the subproblem of agent k at the current state (objective scaled by beta^2).
inline TransmissionSubproblem transmission_subproblem(int k, const Problem& p, const OptimizationState& s,
                                                      const VectorXcd& gains) {
  const auto& cfg = p.cfg;
  const int K = cfg.agents;
  const double beta2 = cfg.block_norm_bound * cfg.block_norm_bound;
  const double scale = cfg.signal_scale();

  cd coupling = 0.0;  // sum_{k' != k} u_kk' e_k'
  for (int j = 0; j < K; ++j)
    if (j != k) coupling += p.u(k, j) * (s.nu(j) * gains(j) - 1.0);

  TransmissionSubproblem sp;
  sp.w1 = beta2 * std::norm(gains(k));
  sp.w2 = beta2 * gains(k) * (std::conj(coupling) - 1.0);
  sp.power = {1.0, 0.0, 0.0, cfg.max_coeff_sq()};

  const int Na = s.ris.active_count();
  const VectorXd amp2 = s.ris.active_amplitudes().array().square();
  double a = 0.0;
  cd xi = 0.0;
  double c0 = cfg.ris_noise_w * amp2.sum();
  for (int n = 0; n < Na; ++n) {
    const cd hk = p.ch.ar(n, k);
    cd others = 0.0;  // sum_{k' != k} u_kk' nu_k' h_k'
    for (int j = 0; j < K; ++j)
      if (j != k) others += p.u(k, j) * s.nu(j) * p.ch.ar(n, j);
    a += amp2(n) * std::norm(hk);
    xi += amp2(n) * hk * std::conj(others);
    // terms without nu_k
    cd rest = 0.0;
    for (int i = 0; i < K; ++i) {
      if (i == k) continue;
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        rest += p.u(i, j) * std::conj(s.nu(i) * p.ch.ar(n, i)) * s.nu(j) * p.ch.ar(n, j);
      }
    }
    c0 += amp2(n) * scale * rest.real();
  }
  sp.ris = {scale * a, scale * xi, c0, cfg.ris_power_w};
  return sp;
}

inline TransmissionSolution solve_transmission_coefficient(int k, const Problem& p, const OptimizationState& s) {
  const VectorXcd gains = aligned_gains(p.ch, s.ris, s.b);
  return solve_transmission_subproblem(transmission_subproblem(k, p, s, gains), s.nu(k));
}

/// One Gauss-Seidel sweep of the per-agent subproblems.
inline void transmission_sweep(const Problem& p, OptimizationState& s) {
  const VectorXcd gains = aligned_gains(p.ch, s.ris, s.b);
  for (int k = 0; k < p.cfg.agents; ++k)
    s.nu(k) = solve_transmission_subproblem(transmission_subproblem(k, p, s, gains), s.nu(k)).nu;
}

/// Joint optimum of the coefficients for U = I: regularized channel inversion with a common RIS multiplier.
inline VectorXcd transmission_closed_form_uncorrelated(const Problem& p, const OptimizationState& s,
                                                       double* kappa_out = nullptr) {
  const auto& cfg = p.cfg;
  const int K = cfg.agents, Na = s.ris.active_count();
  const VectorXcd g = aligned_gains(p.ch, s.ris, s.b);
  const VectorXd amp2 = s.ris.active_amplitudes().array().square();
  VectorXd a = VectorXd::Zero(K);  // beta^2 J sum_{n in Na} |d_n|^2 |h_AR,k,n|^2
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < Na; ++n) a(k) += amp2(n) * std::norm(p.ch.ar(n, k));
  a *= cfg.signal_scale();
  const double noise = cfg.ris_noise_w * amp2.sum();
  const double cap = std::sqrt(cfg.max_coeff_sq());

  auto coeffs = [&](double kappa) {
    VectorXcd nu(K);
    for (int k = 0; k < K; ++k) {
      const double m = std::abs(g(k));
      if (m == 0) {
        nu(k) = 0.0;
        continue;
      }
      nu(k) = std::polar(std::min(m / (m * m + kappa * a(k)), cap), -std::arg(g(k)));
    }
    return nu;
  };
  auto power = [&](const VectorXcd& nu) { return noise + (a.array() * nu.array().abs2()).sum(); };

  double kappa = 0.0;
  VectorXcd nu = coeffs(0.0);
  if (Na > 0 && power(nu) > cfg.ris_power_w) {
    if (noise > cfg.ris_power_w) throw ConfigError("RIS noise alone exceeds the amplification budget");
    double lo = 0.0, hi = 1.0;
    while (power(coeffs(hi)) > cfg.ris_power_w) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double m = 0.5 * (lo + hi);
      (power(coeffs(m)) > cfg.ris_power_w ? lo : hi) = m;
    }
    kappa = hi;
    nu = coeffs(hi);
  }
  if (kappa_out) *kappa_out = kappa;
  return nu;
}

/// nu_k = sqrt(P_A/(beta^2 J)) e^{-j arg(h_k^T b)}.
inline VectorXcd full_power_coefficients(const Problem& p, const HybridRisState& ris, const VectorXcd& b) {
  const VectorXcd g = aligned_gains(p.ch, ris, b);
  const double cap = std::sqrt(p.cfg.max_coeff_sq());
  VectorXcd nu(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) nu(k) = std::polar(cap, -std::arg(g(k)));
  return nu;
}

}  // namespace hrdair
