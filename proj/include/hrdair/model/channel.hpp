#pragma once

#include "hrdair/model/config.hpp"
#include "hrdair/rng.hpp"

#include <cmath>
#include <vector>

namespace hrdair {

/// Half-wavelength ULA response: [exp(j*pi*i*c)]_i, c = cosine of the angle to the array axis.
inline VectorXcd steering_vector(int n, double cos_angle) {
  VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, kPi * i * cos_angle);
  return a;
}

/// Cosine of the angle between (to - from) and the x axis, along which every array lies.
inline double axis_cosine(const Point3& from, const Point3& to) {
  const double d = distance(from, to);
  return d > 0 ? (to.x - from.x) / d : 0.0;
}

inline double pathloss_gain(double distance, double exponent) {
  return 1e-3 * std::pow(distance, -exponent);
}

/// rows x cols Rician channel with pathloss 1e-3 d^-exponent.
/// LoS = a_rows(rx_cos) a_cols(tx_cos)^T; NLoS is i.i.d. CN(0,1). rician_factor may be +inf.
inline MatrixXcd generate_rician_channel(double distance, double exponent, double rician_factor, int rows,
                                         int cols, CounterRng& rng, double rx_cos = 0.0, double tx_cos = 0.0) {
  if (!(distance > 0)) throw ParameterError("channel distance must be positive");
  if (!(rician_factor >= 0)) throw ParameterError("Rician factor must be non-negative");
  require(rows >= 0 && cols >= 0, "channel dimensions must be non-negative");
  const double amp = std::sqrt(pathloss_gain(distance, exponent));
  const bool pure_los = std::isinf(rician_factor);
  const double w_los = pure_los ? 1.0 : std::sqrt(rician_factor / (1.0 + rician_factor));
  const double w_nlos = pure_los ? 0.0 : std::sqrt(1.0 / (1.0 + rician_factor));

  MatrixXcd h = MatrixXcd::Zero(rows, cols);
  if (w_los > 0) h = w_los * steering_vector(rows, rx_cos) * steering_vector(cols, tx_cos).transpose();
  if (w_nlos > 0) h += w_nlos * complex_normal_matrix(rng, rows, cols);
  return amp * h;
}

/// One network realization. Column k of ae / ar is agent k's channel.
struct ChannelSet {
  MatrixXcd ae;  // M x K, agent -> EN
  MatrixXcd ar;  // N x K, agent -> RIS
  MatrixXcd re;  // M x N, RIS -> EN
  std::vector<Point3> agent_positions;

  int agents() const { return static_cast<int>(ae.cols()); }
  int antennas() const { return static_cast<int>(ae.rows()); }
  int elements() const { return static_cast<int>(re.cols()); }

  bool all_finite() const { return ae.allFinite() && ar.allFinite() && re.allFinite(); }
};

/// Uniform point in the horizontal disc around cfg.agent_center.
inline Point3 draw_agent_position(const SystemConfig& cfg, CounterRng& rng) {
  const double r = cfg.agent_radius * std::sqrt(rng.uniform());
  const double th = 2.0 * kPi * rng.uniform();
  return {cfg.agent_center.x + r * std::cos(th), cfg.agent_center.y + r * std::sin(th), cfg.agent_center.z};
}

inline ChannelSet generate_channels(const SystemConfig& cfg, CounterRng& rng) {
  const int K = cfg.agents, M = cfg.en_antennas, N = cfg.ris_elements;
  ChannelSet ch;
  ch.ae.resize(M, K);
  ch.ar.resize(N, K);
  ch.agent_positions.reserve(K);

  const Point3& en = cfg.en_position;
  const Point3& ris = cfg.ris_position;
  ch.re = generate_rician_channel(distance(ris, en), cfg.pathloss_re, cfg.rician_re, M, N, rng,
                                  axis_cosine(en, ris), axis_cosine(ris, en));
  for (int k = 0; k < K; ++k) {
    const Point3 p = draw_agent_position(cfg, rng);
    ch.agent_positions.push_back(p);
    ch.ae.col(k) = generate_rician_channel(distance(p, en), cfg.pathloss_ae, cfg.rician_ae, M, 1, rng,
                                           axis_cosine(en, p));
    ch.ar.col(k) = generate_rician_channel(distance(p, ris), cfg.pathloss_ar, cfg.rician_ar, N, 1, rng,
                                           axis_cosine(ris, p));
  }
  return ch;
}

}  // namespace hrdair
