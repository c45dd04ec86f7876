#pragma once

#include "hrdair/hrdair.hpp"

namespace testing_support {

using namespace hrdair;

inline SystemConfig small_config(int K, int M, int N, int Na) {
  SystemConfig cfg;
  cfg.agents = K;
  cfg.en_antennas = M;
  cfg.ris_elements = N;
  cfg.active_elements = Na;
  cfg.finalize();
  return cfg;
}

/// Unit-scale channels (no pathloss), handy when absolute magnitudes should be O(1).
inline ChannelSet unit_channels(int K, int M, int N, CounterRng& rng) {
  ChannelSet ch;
  ch.ae = complex_normal_matrix(rng, M, K);
  ch.ar = complex_normal_matrix(rng, N, K);
  ch.re = complex_normal_matrix(rng, M, N);
  return ch;
}

inline HybridRisState random_ris(int N, int Na, CounterRng& rng, double max_amp = 2.0) {
  HybridRisState r(N, Na);
  VectorXd a(N);
  for (int n = 0; n < N; ++n) a(n) = 2 * kPi * rng.uniform();
  r.set_phases(a);
  VectorXd q(Na);
  for (int n = 0; n < Na; ++n) q(n) = max_amp * rng.uniform();
  r.set_active_amplitudes(q);
  return r;
}

/// Random symmetric matrix with unit diagonal and entries in [0, 1] that is also PSD.
inline CorrelationMatrix random_psd_correlation(int K, CounterRng& rng) {
  MatrixXd f(K + 2, K);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K + 2; ++i) f(i, k) = std::abs(rng.normal()) + 0.2;
  for (int k = 0; k < K; ++k) f.col(k).normalize();
  return sanitize_correlation(f.transpose() * f);
}

}  // namespace testing_support
