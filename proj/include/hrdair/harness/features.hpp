#pragma once

#include "hrdair/theory/gmm.hpp"

namespace hrdair {

struct FeatureSample {
  VectorXd global;  // f
  MatrixXd local;   // W x K, column k is f_k = f + w_k
  int label = 0;
};

/// f from the mixture, f_k = f + w_k with w_k ~ N(0, sigmaF2 I).
inline FeatureSample generate_features(const GmmModel& gmm, int K, double sigma_f2, CounterRng& rng) {
  require(K >= 1 && sigma_f2 >= 0, "K must be >= 1 and sigmaF2 >= 0");
  FeatureSample s;
  std::tie(s.global, s.label) = gmm.sample(rng);
  s.local = s.global.replicate(1, K);
  if (sigma_f2 > 0) {
    const double sd = std::sqrt(sigma_f2);
    for (int k = 0; k < K; ++k)
      for (int w = 0; w < gmm.dim(); ++w) s.local(w, k) += sd * rng.normal();
  }
  return s;
}

}  // namespace hrdair
