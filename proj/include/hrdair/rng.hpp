#pragma once

#include "hrdair/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace hrdair {

/// Purposes for which a trial derives an independent random sub-stream.
enum class Stream : std::uint64_t {
  kChannels = 1,
  kNoise = 2,
  kCodebooks = 3,
  kFeatures = 4,
  kInit = 5,
  kTask = 6,
  kEntropy = 7,
  kTest = 99,
};

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based 64-bit generator: output i is a bijective mix of (key, i).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) : key_(detail::splitmix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    return detail::splitmix64(key_ ^ detail::splitmix64(counter_++ + 0x632BE59BD9B4E019ULL));
  }

  /// Independent stream keyed by (this key, purpose, index). Does not advance *this.
  CounterRng substream(Stream purpose, std::uint64_t index = 0) const {
    CounterRng r;
    r.key_ = detail::splitmix64(key_ ^ detail::splitmix64(static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL + index));
    return r;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  /// Circularly-symmetric CN(0, variance).
  cd complex_normal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    return {s * normal(), s * normal()};
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline VectorXcd complex_normal_vector(CounterRng& rng, Eigen::Index n, double variance = 1.0) {
  VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal(variance);
  return v;
}

inline MatrixXcd complex_normal_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols,
                                       double variance = 1.0) {
  MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal(variance);
  return m;
}

}  // namespace hrdair
