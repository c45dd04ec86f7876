#pragma once

#include "hrdair/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hrdair {

inline constexpr double kExactAggregationDb = -120.0;

/// 10 lg(sum ||x_hat - x||^2 / sum ||x||^2), floored at -120 dB.
inline double normalized_aggregation_mse(const std::vector<VectorXd>& x_hat, const std::vector<VectorXd>& x) {
  if (x_hat.size() != x.size()) throw ParameterError("aggregate lists differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x_hat[i].size() != x[i].size()) throw ParameterError("aggregate lengths differ");
    num += (x_hat[i] - x[i]).squaredNorm();
    den += x[i].squaredNorm();
  }
  if (!(den > 0)) throw ParameterError("all-zero true aggregate");
  if (num == 0) return kExactAggregationDb;
  return std::max(kExactAggregationDb, 10.0 * std::log10(num / den));
}

/// Running mean and standard error.
class MeanAccumulator {
 public:
  void add(double v) {
    ++n_;
    sum_ += v;
    sum2_ += v * v;
  }
  int count() const { return n_; }
  double mean() const { return n_ ? sum_ / n_ : 0.0; }
  double se() const {
    if (n_ < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum2_ - n_ * m * m) / (n_ - 1)) / n_);
  }

 private:
  int n_ = 0;
  double sum_ = 0.0, sum2_ = 0.0;
};

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && a.size() >= 2, "need two equal-length samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

}  // namespace hrdair
