#pragma once

#include "hrdair/codec/codebook.hpp"

#include <vector>

namespace hrdair {

/// Concatenation over blocks of (1/K) Q_t x_t.
inline VectorXd reconstruct_global(const std::vector<VectorXd>& aggregates, const std::vector<const MatrixXd*>& q,
                                   double K) {
  if (aggregates.size() != q.size()) throw ParameterError("one codebook per aggregate required");
  require(K > 0, "agent count must be positive");
  Eigen::Index W = 0;
  for (const auto* c : q) W += c->rows();
  VectorXd f(W);
  Eigen::Index s = 0;
  for (std::size_t t = 0; t < q.size(); ++t) {
    if (aggregates[t].size() != q[t]->cols()) throw ParameterError("aggregate length does not match codebook size");
    f.segment(s, q[t]->rows()) = (*q[t] * aggregates[t]) / K;
    s += q[t]->rows();
  }
  return f;
}

inline VectorXd reconstruct_global(const std::vector<VectorXd>& aggregates,
                                   const std::vector<const CodebookPair*>& codebooks, double K) {
  std::vector<const MatrixXd*> q;
  for (const auto* c : codebooks) q.push_back(&c->q);
  return reconstruct_global(aggregates, q, K);
}

}  // namespace hrdair
