#pragma once

#include "hrdair/codec/codebook.hpp"

#include <vector>

namespace hrdair {

/// Splits f into W/D consecutive blocks of length D.
inline std::vector<VectorXd> partition_features(const VectorXd& f, int D) {
  require(D >= 1 && f.size() % D == 0, "feature length must be a multiple of D");
  std::vector<VectorXd> blocks;
  for (Eigen::Index s = 0; s < f.size(); s += D) blocks.emplace_back(f.segment(s, D));
  return blocks;
}

inline VectorXd concatenate_blocks(const std::vector<VectorXd>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.size();
  VectorXd f(n);
  Eigen::Index s = 0;
  for (const auto& b : blocks) {
    f.segment(s, b.size()) = b;
    s += b.size();
  }
  return f;
}

struct BlockDecomposition {
  double norm = 0.0;
  VectorXd unit;
};

/// (||v||, v/||v||). A zero block yields norm 0 and unit vector e_1.
inline BlockDecomposition decompose_block(const VectorXd& block) {
  require(block.size() >= 1, "empty block");
  BlockDecomposition out;
  out.norm = block.norm();
  if (out.norm > 0) {
    out.unit = block / out.norm;
  } else {
    out.unit = VectorXd::Zero(block.size());
    out.unit(0) = 1.0;
  }
  return out;
}

/// Index of the codeword nearest to v in Euclidean distance; lowest index wins ties.
inline Eigen::Index quantize_block(const VectorXd& v, const MatrixXd& codebook) {
  require(codebook.cols() >= 1 && codebook.rows() == v.size(), "codebook does not match block length");
  Eigen::Index arg = 0;
  double best = kInf;
  for (Eigen::Index i = 0; i < codebook.cols(); ++i) {
    const double d = (v - codebook.col(i)).squaredNorm();
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  return arg;
}

/// Nearest codeword for each column of V (unit vectors), via one matrix product.
inline std::vector<Eigen::Index> quantize_blocks(const MatrixXd& units, const MatrixXd& codebook) {
  std::vector<Eigen::Index> label;
  VectorXd best;
  detail::assign_nearest(codebook, units, label, best);
  return label;
}

struct EncodedBlock {
  double norm = 0.0;
  Eigen::Index index = 0;
  VectorXcd signal;
};

/// s = norm * P[:, index].
inline VectorXcd encode_block(double norm, Eigen::Index index, const MatrixXcd& modulation) {
  if (index < 0 || index >= modulation.cols()) throw ParameterError("codeword index out of range");
  return norm * modulation.col(index);
}

inline EncodedBlock encode(const VectorXd& block, const CodebookPair& cb) {
  const auto dec = decompose_block(block);
  EncodedBlock e;
  e.norm = dec.norm;
  e.index = quantize_block(dec.unit, cb.q);
  e.signal = encode_block(e.norm, e.index, cb.p);
  return e;
}

/// Exact aggregate x_t: entry i is the sum of the norms of agents that chose codeword i.
inline VectorXd aggregate_oracle(const std::vector<EncodedBlock>& blocks, Eigen::Index codebook_size) {
  VectorXd x = VectorXd::Zero(codebook_size);
  for (const auto& b : blocks) {
    if (b.index < 0 || b.index >= codebook_size) throw ParameterError("codeword index out of range");
    x(b.index) += b.norm;
  }
  return x;
}

}  // namespace hrdair
