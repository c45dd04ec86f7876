#pragma once

#include "hrdair/core.hpp"
#include "hrdair/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace hrdair {

/// Quantization codebook Q (D x I, unit columns) paired index-for-index with modulation codebook P (J x I).
struct CodebookPair {
  MatrixXd q;
  MatrixXcd p;
  int bits = 0;

  Eigen::Index size() const { return q.cols(); }
  int block_length() const { return static_cast<int>(q.rows()); }
  int sequence_length() const { return static_cast<int>(p.rows()); }
};

inline Eigen::Index codebook_size(int bits) {
  require(bits >= 0 && bits < 31, "bits must lie in [0, 30]");
  return Eigen::Index{1} << bits;
}

enum class LloydInit { kRandomSamples, kPlusPlus };

struct LloydOptions {
  int max_iters = 100;
  double rel_tol = 1e-6;
  LloydInit init = LloydInit::kRandomSamples;
};

struct LloydResult {
  MatrixXd codebook;
  std::vector<double> distortion;  // mean ||v - q||^2 after each assignment pass
};

namespace detail {

inline void normalize_columns(MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0) m.col(j) /= n;
    else {
      m.col(j).setZero();
      m(0, j) = 1.0;
    }
  }
}

/// Nearest codeword per sample (max inner product == min distance for unit vectors); lowest index on ties.
inline void assign_nearest(const MatrixXd& codebook, const MatrixXd& samples, std::vector<Eigen::Index>& label,
                           VectorXd& best) {
  const Eigen::Index S = samples.cols(), I = codebook.cols();
  label.assign(S, 0);
  best.resize(S);
  constexpr Eigen::Index kChunk = 4096;
  MatrixXd ip;
  for (Eigen::Index s0 = 0; s0 < S; s0 += kChunk) {
    const Eigen::Index cs = std::min(kChunk, S - s0);
    ip.noalias() = codebook.transpose() * samples.middleCols(s0, cs);
    for (Eigen::Index s = 0; s < cs; ++s) {
      Eigen::Index arg = 0;
      double v = ip(0, s);
      for (Eigen::Index i = 1; i < I; ++i)
        if (ip(i, s) > v) {
          v = ip(i, s);
          arg = i;
        }
      label[s0 + s] = arg;
      best(s0 + s) = v;
    }
  }
}

}  // namespace detail

/// Unit-norm training vectors: normalized i.i.d. Gaussians (D x count).
inline MatrixXd gaussian_unit_samples(int D, Eigen::Index count, CounterRng& rng) {
  MatrixXd s(D, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (int i = 0; i < D; ++i) s(i, j) = rng.normal();
  detail::normalize_columns(s);
  return s;
}

/// Spherical Lloyd (k-means on the unit sphere) producing 2^bits unit codewords.
inline LloydResult train_codebook_detailed(int D, int bits, const MatrixXd& samples, CounterRng& rng,
                                           const LloydOptions& opt = {}) {
  require(D >= 1 && samples.rows() == D, "training samples must be D-dimensional");
  const Eigen::Index I = codebook_size(bits);
  const Eigen::Index S = samples.cols();
  if (S < I) throw ParameterError("need at least 2^bits training samples");

  LloydResult res;
  MatrixXd q(D, I);
  if (I == 1) {
    q.col(0) = samples.rowwise().sum();
    detail::normalize_columns(q);
    std::vector<Eigen::Index> lab;
    VectorXd best;
    detail::assign_nearest(q, samples, lab, best);
    res.distortion.push_back(2.0 - 2.0 * best.mean());
    res.codebook = q;
    return res;
  }

  if (opt.init == LloydInit::kPlusPlus) {
    // D^2 seeding with distance ||v - q||^2 = 2 - 2 v.q
    VectorXd d2 = VectorXd::Constant(S, kInf);
    Eigen::Index first = static_cast<Eigen::Index>(rng.uniform() * S);
    q.col(0) = samples.col(first);
    for (Eigen::Index i = 1; i < I; ++i) {
      const VectorXd ip = samples.transpose() * q.col(i - 1);
      d2 = d2.cwiseMin((2.0 - 2.0 * ip.array()).max(0.0).matrix());
      const double total = d2.sum();
      Eigen::Index pick = S - 1;
      if (total > 0) {
        double r = rng.uniform() * total, acc = 0.0;
        for (Eigen::Index s = 0; s < S; ++s) {
          acc += d2(s);
          if (acc > r) {
            pick = s;
            break;
          }
        }
      } else {
        pick = static_cast<Eigen::Index>(rng.uniform() * S);
      }
      q.col(i) = samples.col(pick);
    }
  } else {
    // distinct random samples (partial Fisher-Yates)
    std::vector<Eigen::Index> idx(S);
    for (Eigen::Index s = 0; s < S; ++s) idx[s] = s;
    for (Eigen::Index i = 0; i < I; ++i) {
      const Eigen::Index j = i + static_cast<Eigen::Index>(rng.uniform() * (S - i));
      std::swap(idx[i], idx[std::min(j, S - 1)]);
      q.col(i) = samples.col(idx[i]);
    }
  }

  std::vector<Eigen::Index> label;
  VectorXd best;
  double prev = kInf;
  for (int it = 0; it < opt.max_iters; ++it) {
    detail::assign_nearest(q, samples, label, best);
    const double dist = 2.0 - 2.0 * best.mean();
    res.distortion.push_back(dist);
    if (std::isfinite(prev) && prev - dist < opt.rel_tol * std::max(prev, 1e-300)) break;
    prev = dist;

    MatrixXd sum = MatrixXd::Zero(D, I);
    std::vector<Eigen::Index> count(I, 0);
    for (Eigen::Index s = 0; s < S; ++s) {
      sum.col(label[s]) += samples.col(s);
      ++count[label[s]];
    }
    // empty clusters take the samples farthest from their codeword, one each
    std::vector<Eigen::Index> order;
    if (std::find(count.begin(), count.end(), 0) != count.end()) {
      order.resize(S);
      for (Eigen::Index s = 0; s < S; ++s) order[s] = s;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return best(a) < best(b); });
    }
    std::size_t cursor = 0;
    for (Eigen::Index i = 0; i < I; ++i) {
      if (count[i] > 0) q.col(i) = sum.col(i);
      else q.col(i) = samples.col(order[cursor++]);
    }
    detail::normalize_columns(q);
  }
  res.codebook = q;
  return res;
}

inline MatrixXd train_codebook(int D, int bits, const MatrixXd& samples, CounterRng& rng,
                               const LloydOptions& opt = {}) {
  return train_codebook_detailed(D, bits, samples, rng, opt).codebook;
}

/// J x 2^bits matrix of i.i.d. equiprobable symbols (+-1 +-j)/sqrt(2).
inline MatrixXcd build_modulation_codebook(int J, int bits, CounterRng& rng) {
  require(J >= 1, "J must be >= 1");
  const Eigen::Index I = codebook_size(bits);
  const double s = 1.0 / std::sqrt(2.0);
  MatrixXcd p(J, I);
  std::uint64_t word = 0;
  int left = 0;
  for (Eigen::Index i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) {
      if (left == 0) {
        word = rng();
        left = 32;
      }
      p(j, i) = cd((word & 1) ? s : -s, (word & 2) ? s : -s);
      word >>= 2;
      --left;
    }
  return p;
}

/// Mean distortion E||v - Q(v)||^2 of a codebook over unit samples.
inline double empirical_distortion(const MatrixXd& codebook, const MatrixXd& samples) {
  std::vector<Eigen::Index> lab;
  VectorXd best;
  detail::assign_nearest(codebook, samples, lab, best);
  return std::max(0.0, 2.0 - 2.0 * best.mean());
}

// ---------------------------------------------------------------------------
// Binary codebook files: "HRDC", uint32 D, J, bits, then Q and P row-major,
// little-endian doubles (P as interleaved re, im).

namespace detail {
template <class T>
void put(std::ostream& o, T v) {
  static_assert(std::endian::native == std::endian::little, "codebook files assume a little-endian host");
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParameterError("truncated codebook file");
  return v;
}
}  // namespace detail

inline void write_codebook(std::ostream& out, const CodebookPair& cb) {
  out.write("HRDC", 4);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.block_length()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.sequence_length()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.bits));
  for (Eigen::Index r = 0; r < cb.q.rows(); ++r)
    for (Eigen::Index c = 0; c < cb.q.cols(); ++c) detail::put<double>(out, cb.q(r, c));
  for (Eigen::Index r = 0; r < cb.p.rows(); ++r)
    for (Eigen::Index c = 0; c < cb.p.cols(); ++c) {
      detail::put<double>(out, cb.p(r, c).real());
      detail::put<double>(out, cb.p(r, c).imag());
    }
}

inline CodebookPair read_codebook(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "HRDC") throw ParameterError("not a codebook file");
  const auto D = detail::get<std::uint32_t>(in);
  const auto J = detail::get<std::uint32_t>(in);
  const auto bits = detail::get<std::uint32_t>(in);
  CodebookPair cb;
  cb.bits = static_cast<int>(bits);
  const Eigen::Index I = codebook_size(cb.bits);
  cb.q.resize(D, I);
  cb.p.resize(J, I);
  for (Eigen::Index r = 0; r < cb.q.rows(); ++r)
    for (Eigen::Index c = 0; c < I; ++c) cb.q(r, c) = detail::get<double>(in);
  for (Eigen::Index r = 0; r < cb.p.rows(); ++r)
    for (Eigen::Index c = 0; c < I; ++c) {
      const double re = detail::get<double>(in);
      cb.p(r, c) = cd(re, detail::get<double>(in));
    }
  return cb;
}

inline void save_codebook(const std::string& path, const CodebookPair& cb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write codebook file '" + path + "'");
  write_codebook(out, cb);
}

inline CodebookPair load_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open codebook file '" + path + "'");
  return read_codebook(in);
}

// ---------------------------------------------------------------------------

/// Process-wide cache of trained codebooks keyed by (D, J, bits, seed, init).
/// Training data per codebook: min(64 * 2^bits, max_training_samples) normalized Gaussians.
class CodebookLibrary {
 public:
  static constexpr Eigen::Index kSamplesPerCodeword = 64;
  static constexpr Eigen::Index kMaxTrainingSamples = Eigen::Index{1} << 16;

  std::shared_ptr<const CodebookPair> get(int D, int J, int bits, std::uint64_t seed,
                                          LloydInit init = LloydInit::kRandomSamples) {
    const auto key = std::make_tuple(D, J, bits, seed, static_cast<int>(init));
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    CounterRng base(seed);
    const std::uint64_t tag = (static_cast<std::uint64_t>(D) << 40) ^ (static_cast<std::uint64_t>(bits) << 32) ^
                              static_cast<std::uint64_t>(init);
    CounterRng train_rng = base.substream(Stream::kCodebooks, tag);
    CounterRng mod_rng = base.substream(Stream::kCodebooks, (std::uint64_t{1} << 63) ^
                                                                (static_cast<std::uint64_t>(J) << 32) ^
                                                                static_cast<std::uint64_t>(bits));
    const Eigen::Index I = codebook_size(bits);
    const Eigen::Index n = std::min(kSamplesPerCodeword * I, std::max(kMaxTrainingSamples, I));
    const MatrixXd samples = gaussian_unit_samples(D, n, train_rng);
    LloydOptions opt;
    opt.init = init;

    auto cb = std::make_shared<CodebookPair>();
    cb->bits = bits;
    cb->q = train_codebook(D, bits, samples, train_rng, opt);
    cb->p = build_modulation_codebook(J, bits, mod_rng);
    cache_.emplace(key, cb);
    return cb;
  }

  static CodebookLibrary& global() {
    static CodebookLibrary lib;
    return lib;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int, std::uint64_t, int>, std::shared_ptr<const CodebookPair>> cache_;
};

}  // namespace hrdair
